"""Nielsen-method tools for groups acting on hyperbolic spaces.

Space backends, coarse geometry, subgroup hulls, minimal connectors, Nielsen
and G-tuple reduction, free-product certificates and a command-line driver.
"""

__version__ = "0.1.0"

from .constants import ConstantsRegistry, default_registry
from .errors import (BudgetExhausted, CapExceeded, Indeterminate, NielsenHypError,
                     PreconditionError, SpecError, WindowError)
from .space import PathSample, SpaceHandle, SpaceSpec, free_group, make_space, tree_from_edges

__all__ = [
    "__version__",
    "BudgetExhausted",
    "CapExceeded",
    "ConstantsRegistry",
    "Indeterminate",
    "NielsenHypError",
    "PathSample",
    "PreconditionError",
    "SpaceHandle",
    "SpaceSpec",
    "SpecError",
    "WindowError",
    "default_registry",
    "free_group",
    "make_space",
    "tree_from_edges",
]
