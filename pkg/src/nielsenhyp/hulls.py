"""Subgroup geometry: displacement, limit samples and convex hulls in a window.

A subgroup is given by generators.  Every set is built from subgroup words
applied to a basepoint and from canonical geodesics, then cut down to the
ball of radius ``window_radius`` around the basepoint.  Conjugating the
generators by g and moving the basepoint by g therefore moves every set by g.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .coarse import dist_to_set, hausdorff
from .constants import ConstantsRegistry
from .errors import PreconditionError, WindowError
from .words import cyclic_reduction, inverse, multiply, power

TREE_EXACT = "tree_exact"
COARSE = "coarse_sampled"


@dataclass
class SubgroupGens:
    gens: list
    label: str = "U"

    def __post_init__(self):
        if not self.gens:
            raise PreconditionError("subgroup needs at least one generator")
        self.gens = list(self.gens)

    def check(self, space):
        for g in self.gens:
            if space.is_trivial(g):
                raise PreconditionError("generator of %s is trivial" % self.label)
        return self

    def conjugate(self, space, g):
        return SubgroupGens([space.conjugate(u, g) for u in self.gens], self.label)


@dataclass
class LengthReport:
    translation_len: float
    asymptotic_len: float
    n_used: int
    trace: list = field(default_factory=list)


def _elem_key(space, g):
    if space.is_word:
        return g
    if space.backend_kind == "half_plane":
        return tuple(round(v, 9) for v in (g.a, g.b, g.c, g.d))
    return g


def subgroup_elements(space, U, max_len, exact=None):
    """Distinct elements given by freely reduced subgroup words.

    Returns (element, symbolic word) pairs in shortlex order of the symbolic
    words; the symbolic word uses +-(i+1) for generator i.  With ``exact``
    only words of that length are used.
    """
    letters = []
    for i in range(len(U.gens)):
        letters += [i + 1, -(i + 1)]
    inv = [space.inverse(g) for g in U.gens]
    seen = {}
    out = []
    layer = [((), space.identity())]
    for length in range(max_len + 1):
        if exact is None or length == exact:
            for sym, el in layer:
                k = _elem_key(space, el)
                if k not in seen:
                    seen[k] = sym
                    out.append((el, sym))
        if length == max_len:
            break
        nxt = []
        for sym, el in layer:
            for x in letters:
                if sym and sym[-1] == -x:
                    continue
                g = U.gens[x - 1] if x > 0 else inv[-x - 1]
                nxt.append((sym + (x,), space.compose(el, g)))
        layer = nxt
    return out


def sym_to_element(space, U, sym):
    out = space.identity()
    for x in sym:
        out = space.compose(out, U.gens[x - 1] if x > 0 else space.inverse(U.gens[-x - 1]))
    return out


def translation_length(space, g, domain):
    domain = list(domain)
    if not domain:
        raise PreconditionError("empty domain")
    return min(space.dist(x, space.apply(g, x)) for x in domain)


def asymptotic_translation_length(space, g, n_max, basepoint=None):
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    x = space.basepoint() if basepoint is None else basepoint
    trace = []
    gn = space.identity()
    for n in range(1, n_max + 1):
        gn = space.compose(g, gn)
        trace.append(space.dist(x, space.apply(gn, x)) / n)
    return LengthReport(translation_length(space, g, [x]), trace[-1], n_max, trace)


def small_displacement_set(space, U, domain, threshold, word_len=2, elements=None):
    """Points of ``domain`` moved at most ``threshold`` by a nontrivial subgroup word.

    Returns {point: symbolic witness} in canonical point order.
    """
    if threshold < 0:
        raise PreconditionError("threshold must be nonnegative")
    elems = elements if elements is not None else subgroup_elements(space, U, word_len)
    elems = [(g, s) for g, s in elems if not space.is_trivial(g)]
    found = {}
    domain = space.canonical(domain)
    for x in domain:
        for g, s in elems:
            if space.dist(x, space.apply(g, x)) <= threshold + 1e-9:
                found[x] = s
                break
    return found


def limit_sample(space, U, depth, basepoint=None):
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    x = space.basepoint() if basepoint is None else basepoint
    elems = subgroup_elements(space, U, depth, exact=depth)
    return space.canonical(space.apply(g, x) for g, _ in elems)


NET_STEP = 0.1


def conv(space, pts, window=None):
    """Union of canonical geodesics between all pairs (one Conv round).

    ``window`` = (center, radius) restricts the output.  On 0-hyperbolic
    backends the union of geodesics from one point to all others already
    spans the convex hull, which keeps this linear in the input size.
    """
    pts = space.canonical(pts)
    out = dict.fromkeys(pts)
    if not space.is_word and space.backend_kind != "tree":
        # geodesics are sampled at NET_STEP anyway; finer input only repeats them
        pts = _net(space, pts, NET_STEP)
    if len(pts) > 1:
        if space.delta == 0:
            p0 = pts[0]
            for q in pts[1:]:
                out.update(dict.fromkeys(space.geodesic(p0, q).points))
        else:
            for i, p in enumerate(pts):
                for q in pts[i + 1:]:
                    out.update(dict.fromkeys(space.geodesic(p, q).points))
    if not space.is_word and space.backend_kind != "tree":
        out = _net(space, space.canonical(out), NET_STEP / 2)
    return _windowed(space, out, window)


def _net(space, pts, eps):
    """Greedy eps-net of ``pts`` in the given order."""
    keep = []
    for p in pts:
        if not keep or space.dist_matrix([p], keep)[0].min() > eps:
            keep.append(p)
    return keep


def _windowed(space, pts, window):
    pts = list(pts)
    if window is not None and pts:
        c, r = window
        d = space.dist_matrix([c], pts)[0]
        pts = [p for p, dv in zip(pts, d) if dv <= r + 1e-9]
    return space.canonical(pts)


@dataclass
class HullApprox:
    subgroup: SubgroupGens
    window_radius: float
    basepoint: object
    orbit_sample: list
    limit_sample: list
    small_disp: list
    z_set: list
    hull: list
    weak_hull: list
    mode: str
    threshold: float
    depth: int
    word_len: int
    witnesses: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def translate(self, space, g):
        """The hull of g U g^-1 with basepoint g x, obtained by moving every set."""
        mv = lambda S: space.canonical(space.apply(g, p) for p in S)
        return replace(
            self,
            subgroup=self.subgroup.conjugate(space, g),
            basepoint=space.apply(g, self.basepoint),
            orbit_sample=mv(self.orbit_sample),
            limit_sample=mv(self.limit_sample),
            small_disp=mv(self.small_disp),
            z_set=mv(self.z_set),
            hull=mv(self.hull),
            weak_hull=mv(self.weak_hull),
            witnesses={space.apply(g, p): s for p, s in self.witnesses.items()},
            warnings=list(self.warnings),
        )

    def window(self):
        return (self.basepoint, self.window_radius)


def _default_depth(space, U, x, W):
    glen = max(space.dist(x, space.apply(g, x)) for g in U.gens)
    return max(1, int(math.ceil(2 * W / max(glen, 1.0))))


def _domain(space, x, W, fallback):
    if space.is_word:
        return space.ball(x, W)
    return list(fallback)


def convex_hull_approx(space, U, window_radius, mode=COARSE, basepoint=None, depth=None,
                       threshold=None, word_len=None, registry=None):
    U.check(space)
    registry = registry or ConstantsRegistry()
    x = space.basepoint() if basepoint is None else basepoint
    W = float(window_radius)
    if threshold is None:
        threshold = float(registry.get("delta_threshold", space.delta))
    if word_len is None:
        word_len = max(1, int(math.ceil(W)))
    if depth is None:
        depth = _default_depth(space, U, x, W)
    win = (x, W)
    notes = []

    elems = subgroup_elements(space, U, word_len)
    orbit = _windowed(space, (space.apply(g, x) for g, _ in elems), win)
    lam = limit_sample(space, U, depth, x)

    if mode == TREE_EXACT:
        if space.backend_kind != "free_cayley":
            raise PreconditionError("tree_exact mode needs the free group backend")
        core = minimal_subtree(space, U, x, W)
        if threshold > 0:
            wit = small_displacement_set(space, U, space.ball(x, W), threshold,
                                         elements=subgroup_elements(space, U, min(word_len, 2)))
        else:
            wit = {}
        E = space.canonical(wit)
        z = conv(space, core + E, win) if E else core
        hull = z
        weak = core
    elif mode == COARSE:
        if space.is_word:
            dom = _domain(space, x, W, ())
        else:
            dom = conv(space, list(lam) + orbit, win)
        # E(U) uses short words only: longer words move points farther
        wit = small_displacement_set(space, U, dom, threshold,
                                     elements=subgroup_elements(space, U, min(word_len, 2)))
        E = space.canonical(wit)
        z = conv(space, list(lam) + E, win)
        hull = conv(space, z, win)
        weak = conv(space, lam, win)
    else:
        raise PreconditionError("unknown hull mode %r" % mode)

    if len(lam) <= 1 and not E:
        notes.append("degenerate: limit sample has <= 1 point and E is empty")
        warnings.warn(notes[-1])
    if not hull:
        notes.append("hull misses the window")
    return HullApprox(U, W, x, orbit, lam, E, z, hull, weak, mode, float(threshold), depth,
                      word_len, wit, notes)


# ----------------------------------------------------------------------------
# exact minimal invariant subtree in the free group


def _axis_points(space, g, x, W):
    """Points of the axis of g within distance W of x."""
    c, r = cyclic_reduction(g)
    pts = {}
    # the axis is {c r^k p : p prefix of r}; distance from x grows linearly in |k|
    base = space.dist(x, c)
    kmax = int((W + base) // len(r)) + 2
    for k in range(-kmax, kmax + 1):
        ck = multiply(c, power(r, k))
        for i in range(len(r)):
            p = multiply(ck, r[:i])
            pts[p] = None
    return [p for p in pts if space.dist(x, p) <= W + 1e-9]


def minimal_subtree(space, U, x, W):
    """Vertices of the minimal U-invariant subtree within distance W of x.

    A vertex v lies in the subtree exactly when the reduced word v can be read
    from the base of the folded subgroup graph and ends on its cyclic core.
    The subtree meets the ball in a connected set, found by search from the
    gate of x.
    """
    from .stallings import FoldedGraph

    G = FoldedGraph([tuple(g) for g in U.gens])
    core = G.core()
    if not core:
        return []
    if len(G.edges) == len(core) and G.rank == 1 and len(U.gens) >= 1:
        # cyclic subgroup: the subtree is one axis
        gen = G.basis()[0]
        return space.canonical(_axis_points(space, gen, x, W))

    def state(v):
        s = G.read(v)
        return s if s is not None and s in core else None

    hair = G.hair()
    path = space.geodesic(x, hair).points
    seed = next(p for p in path if state(p) is not None)
    if space.dist(x, seed) > W + 1e-9:
        return []
    out = {seed: None}
    stack = [seed]
    while stack:
        v = stack.pop()
        s = G.read(v)
        for letter, t in G.out[s].items():
            if t not in core:
                continue
            w = multiply(v, (letter,))
            if w in out or space.dist(x, w) > W + 1e-9:
                continue
            out[w] = None
            stack.append(w)
    return space.canonical(out)


# ----------------------------------------------------------------------------


def check_hull_closeness(space, hull, registry=None, n_max=10, elements=None):
    """Measured Hausdorff distances and the E(g)-containment check, as a dict."""
    registry = registry or ConstantsRegistry()
    us = space.unit_scale
    rep = {
        "weak_vs_hull": hausdorff(space, hull.weak_hull, hull.hull) / us,
        "orbit_vs_hull": hausdorff(space, hull.orbit_sample, hull.hull) / us,
    }
    delta = space.internal_delta
    checks = []
    elems = elements if elements is not None else subgroup_elements(space, hull.subgroup, 1)
    dom = hull.hull if not space.is_word else space.ball(hull.basepoint, hull.window_radius)
    for g, sym in elems:
        if space.is_trivial(g):
            continue
        c = asymptotic_translation_length(space, g, n_max, hull.basepoint).asymptotic_len / us
        if c <= 0:
            continue
        k = float(registry.get("lemma48_k", delta, c)) if delta > 0 else 0.0
        thr = float(registry.get("delta_threshold", space.delta))
        Eg = [p for p in dom if space.dist(p, space.apply(g, p)) <= thr + 1e-9]
        if not Eg:
            checks.append((sym, c, k, 0.0, True))
            continue
        C = SubgroupGens([g], "C")
        lam = limit_sample(space, C, max(1, hull.depth), hull.basepoint)
        weak = conv(space, lam, None)
        worst = float(dist_to_set(space, Eg, weak).max()) / us
        checks.append((sym, c, k, worst, worst <= k + 1e-9))
    rep["axis_checks"] = checks
    rep["axis_checks_ok"] = all(c[-1] for c in checks)
    return rep


class FreeSubtree:
    """The minimal invariant subtree of a subgroup of a free group, exactly.

    Vertices are reduced words.  The subtree is infinite, so it is only ever
    queried: membership, projection and gates along geodesics.
    """

    def __init__(self, space, gens, graph=None, shift=()):
        from .stallings import FoldedGraph

        if space.backend_kind != "free_cayley":
            raise PreconditionError("exact subtrees need the free group backend")
        self.space = space
        self.gens = [tuple(g) for g in gens]
        self.shift = tuple(shift)
        self.graph = graph if graph is not None else FoldedGraph(self.gens)
        self.core = self.graph.core()
        if not self.core:
            raise PreconditionError("trivial subgroup has no minimal subtree")
        self._shift_inv = inverse(self.shift)
        self.ref = multiply(self.shift, self.graph.hair())

    def translated(self, g):
        """The subtree g T of g U g^-1, sharing the folded graph."""
        gens = [multiply(g, h, inverse(g)) for h in self.gens]
        return FreeSubtree(self.space, gens, self.graph, multiply(g, self.shift))

    def __contains__(self, v):
        if self.shift:
            v = multiply(self._shift_inv, v)
        s = self.graph.read(v)
        return s is not None and s in self.core

    def translate_contains(self, g, v):
        """v in g T"""
        return multiply(inverse(g), v) in self

    def project(self, x):
        # the subtree is convex and holds ref, so its points on [x, ref] form a suffix
        path = self.space.geodesic(x, self.ref).points
        if path[-1] not in self:
            raise AssertionError("reference point is not in the subtree")
        lo, hi = 0, len(path) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if path[mid] in self:
                hi = mid
            else:
                lo = mid + 1
        return path[lo]

    def dist_to(self, x):
        return self.space.dist(x, self.project(x))


def _segment_gap(path, in_a, in_b):
    """On a geodesic from a point of A to a point of B (A, B convex): the
    last index in A and the first index in B."""
    # A's points form a prefix of the path and B's a suffix
    lo, hi = 0, len(path) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if in_a(path[mid]):
            lo = mid
        else:
            hi = mid - 1
    i = lo
    lo, hi = 0, len(path) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if in_b(path[mid]):
            hi = mid
        else:
            lo = mid + 1
    return i, lo


def subtree_bridge(S, T):
    """(distance, p, q): p in S and q in T realise d(S, T); p == q when they meet."""
    path = S.space.geodesic(S.ref, T.ref).points
    i, j = _segment_gap(path, S.__contains__, T.__contains__)
    if j <= i:
        return 0.0, path[j], path[j]
    return float(j - i), path[i], path[j]


def subtree_translate_gap(T, g):
    """(d(T, gT), p, q) with p in T and q in gT."""
    space = T.space
    path = space.geodesic(T.ref, multiply(g, T.ref)).points
    i, j = _segment_gap(path, T.__contains__, lambda v: T.translate_contains(g, v))
    if j <= i:
        return 0.0, path[j], path[j]
    return float(j - i), path[i], path[j]


def subtree_samples(space, trees):
    """Finite convex pieces of the subtrees spanning their joint hull.

    The minimal connected set containing convex subtrees T_i is the union of
    the T_i with the hull of one reference point from each, so T_i cut down
    to that hull carries the whole connector problem.
    """
    refs = [T.ref for T in trees]
    hull = conv(space, refs)
    return [[p for p in hull if p in T] for T in trees]
