"""Named constants of the construction, each tagged with where its value comes from.

Provenance is one of ``paper_formula`` (closed form evaluated exactly),
``heuristic_default`` (no closed form exists; a documented stand-in) or
``user_override`` (set from the command line or by a caller).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

PAPER = "paper_formula"
HEURISTIC = "heuristic_default"
OVERRIDE = "user_override"


def _num(x):
    """Exact value: ints stay ints, integral Fractions become ints."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def _q(x):
    return Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 9)


@dataclass
class Entry:
    value: object  # number or callable
    provenance: str
    note: str = ""


class ConstantsRegistry:
    def __init__(self):
        self._e = {}
        E = self._define

        E("delta_threshold", lambda delta=1: 100 * _q(delta), PAPER, "E(U) threshold 100*delta")
        E("essential_margin", 20, PAPER, "long-component cutoff for essential parts")
        E("essential_min_length", 40, PAPER, "l_V(g) must exceed this for E_g to exist")
        E("neighborhood_Y", 10, PAPER, "Y(V) is the 10-neighborhood of X(V)")
        E("c_of_m", lambda m: 100 * (m + 2), PAPER, "c(m) = 100(m+2)")
        E("lemma48_k", lambda delta, c: 5000 * _q(delta) ** 2 / _q(c) + 50 * _q(delta), PAPER,
          "k = 5000 delta^2 / c + 50 delta")
        E("gerasimov_radius", lambda delta: 2 * _q(delta) + 1, PAPER, "ball of radius 2 delta + 1")
        E("transfer_bound", lambda m: 2 * m - 1, PAPER, "at most 2m - 1 steps")
        E("window_k1", lambda L, n, k, delta: L + L * (2 * n) ** (k + 5 * _q(delta) + L) + 2, PAPER,
          "k1 = L + L(2n)^(k+5 delta+L) + 2; evaluated only")
        E("D_of_n", lambda n: 10 * n, HEURISTIC, "Hausdorff constant for point connectors")
        E("K1", lambda n: 100 + 2 * n * (2 * self.get("D_of_n", n) + 210) + 2 * self.get("D_of_n", n),
          PAPER, "K1 = 100 + 2n(2D+210) + 2D given D")
        E("K2", lambda n: n * (4 * self.get("D_of_n", n) + 2 * self.get("K1", n) + 31) + self.get("D_of_n", n),
          PAPER, "K2 = n(4D + 2K1 + 31) + D given D, K1")
        for i in (3, 4, 5, 6):
            E("K%d" % i, (lambda j: lambda n: 2 * self.get("K%d" % (j - 1), n) + 10)(i), HEURISTIC,
              "existence-only constant; doubled predecessor plus 10")
        E("L_local", 100, HEURISTIC, "local-to-global window for quasigeodesics")
        E("C_of_n", lambda n: self.get("K5", n), HEURISTIC, "ping-pong distance threshold")
        E("R_tuple", lambda k: 100 * k, HEURISTIC, "constant of the hyperbolic-tuple proposition")
        E("C_prime", lambda k: 100 * k, HEURISTIC, "constant of the k-tuple theorem for n = 0")
        E("K_of_k", lambda k: (2 * k * (2 * self.get("C_of_n", k) + self.get("R_tuple", k) + 2)
                               + 2 * self.get("C_of_n", k) + self.get("R_tuple", k) + self.get("C_prime", k)),
          PAPER, "K(k) = 2k(2C+R+2) + 2C + R + C' given C, R, C'")
        E("trichotomy_K", lambda k=2, delta=1: _q(delta) * self.get("K_of_k", k), PAPER,
          "case threshold delta*K(k) in internal units")
        E("c3", lambda n, C: _q(C) + 2, HEURISTIC, "orbit/hull Hausdorff bound: measured radius + 2")
        E("c4", lambda p, j, K: 4 * self.get("c3", max(p, j), K) + 3 * _q(K), PAPER, "c4 = 4 c3 + 3K")
        E("c5", lambda n, K: 2 * self.get("c3", n, K) + _q(K), PAPER, "c5 = 2 c3 + K")
        E("R1", lambda k=2, delta=1: _q(delta) * self.get("K_of_k", k), PAPER, "R(1) = delta K(k)")
        E("R_schedule", self._r_schedule, PAPER, "R(i) recursion from R(1), c4, c5")
        E("final_C", self._final_c, PAPER, "final constant C(k, l)")
        E("minimize_slack", 1, PAPER, "accept a move only if it improves by more than this")
        E("d2", lambda m=1: 20, HEURISTIC, "cancellation constant of the hyperbolic-tuple proposition")
        E("d4", lambda m=1, r=20: _q(r) + 20, HEURISTIC, "offset constant of the stable part, second case")
        E("N1", 10, HEURISTIC, "smallest admissible stable-part length")

    def _define(self, key, value, provenance, note=""):
        self._e[key] = Entry(value, provenance, note)

    # ------------------------------------------------------------------
    def keys(self):
        return sorted(self._e)

    def provenance(self, key):
        return self._e[key].provenance

    def entry(self, key):
        return self._e[key]

    def get(self, key, *args, **kw):
        try:
            ent = self._e[key]
        except KeyError:
            raise KeyError("unknown constant %r" % key)
        v = ent.value
        if callable(v):
            v = v(*args, **kw)
        return _num(v)

    def set(self, key, value, provenance=OVERRIDE, note="override"):
        if key not in self._e:
            raise KeyError("unknown constant %r" % key)
        self._e[key] = Entry(_q(value) if isinstance(value, (int, float, Fraction)) else value,
                             provenance, note)

    def apply_overrides(self, pairs):
        """``pairs`` is an iterable of 'key=value' strings."""
        for item in pairs:
            if "=" not in item:
                raise ValueError("override must be key=value: %r" % item)
            k, v = item.split("=", 1)
            self.set(k.strip(), Fraction(v.strip()))

    def tree_exact(self):
        """Preset for 0-hyperbolic backends.

        Hulls become minimal invariant subtrees (threshold 0), cases (1)/(2)
        fire only when hulls meet, a part may be opened by any element of
        displacement at most 1, and integral lengths make any strict
        improvement count.
        """
        note = "tree-exact preset"
        self.set("delta_threshold", 0, HEURISTIC, note)
        self.set("trichotomy_K", 0, HEURISTIC, note)
        self.set("C_of_n", 0, HEURISTIC, note)
        self.set("R1", 1, HEURISTIC, note)
        self.set("minimize_slack", 0, HEURISTIC, note)
        return self

    def snapshot(self, keys=None):
        """Scalar values only (callables are listed by provenance)."""
        out = []
        for k in keys or self.keys():
            ent = self._e[k]
            if callable(ent.value):
                out.append((k, "formula", ent.provenance))
            else:
                out.append((k, str(_num(ent.value)), ent.provenance))
        return out

    # ------------------------------------------------------------------
    def _r_schedule(self, i, k=2, delta=1):
        @lru_cache(maxsize=None)
        def R(j):
            if j == 1:
                return _q(self.get("R1", k, delta) if callable(self._e["R1"].value) else self.get("R1"))
            prev = R(j - 1)
            cands = [prev, _q(self.get("c5", j - 1, prev))]
            cands += [_q(self.get("c4", p, j - p, prev)) for p in range(1, j)]
            return max(cands)

        if i < 1:
            raise ValueError("R(i) needs i >= 1")
        return R(i)

    def _final_c(self, k, l, delta=1):
        if l < 1:
            return 0
        Rl = _q(self.get("R_schedule", l, k, delta))
        Rl1 = _q(self.get("R_schedule", max(l - 1, 1), k, delta))
        cands = [_q(self.get("c5", l, Rl))]
        cands += [_q(self.get("c4", p, j, Rl1)) for p in range(1, l + 1) for j in range(1, l + 1)]
        cands.append(_q(self._final_c(k, l - 1, delta)))
        return max(cands)


def default_registry(tree_exact=False):
    reg = ConstantsRegistry()
    return reg.tree_exact() if tree_exact else reg
