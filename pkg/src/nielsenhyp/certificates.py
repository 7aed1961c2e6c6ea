"""Free-product certificates, the exact free-group oracle and rank search.

A certificate is a finite record: every alternating word it lists was
evaluated and moved the base point.  Verdicts above the finite check come
only from the exact oracle, which is available on the free backend.
"""

import itertools
from dataclasses import dataclass, field
from math import comb

from .constants import ConstantsRegistry
from .errors import CapExceeded, Indeterminate, PreconditionError, WindowError
from .hulls import SubgroupGens, subgroup_elements
from .nielsen import GTuple, make_geometry
from .stallings import FoldedGraph, conjugator
from .words import inverse, multiply, reduce_word, shortlex_key

SCHEMA = "nielsenhyp-certificate/1"


# ----------------------------------------------------------------------------
# exact oracle on free groups


def _shorter(a, b):
    return (len(a), shortlex_key(a)) < (len(b), shortlex_key(b))


def nielsen_reduce(words):
    """Greedy Nielsen reduction: apply length-decreasing moves until none
    applies and drop trivial entries.  Total length never increases."""
    t = [reduce_word(w) for w in words]
    t = [w for w in t if w]
    changed = True
    while changed:
        changed = False
        for i in range(len(t)):
            for j in range(len(t)):
                if i == j or not t[i] or not t[j]:
                    continue
                for cand in (multiply(t[i], t[j]), multiply(t[i], inverse(t[j])),
                             multiply(t[j], t[i]), multiply(inverse(t[j]), t[i])):
                    if len(cand) < len(t[i]):
                        t[i] = cand
                        changed = True
            if not t[i]:
                changed = True
        t = [w for w in t if w]
    # normalise signs: each entry or its inverse, whichever is shortlex-smaller
    t = [w if not _shorter(inverse(w), w) else inverse(w) for w in t]
    return sorted(t, key=shortlex_key)


@dataclass
class OracleReport:
    basis: list
    rank: int
    graph: FoldedGraph = field(repr=False)

    def member(self, w):
        return self.graph.accepts(w)

    def is_free_product_of(self, parts):
        """U = <parts[0]> * <parts[1]> * ... (ranks add, no part trivial)."""
        ranks = [FoldedGraph(p).rank for p in parts]
        if any(r == 0 for r in ranks):
            return False
        # parts must lie in U, and generate it
        if not all(self.graph.accepts(w) for p in parts for w in p):
            return False
        whole = FoldedGraph([w for p in parts for w in p])
        if whole.rank != self.rank or not all(whole.accepts(b) for b in self.basis):
            return False
        return sum(ranks) == self.rank


def free_oracle(space, words):
    if space.backend_kind != "free_cayley":
        raise PreconditionError("the exact oracle needs the free group backend")
    words = [reduce_word(w) for w in words]
    G = FoldedGraph([w for w in words if w])
    red = nielsen_reduce(words)
    if len(red) == G.rank:
        basis = red
    else:
        basis = sorted(G.basis(), key=shortlex_key)
    return OracleReport(basis, G.rank, G)


# ----------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Certificate:
    kind: str  # free_product or trichotomy_case(1|2|3)
    space: str
    inputs: tuple  # formatted generator lists, one per factor
    checked_words: tuple  # (shape, measured displacement, sigma length)
    thresholds: tuple  # (key, value)
    caps: tuple  # (max_syllables, per_factor_cap)
    verdict: object  # True, False or None (indeterminate)
    finite_verdict: object
    oracle: object = None
    notes: tuple = ()

    def to_text(self):
        lines = ["schema: " + SCHEMA,
                 "kind: " + self.kind,
                 "space: " + self.space]
        for k, gens in enumerate(self.inputs):
            lines.append("factor.%d: %s" % (k + 1, " ".join(gens)))
        for key, val in self.thresholds:
            lines.append("threshold.%s: %s" % (key, _fmt(val)))
        lines.append("max_syllables: %d" % self.caps[0])
        lines.append("per_factor_cap: %d" % self.caps[1])
        lines.append("checked_count: %d" % len(self.checked_words))
        lines.append("finite_verdict: %s" % _verdict(self.finite_verdict))
        lines.append("oracle: %s" % _verdict(self.oracle))
        lines.append("verdict: %s" % _verdict(self.verdict))
        for n in self.notes:
            lines.append("note: " + n)
        lines.append("checked_words:")
        for shape, disp, sig in self.checked_words:
            lines.append("  %s | %s | %s" % (shape, _fmt(disp), _fmt(sig)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kv, words, inputs, thr, notes = {}, [], [], [], []
        in_words = False
        for line in text.splitlines():
            if in_words and line.startswith("  "):
                shape, disp, sig = (s.strip() for s in line.split("|"))
                words.append((shape, float(disp), float(sig)))
                continue
            in_words = False
            if line == "checked_words:":
                in_words = True
                continue
            key, _, val = line.partition(": ")
            if key.startswith("factor."):
                inputs.append(tuple(val.split()))
            elif key.startswith("threshold."):
                thr.append((key[len("threshold."):], float(val)))
            elif key == "note":
                notes.append(val)
            else:
                kv[key] = val
        if kv.get("schema") != SCHEMA:
            raise PreconditionError("unknown certificate schema")
        return cls(kv["kind"], kv["space"], tuple(inputs), tuple(words), tuple(thr),
                   (int(kv["max_syllables"]), int(kv["per_factor_cap"])),
                   _parse_verdict(kv["verdict"]), _parse_verdict(kv["finite_verdict"]),
                   _parse_verdict(kv["oracle"]), tuple(notes))


def _fmt(x):
    x = float(x)
    return str(int(x)) if x == int(x) else repr(round(x, 9))


def _verdict(v):
    return {True: "true", False: "false", None: "indeterminate"}[v]


def _parse_verdict(s):
    return {"true": True, "false": False, "indeterminate": None}[s]


def _space_name(space):
    if space.backend_kind == "free_cayley":
        return "free %d" % len(space.alphabet.names)
    return space.backend_kind


def _alternating(n, k):
    """Factor index sequences of length k with no two neighbours equal."""
    for seq in itertools.product(range(n), repeat=k):
        if all(seq[i] != seq[i + 1] for i in range(k - 1)):
            yield seq


def _shape(space, seq, els):
    return " ".join("U%d[%s]" % (i + 1, space.format_isometry(e)) for i, e in zip(seq, els))


def _parse_shape(space, shape):
    out = []
    for tok in shape.split():
        idx, _, rest = tok.partition("[")
        out.append((int(idx[1:]) - 1, space.parse_isometry(rest[:-1])))
    return out


def _sigma(space, seq, els, terminals, z):
    """Length of the broken path z -> uz through the translated hull
    segments [p_j, u_j p_j] and the connector hops between them."""
    total = 0.0
    g = space.identity()
    cur = z
    for j, (i, u) in enumerate(zip(seq, els)):
        p = space.apply(g, terminals[i])
        total += space.dist(cur, p)
        g = space.compose(g, u)
        cur = space.apply(g, terminals[i])
        total += space.dist(p, cur)
    total += space.dist(cur, space.apply(g, z))
    return total


def _terminals(space, gens_lists, geometry):
    """A point of each hull nearest the first hull (bridge ends)."""
    out = []
    for k in range(len(gens_lists)):
        j = 1 if k == 0 else 0
        _, a, _ = geometry.hull_gap(gens_lists[k], gens_lists[j])
        out.append(a)
    return out


def pingpong_certify(space, M, max_syllables=4, per_factor_cap=2, registry=None, geometry=None,
                     oracle=True):
    registry = registry or ConstantsRegistry()
    if not isinstance(M, GTuple):
        M = GTuple([U if isinstance(U, SubgroupGens) else SubgroupGens(U) for U in M], [])
    if M.hyperbolic:
        raise PreconditionError("certificates take a G-tuple with empty H")
    n = M.n
    if n < 2:
        raise PreconditionError("need at least two elliptic factors")
    if max_syllables < 1 or per_factor_cap < 1:
        raise PreconditionError("caps must be positive")
    for U in M.elliptic:
        U.check(space)
    geometry = geometry or make_geometry(space, registry)
    gl = [list(U.gens) for U in M.elliptic]
    exact = getattr(geometry, "exact", False)
    C = 0.0 if exact else float(registry.get("C_of_n", n)) * space.unit_scale
    thresholds = [("hull_gap_min", C / space.unit_scale)]
    for i, j in itertools.combinations(range(n), 2):
        d, _, _ = geometry.hull_gap(gl[i], gl[j])
        if d <= C + 1e-9:
            raise PreconditionError("hull distance %g between factors %d and %d is not above %g"
                                    % (d / space.unit_scale, i + 1, j + 1, C / space.unit_scale))
    terminals = _terminals(space, gl, geometry)
    z = terminals[0]
    factor_els = []
    for U in M.elliptic:
        els = [e for e, sym in subgroup_elements(space, U, per_factor_cap) if sym]
        els = [e for e in els if not space.is_trivial(e)]
        factor_els.append(els)
    checked = []
    finite = True
    notes = []
    try:
        for k in range(1, max_syllables + 1):
            for seq in _alternating(n, k):
                for els in itertools.product(*(factor_els[i] for i in seq)):
                    u = space.compose(*els) if len(els) > 1 else els[0]
                    disp = space.dist(z, space.apply(u, z))
                    sig = _sigma(space, seq, els, terminals, z)
                    checked.append((_shape(space, seq, els), disp / space.unit_scale,
                                    sig / space.unit_scale))
                    if disp <= 0:
                        finite = False
    except (WindowError, KeyError, ValueError) as ex:
        finite = None
        notes.append("window exhausted: %s" % ex)
    ora = None
    if oracle and space.backend_kind == "free_cayley":
        rep = free_oracle(space, [w for g in gl for w in g])
        ora = rep.is_free_product_of(gl)
    verdict = finite
    if finite and ora is False:
        verdict = False
        notes.append("oracle denies the free product")
    return Certificate("free_product", _space_name(space),
                       tuple(tuple(space.format_isometry(g) for g in U) for U in gl),
                       tuple(checked), tuple(thresholds), (max_syllables, per_factor_cap),
                       verdict, finite, ora, tuple(notes))


def replay_certificate(space, cert):
    """Recompute the displacement of every checked word; True if identical."""
    factors = [[space.parse_isometry(s) for s in gens] for gens in cert.inputs]
    geometry = make_geometry(space)
    terminals = _terminals(space, factors, geometry)
    z = terminals[0]
    for shape, disp, sig in cert.checked_words:
        parts = _parse_shape(space, shape)
        seq = [i for i, _ in parts]
        els = [e for _, e in parts]
        u = space.compose(*els) if len(els) > 1 else els[0]
        d = space.dist(z, space.apply(u, z)) / space.unit_scale
        s = _sigma(space, seq, els, terminals, z) / space.unit_scale
        if abs(d - disp) > 1e-9 or abs(s - sig) > 1e-9:
            return False
    return True


def trichotomy_certificate(space, M, outcome):
    """Record of a trichotomy case with its witness distance."""
    if outcome.case not in (1, 2, 3):
        raise Indeterminate("no case fired; only pingpong_certify can upgrade this")
    gl = [list(U.gens) for U in M.elliptic] + [[h] for h in M.hyperbolic]
    return Certificate("trichotomy_case(%d)" % outcome.case, _space_name(space),
                       tuple(tuple(space.format_isometry(g) for g in U) for U in gl),
                       (), (("witness_value", outcome.value / space.unit_scale),
                            ("threshold", outcome.threshold / space.unit_scale)),
                       (0, 0), True, True, None,
                       ("witness: " + " ".join(str(w) if isinstance(w, int) else
                                               space.format_point(w) for w in outcome.witness),))


# ----------------------------------------------------------------------------
# rank search


@dataclass
class RankClass:
    signature: tuple
    representative: list  # oracle basis of the first subset in the class
    rank: int
    count: int
    max_conjugator_len: int


@dataclass
class RankSearchReport:
    k: int
    radius: int
    subsets: int
    classes: list
    rank_histogram: dict
    smallest_rank: int
    beyond_radius: int  # classes merged by a conjugator longer than the radius


def rank_search(space, k, radius, cap=10 ** 6):
    """Nontrivial subgroups generated by k-multisets of the punctured ball,
    up to conjugacy."""
    if space.backend_kind != "free_cayley":
        raise PreconditionError("rank search runs on the free group backend")
    if k < 1:
        raise PreconditionError("k must be at least 1")
    ball = [w for w in space.ball(space.identity(), radius) if w]
    total = comb(len(ball) + k - 1, k)
    if total > cap:
        raise CapExceeded("%d subsets exceed the cap %d" % (total, cap))
    classes = {}
    order = []
    for sub in itertools.combinations_with_replacement(ball, k):
        rep = free_oracle(space, sub)
        if rep.rank == 0:
            continue
        sig = rep.graph.core_signature()[0]
        c = classes.get(sig)
        if c is None:
            c = classes[sig] = RankClass(sig, rep.basis, rep.rank, 0, 0)
            c._graph = rep.graph
            order.append(sig)
        else:
            g = conjugator(c._graph, rep.graph)
            if g is None:
                raise AssertionError("equal signatures without a conjugator")
            c.max_conjugator_len = max(c.max_conjugator_len, len(g))
        c.count += 1
    out = [classes[s] for s in order]
    out.sort(key=lambda c: (c.rank, [shortlex_key(w) for w in c.representative]))
    hist = {}
    for c in out:
        hist[c.rank] = hist.get(c.rank, 0) + 1
    beyond = sum(1 for c in out if c.max_conjugator_len > radius)
    return RankSearchReport(k, radius, total, out, dict(sorted(hist.items())),
                            min(hist) if hist else 0, beyond)
