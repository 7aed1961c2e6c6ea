"""Metric spaces with an isometric group action.

Four backends share one interface: a finite tree, the Cayley graph of a free
group, a ball in the Cayley graph of a C'(1/6) presentation, and the upper
half-plane.  Word backends use group elements (reduced words) as vertices
and act by left multiplication, so geodesics are defined as translates of a
canonical geodesic from the identity and the whole layer is equivariant.
"""

import math
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, PreconditionError, SpecError, WindowError
from .words import Alphabet, inverse, lcp, multiply, reduce_word, shortlex_key

DEFAULT_CAP = 10 ** 7


@dataclass
class PathSample:
    points: list
    arclens: list
    step: float = 1.0

    @property
    def length(self):
        return self.arclens[-1] if self.arclens else 0.0

    def __len__(self):
        return len(self.points)


@dataclass
class SpaceSpec:
    kind: str
    rank: int = 0
    edges: list = field(default_factory=list)
    gens: list = field(default_factory=list)
    rels: list = field(default_factory=list)
    radius: int = 0
    delta: float = None
    cap: int = DEFAULT_CAP


def parse_space_spec(text):
    """Parse the line-oriented space format (see README)."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise SpecError("empty space spec")
    head = lines[0].split()[0]
    if head == "free":
        if len(lines) != 1:
            raise SpecError("'free' spec takes a single line")
        parts = lines[0].split()
        try:
            n = int(parts[1])
        except (IndexError, ValueError):
            raise SpecError("expected 'free <n>'")
        if n < 1:
            raise SpecError("free rank must be >= 1")
        return SpaceSpec("free_cayley", rank=n)
    if head == "h2":
        if lines != ["h2"]:
            raise SpecError("'h2' spec takes no arguments")
        return SpaceSpec("half_plane")
    if head == "tree":
        edges = []
        for line in lines:
            parts = line.split()
            if parts[0] != "tree" or len(parts) != 3:
                raise SpecError("expected 'tree <u> <v>', got %r" % line)
            edges.append((parts[1], parts[2]))
        return SpaceSpec("tree", edges=edges)
    if head == "presentation":
        if len(lines) != 1:
            raise SpecError("'presentation' spec takes a single line")
        kv = {}
        for tok in lines[0].split()[1:]:
            if "=" not in tok:
                raise SpecError("bad presentation field %r" % tok)
            k, v = tok.split("=", 1)
            kv[k] = v
        try:
            gens = [g for g in kv["gens"].split(",") if g]
            rels = [r for r in kv.get("rels", "").split(";") if r]
            radius = int(kv["radius"])
        except (KeyError, ValueError):
            raise SpecError("expected 'presentation gens=... rels=... radius=R'")
        delta = float(kv["delta"]) if "delta" in kv else None
        cap = int(kv["cap"]) if "cap" in kv else DEFAULT_CAP
        return SpaceSpec("presentation_ball", gens=gens, rels=rels, radius=radius,
                         delta=delta, cap=cap)
    raise SpecError("unknown space kind %r" % head)


# ----------------------------------------------------------------------------
# isometries of the half-plane


@dataclass(frozen=True)
class Mobius:
    """z -> (az+b)/(cz+d) with ad-bc = 1, stored with a sign normalization."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def make(cls, a, b, c, d):
        det = a * d - b * c
        if det <= 0:
            raise SpecError("matrix must have positive determinant")
        s = math.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        if c < 0 or (c == 0 and d < 0):
            a, b, c, d = -a, -b, -c, -d
        return cls(a, b, c, d)

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def __matmul__(self, other):
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return Mobius.make(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inv(self):
        return Mobius.make(self.d, -self.b, -self.c, self.a)

    def is_identity(self, tol=1e-12):
        return (abs(self.a - 1) <= tol and abs(self.d - 1) <= tol
                and abs(self.b) <= tol and abs(self.c) <= tol)

    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])


IDENTITY_MOBIUS = Mobius(1.0, 0.0, 0.0, 1.0)


# ----------------------------------------------------------------------------
# backends


class _WordBackend:
    """Shared code for backends whose points and isometries are group words."""

    is_word = True

    def basepoint(self):
        return ()

    def identity(self):
        return ()

    def sort_key(self, p):
        return shortlex_key(p)

    def format_point(self, p):
        return self.alphabet.format(p)

    format_isometry = format_point

    def parse_point(self, text):
        return self.normal_form(self.alphabet.parse(text))

    parse_isometry = parse_point

    def compose(self, g, h):
        return self.normal_form(multiply(g, h))

    def inverse(self, g):
        return self.normal_form(inverse(g))

    def is_trivial(self, g):
        return len(self.normal_form(g)) == 0

    def apply(self, g, p):
        return self.normal_form(multiply(g, p))

    def geodesic(self, p, q, step=1.0):
        r = self.normal_form(multiply(inverse(p), q))
        pts = [p] + [self.normal_form(multiply(p, r[:i])) for i in range(1, len(r) + 1)]
        return PathSample(pts, [float(i) for i in range(len(pts))], 1.0)

    def ball(self, center, radius, cap=None):
        cap = self.cap if cap is None else cap
        r = int(math.floor(radius + 1e-9))
        offsets = self._ball_offsets(r, cap)
        return [self.normal_form(multiply(center, w)) for w in offsets]


class FreeBackend(_WordBackend):
    kind = "free_cayley"

    def __init__(self, rank, cap=DEFAULT_CAP):
        self.rank = rank
        self.alphabet = Alphabet.standard(rank)
        self.letters = self.alphabet.letters()
        self.cap = cap
        self.delta = 0.0

    def normal_form(self, g):
        return reduce_word(g)

    def contains(self, p):
        return isinstance(p, tuple) and reduce_word(p) == p

    def dist(self, p, q):
        return float(len(p) + len(q) - 2 * lcp(p, q))

    def geodesic(self, p, q, step=1.0):
        k = lcp(p, q)
        pts = [p[:i] for i in range(len(p), k - 1, -1)]
        pts += [q[:i] for i in range(k + 1, len(q) + 1)]
        return PathSample(pts, [float(i) for i in range(len(pts))], 1.0)

    def ball_size(self, r):
        n = 2 * self.rank
        if n == 2:
            return 2 * r + 1
        return 1 + n * ((n - 1) ** r - 1) // (n - 2)

    def _ball_offsets(self, r, cap):
        if self.ball_size(r) > cap:
            raise CapExceeded("ball of radius %d has %d points > cap %d"
                              % (r, self.ball_size(r), cap))
        from .words import words_up_to
        return words_up_to(self.letters, r)

    def dist_matrix(self, P, Q):
        P, Q = list(P), list(Q)
        if not P or not Q:
            return np.zeros((len(P), len(Q)))
        L = max(max(len(p) for p in P), max(len(q) for q in Q), 1)
        A = np.zeros((len(P), L), dtype=np.int16)
        B = np.zeros((len(Q), L), dtype=np.int16)
        for i, p in enumerate(P):
            A[i, :len(p)] = p
        for j, q in enumerate(Q):
            B[j, :len(q)] = q
        la = np.array([len(p) for p in P])
        lb = np.array([len(q) for q in Q])
        out = np.empty((len(P), len(Q)))
        # chunk rows to bound memory
        rows = max(1, 4_000_000 // (len(Q) * L))
        for s in range(0, len(P), rows):
            eq = A[s:s + rows, None, :] == B[None, :, :]
            nz = (A[s:s + rows, None, :] != 0)
            pref = np.cumprod(eq & nz, axis=2).sum(axis=2)
            out[s:s + rows] = la[s:s + rows, None] + lb[None, :] - 2 * pref
        return out


class TreeBackend:
    kind = "tree"
    is_word = False

    def __init__(self, edges, cap=DEFAULT_CAP):
        if not edges:
            raise SpecError("tree needs at least one edge")
        numeric = all(u.lstrip("-").isdigit() and v.lstrip("-").isdigit() for u, v in edges)
        conv = int if numeric else str
        adj = defaultdict(list)
        for u, v in edges:
            u, v = conv(u), conv(v)
            if u == v:
                raise SpecError("tree edge is a loop: %r" % (u,))
            adj[u].append(v)
            adj[v].append(u)
        verts = sorted(adj)
        if len(edges) != len(verts) - 1:
            raise SpecError("edge list is not a tree (|E| != |V|-1)")
        self.vertices = verts
        self.index = {v: i for i, v in enumerate(verts)}
        self.adj = {v: sorted(adj[v]) for v in verts}
        self.cap = cap
        self.delta = 0.0
        self.alphabet = None
        # BFS from every vertex: all-pairs distances plus parent pointers
        n = len(verts)
        if n * n > 4 * 10 ** 7:
            raise CapExceeded("tree too large for the all-pairs table")
        D = np.full((n, n), -1, dtype=np.int64)
        for s in range(n):
            D[s, s] = 0
            frontier = [verts[s]]
            while frontier:
                nxt = []
                for x in frontier:
                    dx = D[s, self.index[x]]
                    for y in self.adj[x]:
                        j = self.index[y]
                        if D[s, j] < 0:
                            D[s, j] = dx + 1
                            nxt.append(y)
                frontier = nxt
        if (D < 0).any():
            raise SpecError("edge list is not connected")
        self.D = D.astype(float)

    def basepoint(self):
        return self.vertices[0]

    def identity(self):
        return ()

    def contains(self, p):
        return p in self.index

    def sort_key(self, p):
        return (self.index[p],)

    def normal_form(self, g):
        return ()

    def format_point(self, p):
        return str(p)

    def format_isometry(self, g):
        return "1"

    def parse_point(self, text):
        text = text.strip()
        for v in self.vertices:
            if str(v) == text:
                return v
        raise SpecError("unknown tree vertex %r" % text)

    def parse_isometry(self, text):
        if text.strip() not in ("", "1"):
            raise SpecError("tree backend only carries the trivial action")
        return ()

    def compose(self, g, h):
        return ()

    def inverse(self, g):
        return ()

    def is_trivial(self, g):
        return True

    def _idx(self, p):
        try:
            return self.index[p]
        except KeyError:
            raise PreconditionError("not a vertex of the tree: %r" % (p,))

    def dist(self, p, q):
        return float(self.D[self._idx(p), self._idx(q)])

    def dist_matrix(self, P, Q):
        I = [self._idx(p) for p in P]
        J = [self._idx(q) for q in Q]
        return self.D[np.ix_(I, J)] if I and J else np.zeros((len(I), len(J)))

    def apply(self, g, p):
        if g != ():
            raise PreconditionError("tree backend only carries the trivial action")
        return p

    def geodesic(self, p, q, step=1.0):
        pts = [p]
        cur = p
        qi = self._idx(q)
        while cur != q:
            dc = self.D[self._idx(cur), qi]
            cur = next(y for y in self.adj[cur] if self.D[self._idx(y), qi] < dc)
            pts.append(cur)
        return PathSample(pts, [float(i) for i in range(len(pts))], 1.0)

    def ball(self, center, radius, cap=None):
        c = self._idx(center)
        pts = [v for v in self.vertices if self.D[c, self.index[v]] <= radius + 1e-9]
        pts.sort(key=lambda v: (self.D[c, self.index[v]], self.index[v]))
        return pts


def symmetrized(rels):
    """All cyclic permutations of the relators and their inverses."""
    out = []
    for ri, r in enumerate(rels):
        for inv_flag, w in ((False, r), (True, inverse(r))):
            for k in range(len(w)):
                out.append(((ri, inv_flag, k), w[k:] + w[:k]))
    return out


def max_piece_ratio(rels):
    """Largest |piece|/|r| over the symmetrized relator set.

    Two entries of the symmetrized set count as different when they come
    from different (relator, orientation, rotation) triples, even if they are
    equal as words; this is how proper powers such as a^3 are caught.
    Pieces are capped at |r| - 1.
    """
    sym = symmetrized(rels)
    worst = 0.0
    worst_piece = 0
    for i, (ti, u) in enumerate(sym):
        for j, (tj, v) in enumerate(sym):
            if i == j:
                continue
            k = min(lcp(u, v), len(u) - 1, len(v) - 1)
            if k / len(u) > worst:
                worst = k / len(u)
                worst_piece = k
    return worst, worst_piece



def _left_nullspace(vectors, dim):
    """Integer rows y spanning {y : y.v = 0 for all v} over the rationals."""
    from fractions import Fraction
    from math import gcd

    rows = [[Fraction(x) for x in v] for v in vectors if any(v)]
    piv_cols = []
    r = 0
    for col in range(dim):
        p = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(col)
        r += 1
    rows = rows[:r]
    out = []
    for free in (c for c in range(dim) if c not in piv_cols):
        y = [Fraction(0)] * dim
        y[free] = Fraction(1)
        for row, pc in zip(rows, piv_cols):
            y[pc] = -row[free]
        den = 1
        for x in y:
            den = den * x.denominator // gcd(den, x.denominator)
        out.append([int(x * den) for x in y])
    return out


class PresentationBackend(_WordBackend):
    """Ball of radius R in the Cayley graph of a C'(1/6) presentation.

    Dehn's algorithm decides equality; points are shortlex-least geodesic
    words.  Anything that would leave the ball raises WindowError.
    """

    kind = "presentation_ball"

    def __init__(self, gens, rels, radius, delta=None, cap=DEFAULT_CAP):
        try:
            self.alphabet = Alphabet(gens)
        except ValueError as e:
            raise SpecError(str(e))
        self.letters = self.alphabet.letters()
        self.rels = [self.alphabet.parse(r) for r in rels]
        for r in self.rels:
            c = r
            while len(c) >= 2 and c[0] == -c[-1]:
                c = c[1:-1]
            if len(c) != len(r) or not r:
                raise SpecError("relators must be nonempty and cyclically reduced")
        ratio, piece = max_piece_ratio(self.rels) if self.rels else (0.0, 0)
        self.max_piece = piece
        if ratio >= 1.0 / 6.0:
            raise SpecError("presentation fails C'(1/6): piece ratio %.4f" % ratio)
        self.radius = int(radius)
        self.cap = cap
        maxrel = max((len(r) for r in self.rels), default=0)
        self.delta = float(delta) if delta is not None else float(maxrel)
        self._dehn_table = {}
        for _, w in symmetrized(self.rels):
            n = len(w)
            for k in range(n // 2 + 1, n + 1):
                u = w[:k]
                repl = inverse(w[k:])
                old = self._dehn_table.get(u)
                if old is None or len(repl) < len(old):
                    self._dehn_table[u] = repl
        self._lens = sorted({len(u) for u in self._dehn_table}, reverse=True)
        self._setup_hash()
        self._build_ball()

    # word problem
    def dehn(self, w):
        w = list(reduce_word(w))
        changed = True
        while changed:
            changed = False
            for i in range(len(w)):
                for k in self._lens:
                    if i + k > len(w):
                        continue
                    repl = self._dehn_table.get(tuple(w[i:i + k]))
                    if repl is not None:
                        w = list(reduce_word(w[:i] + list(repl) + w[i + k:]))
                        changed = True
                        break
                if changed:
                    break
        return tuple(w)

    def _setup_hash(self):
        """Linear functionals that kill the relator contributions.

        The bucket key of a word is (psi(e), phi(A)) where e is the exponent
        vector and A the antisymmetric degree-2 Magnus coefficients.  Inserting
        a relator changes e by e(r) and A by an element of the lattice spanned
        by A(r) and e_k ^ e(r), so both functionals are group invariants.
        """
        n = len(self.alphabet)
        self._pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        evecs, avecs = [], []
        for r in self.rels:
            e, A = self._ea(r)
            evecs.append(e)
            avecs.append(A)
            for k in range(n):
                avecs.append([(1 if i == k else 0) * e[j] - (1 if j == k else 0) * e[i]
                              for i, j in self._pairs])
        self._psi = _left_nullspace(evecs, n)
        self._phi = _left_nullspace(avecs, len(self._pairs))

    def _ea(self, w):
        n = len(self.alphabet)
        e = [0] * n
        c = [[0] * n for _ in range(n)]
        for x in w:
            g, s = abs(x) - 1, (1 if x > 0 else -1)
            for i in range(n):
                if e[i]:
                    c[i][g] += e[i] * s
            e[g] += s
        return e, [c[i][j] - c[j][i] for i, j in self._pairs]

    def _abel(self, w):
        e, A = self._ea(w)
        return (tuple(sum(a * b for a, b in zip(row, e)) for row in self._psi),
                tuple(sum(a * b for a, b in zip(row, A)) for row in self._phi))

    def _find(self, w, dw=None):
        """Canonical ball vertex equal to w, or None."""
        dw = self.dehn(w) if dw is None else dw
        hit = self._memo.get(dw)
        if hit is not None:
            return hit
        for u in self._buckets.get(self._abel(dw), ()):
            if len(u) > len(dw):
                break
            if not self.dehn(multiply(inverse(u), dw)):
                self._memo[dw] = u
                return u
        return None

    def _build_ball(self):
        self._buckets = defaultdict(list)
        self._memo = {(): ()}
        self._level = {(): 0}
        self._buckets[self._abel(())].append(())
        layer = [()]
        for r in range(self.radius):
            nxt = []
            for v in layer:
                for x in self.letters:
                    if v and v[-1] == -x:
                        continue
                    w = v + (x,)
                    dw = self.dehn(w)
                    if len(dw) <= r:
                        # strictly shorter element: must already be in the ball
                        continue
                    if self._find(w, dw) is not None:
                        continue
                    self._level[w] = r + 1
                    self._memo[dw] = w
                    self._buckets[self._abel(w)].append(w)
                    nxt.append(w)
                    if len(self._level) > self.cap:
                        raise CapExceeded("presentation ball exceeds cap %d" % self.cap)
            layer = nxt
        self._order = sorted(self._level, key=shortlex_key)

    def vertices(self):
        return list(self._order)

    def normal_form(self, g):
        hit = self._find(tuple(g))
        if hit is None:
            raise WindowError("element %s lies outside the radius-%d ball"
                              % (self.alphabet.format(reduce_word(g)), self.radius))
        return hit

    def is_trivial(self, g):
        return not self.dehn(g)

    def contains(self, p):
        return p in self._level

    def dist(self, p, q):
        return float(self._level[self.normal_form(multiply(inverse(p), q))])

    def dist_matrix(self, P, Q, missing=None):
        """Pairwise distances.  Pairs farther apart than the ball radius raise
        WindowError, or are filled with ``missing`` when it is given."""
        out = np.empty((len(P), len(Q)))
        for i, p in enumerate(P):
            ip = inverse(p)
            for j, q in enumerate(Q):
                hit = self._find(multiply(ip, q))
                if hit is None:
                    if missing is None:
                        self.normal_form(multiply(ip, q))
                    out[i, j] = missing
                else:
                    out[i, j] = self._level[hit]
        return out

    def _ball_offsets(self, r, cap):
        if r > self.radius:
            raise WindowError("requested radius %d exceeds ball radius %d" % (r, self.radius))
        out = [w for w in self._order if self._level[w] <= r]
        if len(out) > cap:
            raise CapExceeded("ball exceeds cap")
        return out


class HalfPlaneBackend:
    kind = "half_plane"
    is_word = False

    def __init__(self, cap=DEFAULT_CAP):
        self.delta = 1.0
        self.cap = cap
        self.alphabet = None

    def basepoint(self):
        return 1j

    def identity(self):
        return IDENTITY_MOBIUS

    def contains(self, p):
        return isinstance(p, complex) and p.imag > 0

    def sort_key(self, p):
        return (round(p.imag, 9), round(p.real, 9))

    def normal_form(self, g):
        return g

    def format_point(self, p):
        return "%.6f%+.6fi" % (p.real, p.imag)

    def format_isometry(self, g):
        return "[[%.6g,%.6g],[%.6g,%.6g]]" % (g.a, g.b, g.c, g.d)

    def parse_point(self, text):
        try:
            z = complex(text.replace("i", "j"))
        except ValueError:
            raise SpecError("bad half-plane point %r" % text)
        if z.imag <= 0:
            raise SpecError("half-plane points need positive imaginary part")
        return z

    def parse_isometry(self, text):
        nums = [float(x) for x in text.replace("[", " ").replace("]", " ").replace(",", " ").split()]
        if len(nums) != 4:
            raise SpecError("expected a 2x2 matrix")
        return Mobius.make(*nums)

    def compose(self, g, h):
        return g @ h

    def inverse(self, g):
        return g.inv()

    def is_trivial(self, g):
        return g.is_identity()

    def dist(self, p, q):
        num = abs(p - q) ** 2
        return float(np.arccosh(1.0 + num / (2.0 * p.imag * q.imag)))

    def dist_matrix(self, P, Q):
        a = np.asarray(P, dtype=complex)[:, None]
        b = np.asarray(Q, dtype=complex)[None, :]
        arg = 1.0 + np.abs(a - b) ** 2 / (2.0 * a.imag * b.imag)
        return np.arccosh(np.maximum(arg, 1.0))

    def apply(self, g, p):
        return complex(g(p))

    def geodesic(self, p, q, step=0.1):
        d = self.dist(p, q)
        n = max(1, int(math.ceil(d / step - 1e-12)))
        ts = [d * k / n for k in range(n + 1)]
        if abs(p.real - q.real) < 1e-12:
            sgn = 1.0 if q.imag >= p.imag else -1.0
            pts = [complex(p.real, p.imag * math.exp(sgn * t)) for t in ts]
        else:
            c = (abs(q) ** 2 - abs(p) ** 2) / (2.0 * (q.real - p.real))
            rho = abs(p - c)
            e1, e2 = c + rho, c - rho
            # T(z) = (z - e1)/(z - e2) maps the geodesic onto the imaginary axis
            T = Mobius.make(1.0, -e1, 1.0, -e2)
            sp, sq = T(p).imag, T(q).imag
            sgn = 1.0 if sq >= sp else -1.0
            Ti = T.inv()
            pts = [complex(Ti(1j * sp * math.exp(sgn * t))) for t in ts]
            pts[0], pts[-1] = p, q
        return PathSample(pts, ts, step)

    def ball(self, center, radius, cap=None):
        raise PreconditionError("ball enumeration needs a word backend")


# ----------------------------------------------------------------------------


class SpaceHandle:
    """A backend plus the declared hyperbolicity data.

    ``unit_scale`` converts native distances into internal units in which the
    declared delta is at most 1.
    """

    def __init__(self, backend):
        self.backend = backend
        self.backend_kind = backend.kind
        self.delta = float(backend.delta)
        self.unit_scale = max(self.delta, 1.0)
        self.generator_count = len(backend.alphabet) if backend.alphabet is not None else 0
        self.is_word = backend.is_word

    def __repr__(self):
        return "SpaceHandle(%s, delta=%g, generators=%d)" % (
            self.backend_kind, self.delta, self.generator_count)

    @property
    def internal_delta(self):
        return self.delta / self.unit_scale

    @property
    def alphabet(self):
        return self.backend.alphabet

    @property
    def cap(self):
        return self.backend.cap

    # delegation keeps call sites short: space.dist(p, q) and so on
    def dist(self, p, q):
        return self.backend.dist(p, q)

    def idist(self, p, q):
        return self.backend.dist(p, q) / self.unit_scale

    def dist_matrix(self, P, Q, missing=None):
        if missing is not None and self.backend_kind == "presentation_ball":
            return self.backend.dist_matrix(list(P), list(Q), missing=missing)
        return self.backend.dist_matrix(list(P), list(Q))

    def geodesic(self, p, q, step=None):
        if step is None:
            step = 1.0 if self.is_word or self.backend_kind == "tree" else 0.1
        if step <= 0:
            raise PreconditionError("step must be positive")
        return self.backend.geodesic(p, q, step)

    def apply(self, g, p):
        return self.backend.apply(g, p)

    def apply_all(self, g, pts):
        return [self.backend.apply(g, p) for p in pts]

    def ball(self, center, radius, cap=None):
        return self.backend.ball(center, radius, cap)

    def basepoint(self):
        return self.backend.basepoint()

    def identity(self):
        return self.backend.identity()

    def compose(self, *gs):
        out = self.backend.identity()
        for g in gs:
            out = self.backend.compose(out, g)
        return out

    def inverse(self, g):
        return self.backend.inverse(g)

    def conjugate(self, u, g):
        """g u g^-1"""
        return self.compose(g, u, self.inverse(g))

    def is_trivial(self, g):
        return self.backend.is_trivial(g)

    def normal_form(self, g):
        return self.backend.normal_form(g)

    def sort_key(self, p):
        return self.backend.sort_key(p)

    def canonical(self, pts):
        """Deduplicated, canonically ordered list of points."""
        seen = {}
        for p in pts:
            seen.setdefault(p, None)
        return sorted(seen, key=self.backend.sort_key)

    def format_point(self, p):
        return self.backend.format_point(p)

    def format_isometry(self, g):
        return self.backend.format_isometry(g)

    def parse_point(self, text):
        return self.backend.parse_point(text)

    def parse_isometry(self, text):
        return self.backend.parse_isometry(text)


def make_space(spec):
    """Build a SpaceHandle from a SpaceSpec or from spec text."""
    if isinstance(spec, str):
        spec = parse_space_spec(spec)
    if spec.kind == "free_cayley":
        return SpaceHandle(FreeBackend(spec.rank, cap=spec.cap))
    if spec.kind == "tree":
        return SpaceHandle(TreeBackend(spec.edges, cap=spec.cap))
    if spec.kind == "presentation_ball":
        return SpaceHandle(PresentationBackend(spec.gens, spec.rels, spec.radius,
                                               delta=spec.delta, cap=spec.cap))
    if spec.kind == "half_plane":
        return SpaceHandle(HalfPlaneBackend(cap=spec.cap))
    raise SpecError("unknown space kind %r" % spec.kind)


def free_group(n=2):
    return make_space(SpaceSpec("free_cayley", rank=n))


def tree_from_edges(edges):
    return make_space(SpaceSpec("tree", edges=[(str(u), str(v)) for u, v in edges]))
