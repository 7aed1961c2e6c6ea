"""Essential parts of [x, gx] relative to a subgroup V, product types and
stable parts.

On graph backends the distance to a vertex set, restricted to one edge, is
min(d0 + s, d1 + 1 - s); the complement of the Y-neighborhoods is therefore
a finite union of exact intervals and lengths come out exactly.
"""

from dataclasses import dataclass

from .coarse import dist_to_set, hausdorff
from .constants import ConstantsRegistry
from .errors import PreconditionError, WindowError
from .hulls import COARSE, FreeSubtree, SubgroupGens, convex_hull_approx
from .space import PathSample

TOL = 1e-9


class _Hull:
    """Distance oracle for X(V) and its translates."""

    def __init__(self, space, V, window=None, registry=None):
        self.space = space
        self.gens = V.gens if isinstance(V, SubgroupGens) else list(V)
        if space.backend_kind == "free_cayley":
            self.tree = FreeSubtree(space, self.gens)
            self.sample = None
        else:
            self.tree = None
            W = window if window is not None else 8
            H = convex_hull_approx(space, SubgroupGens(self.gens), W, mode=COARSE,
                                   registry=registry, word_len=2)
            if not H.hull:
                raise WindowError("hull of V misses the window")
            self.sample = H.hull

    def point(self):
        return self.tree.ref if self.tree is not None else self.sample[0]

    def contains(self, x):
        if self.tree is not None:
            return x in self.tree
        return x in set(self.sample)

    def dists(self, pts, g=None):
        """d(p, g X(V)) for each p."""
        sp = self.space
        if g is not None:
            gi = sp.inverse(g)
            pts = [sp.apply(gi, p) for p in pts]
        if self.tree is not None:
            return [self.tree.dist_to(p) for p in pts]
        return list(dist_to_set(sp, pts, self.sample))

    def v_length(self, g):
        from .hulls import subtree_translate_gap
        from .coarse import set_distance

        if self.tree is not None:
            return subtree_translate_gap(self.tree, g)[0]
        return set_distance(self.space, self.sample, self.space.apply_all(g, self.sample))


@dataclass
class EssentialPart:
    base_geodesic: PathSample
    segment: PathSample
    y_neighborhood: float
    start: float  # arclength of the segment ends along the base geodesic
    end: float
    l_V: float
    components: list  # (start, end) of every complement component

    @property
    def length(self):
        return self.end - self.start


def _edge_interval(a0, a1, b0, b1, r):
    """Sub-interval of [0, 1] where min(a0+s, a1+1-s) > r and the same for b."""
    lo, hi = 0.0, 1.0
    for d0, d1 in ((a0, a1), (b0, b1)):
        # d0 + s > r  and  d1 + 1 - s > r
        lo = max(lo, r - d0)
        hi = min(hi, d1 + 1 - r)
    return (lo, hi) if hi > lo + TOL else None


def _complement_components(space, W, fX, fgX, r):
    comps = []
    s = W.arclens
    if space.is_word or space.backend_kind == "tree":
        for k in range(len(W.points) - 1):
            iv = _edge_interval(fX[k], fX[k + 1], fgX[k], fgX[k + 1], r)
            if iv is None:
                continue
            a, b = s[k] + iv[0], s[k] + iv[1]
            if comps and abs(comps[-1][1] - a) < TOL:
                comps[-1] = (comps[-1][0], b)
            else:
                comps.append((a, b))
    else:
        run = None
        for k in range(len(W.points)):
            ok = fX[k] > r and fgX[k] > r
            if ok and run is None:
                run = s[k]
            if (not ok or k == len(W.points) - 1) and run is not None:
                end = s[k] if ok else s[k - 1]
                if end > run:
                    comps.append((run, end))
                run = None
    return comps


def _sub_sample(W, a, b):
    idx = [k for k, s in enumerate(W.arclens) if a - TOL <= s <= b + TOL]
    if not idx:
        k = min(range(len(W.arclens)), key=lambda k: abs(W.arclens[k] - a))
        idx = [k]
    pts = [W.points[k] for k in idx]
    arcs = [W.arclens[k] - W.arclens[idx[0]] for k in idx]
    return PathSample(pts, arcs, W.step)


def essential_part(space, g, V, basepoint=None, registry=None, allow_short=False, _hull=None):
    """The unique component of [x, gx] minus (Y(V) u gY(V)) longer than 20."""
    registry = registry or ConstantsRegistry()
    hull = _hull or _Hull(space, V, registry=registry)
    us = space.unit_scale
    r = float(registry.get("neighborhood_Y")) * us
    margin = float(registry.get("essential_margin")) * us
    need = float(registry.get("essential_min_length")) * us
    lv = hull.v_length(g)
    if lv <= need and not allow_short:
        raise PreconditionError("l_V(g) = %g is not above %g" % (lv / us, need / us))
    x = hull.point() if basepoint is None else basepoint
    if not hull.contains(x):
        raise PreconditionError("basepoint must lie in X(V)")
    W = space.geodesic(x, space.apply(g, x))
    fX = hull.dists(W.points)
    fgX = hull.dists(W.points, g)
    comps = _complement_components(space, W, fX, fgX, r)
    long_ = [c for c in comps if c[1] - c[0] > margin + TOL]
    if allow_short and not long_ and comps:
        long_ = [max(comps, key=lambda c: (c[1] - c[0], -c[0]))]
    if len(long_) != 1:
        raise WindowError("expected one long complement component, found %d" % len(long_))
    a, b = long_[0]
    ep = EssentialPart(W, _sub_sample(W, a, b), r, a, b, lv, comps)
    if not allow_short:
        L = ep.length
        if not (lv - margin - TOL <= L <= lv + margin + TOL):
            raise AssertionError("essential part length %g outside l_V +- 20" % L)
    return ep


def essential_stability(space, g, V, x, y, registry=None):
    """Hausdorff distance between the essential parts for two basepoints."""
    hull = _Hull(space, V, registry=registry)
    e1 = essential_part(space, g, V, x, registry, _hull=hull)
    e2 = essential_part(space, g, V, y, registry, _hull=hull)
    return hausdorff(space, e1.segment.points, e2.segment.points) / space.unit_scale


# ----------------------------------------------------------------------------


@dataclass
class ProductType:
    kind: int  # 1 or 2
    l_g: float
    l_h: float
    l_gh: float
    p: object
    q: object
    containment: dict  # measured distances backing the picture


def product_type(space, g, h, V, registry=None):
    registry = registry or ConstantsRegistry()
    hull = _Hull(space, V, registry=registry)
    us = space.unit_scale
    lg, lh, lgh = hull.v_length(g), hull.v_length(h), hull.v_length(space.compose(g, h))
    if min(lg, lh, lgh) < 20 * us - TOL:
        raise PreconditionError("product type needs l_V(g), l_V(h), l_V(gh) >= 20")
    Eg = essential_part(space, g, V, registry=registry, allow_short=True, _hull=hull)
    Eh = essential_part(space, h, V, registry=registry, allow_short=True, _hull=hull)
    Egh = essential_part(space, space.compose(g, h), V, registry=registry, allow_short=True,
                         _hull=hull)
    gEh = space.apply_all(g, Eh.segment.points)
    pts = Egh.segment.points
    near_g = dist_to_set(space, pts, Eg.segment.points)
    near_h = dist_to_set(space, pts, gEh)
    r = 10 * us
    last_g = max([k for k, d in enumerate(near_g) if d <= r + TOL], default=0)
    first_h = min([k for k, d in enumerate(near_h) if d <= r + TOL], default=len(pts) - 1)
    if lgh < lg + lh - TOL:
        kind = 1
        k = (first_h + last_g) // 2 if first_h <= last_g else last_g
        p = q = pts[k]
        init = 0.5 * (lg - lh + lgh) - r
        term = 0.5 * (lh - lg + lgh) - r
        cont = {
            "initial_len": init / us,
            "terminal_len": term / us,
            "initial_dist": _prefix_dist(space, Eg.segment, init, pts[:k + 1]) / us,
            "terminal_dist": _suffix_dist(space, gEh, Eh.segment, term, pts[k:]) / us,
        }
    else:
        kind = 2
        p, q = pts[last_g], pts[max(first_h, last_g)]
        cont = {
            "E_g_dist": float(dist_to_set(space, Eg.segment.points, pts[:last_g + 1]).max()) / us,
            "gE_h_dist": float(dist_to_set(space, gEh, pts[max(first_h, last_g):]).max()) / us,
        }
    return ProductType(kind, lg / us, lh / us, lgh / us, p, q, cont)


def _prefix_dist(space, seg, length, target):
    pts = [p for p, s in zip(seg.points, seg.arclens) if s <= length + TOL]
    if not pts:
        return 0.0
    return float(dist_to_set(space, pts, target).max())


def _suffix_dist(space, moved, seg, length, target):
    L = seg.length
    pts = [p for p, s in zip(moved, seg.arclens) if s >= L - length - TOL]
    if not pts:
        return 0.0
    return float(dist_to_set(space, pts, target).max())


# ----------------------------------------------------------------------------


@dataclass
class NormalizeReport:
    tuple: list
    multipliers: list  # v chosen for each entry
    worst_defect: float
    bound: float
    ok: bool


def lemma76_normalize(space, V, H, cap, registry=None):
    """Replace each h_i by h_i v with v in V (words up to ``cap``) nearly
    minimizing l_V(h_i v h_i), then measure the defect
    l_V(h) + l_V(h') - l_V(h v h') over all h, h' in H^{+-1} and checked v."""
    from .hulls import subgroup_elements

    registry = registry or ConstantsRegistry()
    gens = V.gens if isinstance(V, SubgroupGens) else list(V)
    hull = _Hull(space, gens, registry=registry)
    Vel = [g for g, _ in subgroup_elements(space, SubgroupGens(gens), cap)]
    H = list(H)
    chosen = []
    for i, h in enumerate(H):
        scores = [(hull.v_length(space.compose(h, v, h)), k) for k, v in enumerate(Vel)]
        best, k = min(scores)
        H[i] = space.compose(h, Vel[k])
        chosen.append(Vel[k])
    us = space.unit_scale
    signed = H + [space.inverse(h) for h in H]
    lv = {k: hull.v_length(h) for k, h in enumerate(signed)}
    worst = float("-inf")
    for a, h in enumerate(signed):
        for b, hb in enumerate(signed):
            for v in Vel:
                if space.is_trivial(v):
                    continue
                d = lv[a] + lv[b] - hull.v_length(space.compose(h, v, hb))
                worst = max(worst, d)
    c = float(registry.get("c_of_m", len(H)))
    worst = worst / us if worst != float("-inf") else 0.0
    return NormalizeReport(H, chosen, worst, c, worst <= c + TOL)


# ----------------------------------------------------------------------------


@dataclass
class StablePart:
    segment: PathSample
    case_tag: str  # terminal_in_h or fallback_in_g
    N: float


def stable_part(space, factors, N, V, registry=None, m=1):
    """Stable part of w = g h^eta (factors (g, h, eta)) or of v = h^eta g
    (factors (h, eta, g), through the inverse product)."""
    registry = registry or ConstantsRegistry()
    if len(factors) != 3:
        raise PreconditionError("factors are (g, h, eta) or (h, eta, g)")
    if isinstance(factors[1], int) and factors[1] in (1, -1):
        h, eta, g = factors
        w = space.inverse(space.compose(h if eta > 0 else space.inverse(h), g))
        inner = stable_part(space, (space.inverse(g), h, -eta), N, V, registry, m)
        seg = inner.segment
        moved = space.apply_all(space.inverse(w), seg.points[::-1])
        arcs = [seg.length - s for s in seg.arclens[::-1]]
        return StablePart(PathSample(moved, arcs, seg.step), inner.case_tag, N)
    g, h, eta = factors
    us = space.unit_scale
    d2 = float(registry.get("d2", m)) * us
    d4 = float(registry.get("d4", m, registry.get("d2", m) + 20)) * us
    N1 = float(registry.get("N1")) * us
    Nn = float(N) * us
    if Nn < N1 - TOL:
        raise PreconditionError("N below N1")
    hull = _Hull(space, V, registry=registry)
    he = h if eta > 0 else space.inverse(h)
    lh = hull.v_length(h)
    need = 4 * Nn + 2 * d2 + 2 * d4 + 100 * us
    if lh < need - TOL:
        raise PreconditionError("l_V(h) = %g below %g" % (lh / us, need / us))
    w = space.compose(g, he)
    Eh = essential_part(space, he, V, registry=registry, _hull=hull)
    Ew = essential_part(space, w, V, registry=registry, _hull=hull)
    gE = space.apply_all(g, Eh.segment.points)
    L = Eh.segment.length
    arcs = Eh.segment.arclens
    term_len = 0.5 * lh + Nn + d2
    tail = [p for p, s in zip(gE, arcs) if s >= L - term_len - TOL]
    close = float(dist_to_set(space, tail, Ew.segment.points).max()) <= 2 * us + TOL
    if close:
        lo, hi = L - term_len, L - (0.5 * lh + d2)
        idx = [k for k, s in enumerate(arcs) if lo - TOL <= s <= hi + TOL]
        pts = [gE[k] for k in idx]
        return StablePart(PathSample(pts, [arcs[k] - arcs[idx[0]] for k in idx], Eh.segment.step),
                          "terminal_in_h", N)
    pt = product_type(space, g, he, V, registry)
    if pt.kind != 1:
        raise WindowError("second stable-part case needs a type-1 product")
    Eg = essential_part(space, g, V, registry=registry, allow_short=True, _hull=hull)
    dp = [space.dist(q, pt.p) for q in Eg.segment.points]
    # walk back from the point of E_g nearest to p
    k0 = min(range(len(dp)), key=lambda k: (dp[k], -k))
    idx = [k for k in range(k0 + 1) if d4 - TOL <= dp[k] <= d4 + Nn + TOL]
    if not idx:
        raise WindowError("E_g too short for the stable part")
    pts = [Eg.segment.points[k] for k in idx][::-1]
    s = Eg.segment.arclens
    arcs2 = [s[idx[-1]] - s[k] for k in idx[::-1]]
    return StablePart(PathSample(pts, arcs2, Eg.segment.step), "fallback_in_g", N)
