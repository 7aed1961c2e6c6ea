"""Coarse hyperbolic geometry on finite samples.

Everything here is an exact computation over finite point sets: projections
and bridges are true minima, delta estimates are maxima over the given
sample and therefore lower bounds for the space.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, WindowError
from .space import PathSample

TOL = 1e-9


@dataclass(frozen=True)
class QuasiParams:
    lam: float = 1.0
    eps: float = 0.0
    local_window: float = None

    def __post_init__(self):
        if self.lam < 1 or self.eps < 0:
            raise PreconditionError("need lambda >= 1 and eps >= 0")


@dataclass
class QuasiReport:
    ok: bool
    pair: tuple  # indices of the worst pair
    excess: float  # max of |s_i - s_j| - lam*d - eps, <= 0 when ok
    achieved_eps: float  # smallest eps that would pass at this lambda


@dataclass(frozen=True)
class Bridge:
    a: object
    b: object
    length: float


def gromov_product(space, x, y, z):
    """(y, z)_x"""
    return 0.5 * (space.dist(y, x) + space.dist(z, x) - space.dist(y, z))


def concat_paths(*paths):
    """Join paths end to start; a repeated junction point is kept once."""
    pts, arcs = [], []
    step = 0.0
    for path in paths:
        step = max(step, path.step)
        off = arcs[-1] if arcs else 0.0
        start = 1 if pts and path.points and pts[-1] == path.points[0] else 0
        if pts and start == 0 and path.points:
            raise PreconditionError("paths do not share an endpoint")
        for p, s in zip(path.points[start:], path.arclens[start:]):
            pts.append(p)
            arcs.append(off + s)
    return PathSample(pts, arcs, step or 1.0)


def _geodesic_table(space, sample):
    """Canonical geodesics between all ordered pairs, as padded index arrays."""
    idx = {}
    pts = []

    def key(p):
        k = idx.get(p)
        if k is None:
            k = idx[p] = len(pts)
            pts.append(p)
        return k

    for p in sample:
        key(p)
    N = len(sample)
    geos = {}
    for i in range(N):
        for j in range(N):
            if i <= j:
                g = space.geodesic(sample[i], sample[j]).points
                geos[i, j] = [key(p) for p in g]
            else:
                geos[i, j] = geos[j, i][::-1]
    L = max(len(g) for g in geos.values())
    G = np.full((N, N, L), -1, dtype=np.int64)
    for (i, j), g in geos.items():
        G[i, j, :len(g)] = g
    return pts, G


def estimate_delta(space, sample):
    """Largest thin-triangle defect over all triangles of the sample.

    For each triangle and each sampled point on one side, the distance to the
    union of the other two sides; the maximum is returned.
    """
    sample = list(dict.fromkeys(sample))
    if len(sample) < 3:
        raise PreconditionError("need at least 3 sample points")
    pts, G = _geodesic_table(space, sample)
    N, _, L = G.shape
    # pairs on a common triangle are within half its perimeter; others may be
    # outside a presentation ball and are never used
    D = space.dist_matrix(pts, pts, missing=np.inf)
    mask = G >= 0
    Gc = np.where(mask, G, 0)
    # dpg[p, i, j] = distance from union point p to geodesic [s_i, s_j]
    dpg = np.where(mask[None], D[:, Gc], np.inf).min(axis=3)
    worst = 0.0
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            side = G[i, j][mask[i, j]]
            # distance from each side point to [s_j, s_k] and [s_i, s_k], over all k
            near = np.minimum(dpg[side][:, j, :], dpg[side][:, i, :])
            worst = max(worst, float(near.max()))
    if not np.isfinite(worst):
        raise WindowError("sample triangles leave the computed ball")
    return worst


def four_point_defect(space, sample):
    """max over w,x,y,z of min((x,z)_w, (y,z)_w) - (x,y)_w, never below 0."""
    sample = list(dict.fromkeys(sample))
    D = space.dist_matrix(sample, sample)
    worst = 0.0
    for w in range(len(sample)):
        dw = D[w]
        Gm = 0.5 * (dw[:, None] + dw[None, :] - D)
        # for each z: min(G[x,z], G[y,z]) - G[x,y]
        for z in range(len(sample)):
            gz = Gm[:, z]
            worst = max(worst, float((np.minimum(gz[:, None], gz[None, :]) - Gm).max()))
    return worst


def is_quasigeodesic(space, path, params=QuasiParams()):
    if len(path.points) < 2:
        raise PreconditionError("path needs at least 2 points")
    D = space.dist_matrix(path.points, path.points)
    s = np.asarray(path.arclens, dtype=float)
    S = np.abs(s[:, None] - s[None, :])
    excess = S - params.lam * D - params.eps
    if params.local_window is not None:
        excess = np.where(S <= params.local_window + TOL, excess, -np.inf)
    flat = int(np.argmax(excess))
    i, j = divmod(flat, excess.shape[1])
    worst = float(excess[i, j])
    need = float((excess + params.eps).max())
    return QuasiReport(worst <= TOL, (min(i, j), max(i, j)), worst, max(need, 0.0))


def _argmin_shortlex(space, pts, vals):
    m = float(np.min(vals))
    cands = [p for p, v in zip(pts, vals) if v <= m + TOL]
    return min(cands, key=space.sort_key), m


def project(space, p, A):
    A = list(A)
    if not A:
        raise PreconditionError("cannot project to an empty set")
    vals = space.dist_matrix([p], A)[0]
    return _argmin_shortlex(space, A, vals)[0]


def nearest_points(space, p, A):
    """All exact minimizers of d(p, .) on A."""
    A = list(A)
    vals = space.dist_matrix([p], A)[0]
    m = vals.min()
    return [a for a, v in zip(A, vals) if v <= m + TOL]


def set_distance(space, A, B):
    A, B = list(A), list(B)
    if not A or not B:
        raise PreconditionError("empty set")
    return float(space.dist_matrix(A, B).min())


def dist_to_set(space, P, A):
    """Vector of d(p, A) for p in P."""
    return space.dist_matrix(list(P), list(A)).min(axis=1)


def hausdorff(space, A, B):
    A, B = list(A), list(B)
    if not A and not B:
        return 0.0
    if not A or not B:
        return float("inf")
    D = space.dist_matrix(A, B)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def bridge(space, A, B):
    A, B = list(A), list(B)
    if not A or not B:
        raise PreconditionError("bridge needs nonempty sets")
    D = space.dist_matrix(A, B)
    m = float(D.min())
    cands = [(A[i], B[j]) for i, j in zip(*np.nonzero(D <= m + TOL))]
    a, b = min(cands, key=lambda ab: (space.sort_key(ab[0]), space.sort_key(ab[1])))
    return Bridge(a, b, m)


def quasiconvexity_estimate(space, A, pair_sample=None):
    """max over sampled pairs of the distance from [a, a'] to A."""
    A = list(dict.fromkeys(A))
    if not A:
        raise PreconditionError("empty set")
    pairs = pair_sample if pair_sample is not None else itertools.combinations(A, 2)
    on_geo = {}
    for a, b in pairs:
        for p in space.geodesic(a, b).points:
            on_geo[p] = None
    if not on_geo:
        return 0.0
    return float(dist_to_set(space, list(on_geo), A).max())


def check_broken_geodesic(space, p, x_p, x_q, q):
    """Concatenation [p,x_p] u [x_p,x_q] u [x_q,q] when the middle is long.

    Both projections must be exact projections onto the middle geodesic.
    Returns a dict report.
    """
    seg = space.geodesic(x_p, x_q)
    d_p = dist_to_set(space, [p], seg.points)[0]
    d_q = dist_to_set(space, [q], seg.points)[0]
    if space.dist(p, x_p) > d_p + TOL or space.dist(q, x_q) > d_q + TOL:
        raise PreconditionError("x_p / x_q are not projections onto [x_p, x_q]")
    base = space.idist(x_p, x_q)
    if base < 100:
        return {"branch": "short-base", "base_length": base, "ok": None}
    path = concat_paths(space.geodesic(p, x_p), seg, space.geodesic(x_q, q))
    eps = 30 * space.unit_scale * max(space.internal_delta, 0.0)
    rep = is_quasigeodesic(space, path, QuasiParams(1.0, eps))
    return {"branch": "long-base", "base_length": base, "ok": rep.ok,
            "worst_defect": rep.achieved_eps / space.unit_scale, "eps_allowed": eps / space.unit_scale}
