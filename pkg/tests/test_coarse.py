import random

import pytest

from nielsenhyp.coarse import (QuasiParams, bridge, check_broken_geodesic, concat_paths,
                               estimate_delta, four_point_defect, gromov_product, hausdorff,
                               is_quasigeodesic, nearest_points, project, quasiconvexity_estimate,
                               set_distance)
from nielsenhyp.errors import PreconditionError
from nielsenhyp.space import PathSample

from oracles import random_word


def test_gromov_product(F2, w):
    assert gromov_product(F2, (), w("ab"), w("aB")) == 1
    assert gromov_product(F2, (), w("ab"), w("ba")) == 0


def test_delta_free_ball_is_zero(F2):
    B = F2.ball((), 2)
    assert estimate_delta(F2, B) == 0
    assert four_point_defect(F2, B) == 0


def test_geodesics_are_quasigeodesics(F2, w):
    g = F2.geodesic((), w("abab"))
    rep = is_quasigeodesic(F2, g)
    assert rep.ok and rep.achieved_eps == 0


def test_backtracking_path_detected(F2, w):
    pts = [(), w("a"), (), w("b")]
    path = PathSample(pts, [0, 1, 2, 3], 1)
    rep = is_quasigeodesic(F2, path, QuasiParams(1, 1))
    assert not rep.ok and rep.achieved_eps == 2
    assert is_quasigeodesic(F2, path, QuasiParams(1, 2)).ok
    # a revisited point defeats any multiplicative constant
    assert not is_quasigeodesic(F2, path, QuasiParams(10, 0)).ok


def test_quasi_params_validated():
    with pytest.raises(PreconditionError):
        QuasiParams(0.5, 0)
    with pytest.raises(PreconditionError):
        QuasiParams(1, -1)


def test_projection_tiebreak(F2, w):
    assert project(F2, w("ab"), [(), w("a"), w("aa")]) == w("a")
    # equidistant candidates: shortlex smallest wins
    assert nearest_points(F2, (), [w("a"), w("b")]) == [w("a"), w("b")]
    assert project(F2, (), [w("b"), w("a")]) == w("a")
    with pytest.raises(PreconditionError):
        project(F2, (), [])


def test_projection_is_exact_min(F2):
    rng = random.Random(3)
    for _ in range(300):
        p = random_word(rng, rng.randint(0, 6))
        A = [random_word(rng, rng.randint(0, 6)) for _ in range(rng.randint(1, 6))]
        q = project(F2, p, A)
        assert F2.dist(p, q) == min(F2.dist(p, a) for a in A)


def test_bridge_and_distances(F2, w):
    A = [w("aa"), w("aaa")]
    B = [w("bb"), w("b")]
    br = bridge(F2, A, B)
    assert (br.a, br.b, br.length) == (w("aa"), w("b"), 3)
    assert set_distance(F2, A, B) == 3
    assert hausdorff(F2, A, A) == 0
    assert hausdorff(F2, [], [w("a")]) == float("inf")


def test_quasiconvexity(F2, w):
    assert quasiconvexity_estimate(F2, [(), w("ab")]) == 1
    assert quasiconvexity_estimate(F2, [(), w("a"), w("ab")]) == 0


def test_concat_requires_shared_endpoint(F2, w):
    p = F2.geodesic((), w("a"))
    q = F2.geodesic(w("a"), w("ab"))
    assert concat_paths(p, q).points == [(), w("a"), w("ab")]
    with pytest.raises(PreconditionError):
        concat_paths(p, F2.geodesic(w("b"), w("bb")))


def test_broken_geodesic_branches(F2, w):
    rep = check_broken_geodesic(F2, w("B"), (), w("aaa"), w("aaab"))
    assert rep["branch"] == "short-base" and rep["ok"] is None
    xq = (1,) * 120
    rep = check_broken_geodesic(F2, w("BB"), (), xq, xq + (2, 2))
    assert rep["branch"] == "long-base" and rep["ok"] and rep["worst_defect"] == 0
    with pytest.raises(PreconditionError):
        check_broken_geodesic(F2, w("a"), (), w("aa"), w("aa"))
