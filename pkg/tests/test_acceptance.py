"""Acceptance criteria 1-9.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
one PASS/FAIL line per criterion.
"""

import os
import random
import subprocess
import sys
import time

import pytest

from nielsenhyp.certificates import free_oracle, pingpong_certify
from nielsenhyp.coarse import (QuasiParams, bridge, check_broken_geodesic, concat_paths,
                               estimate_delta, four_point_defect, hausdorff, is_quasigeodesic,
                               nearest_points, quasiconvexity_estimate)
from nielsenhyp.connectors import minimal_connector
from nielsenhyp.constants import ConstantsRegistry
from nielsenhyp.errors import PreconditionError
from nielsenhyp.essential import essential_part, essential_stability
from nielsenhyp.hulls import (COARSE, TREE_EXACT, FreeSubtree, SubgroupGens, conv,
                              convex_hull_approx, subtree_translate_gap)
from nielsenhyp.nielsen import (ExactFreeGeometry, GTuple, complexity, mn_less, replay,
                                transfer_loop, trichotomy)
from nielsenhyp.space import tree_from_edges
from nielsenhyp.words import multiply, power

from oracles import connector_cases, random_word, steiner_bruteforce

crit = pytest.mark.criterion


# ----------------------------------------------------------------------------
# 1. exact hyperbolicity of the F2 ball


@crit(1, "F2 radius-3 ball: four-point and thin-triangle defect exactly 0, < 10 s")
def test_c1_exact_hyperbolicity(F2):
    t0 = time.perf_counter()
    ball = F2.ball(F2.identity(), 3)
    assert len(ball) == 1 + 4 + 12 + 36
    assert four_point_defect(F2, ball) == 0
    assert estimate_delta(F2, ball) == 0
    assert time.perf_counter() - t0 < 10


# ----------------------------------------------------------------------------
# 2. formula fidelity


@crit(2, "registry formulas: c(1)=300, c(3)=500, k(1,2)=2550, 2*1+1=3, 2*3-1=5")
def test_c2_formula_fidelity():
    reg = ConstantsRegistry()
    assert reg.get("c_of_m", 1) == 300
    assert reg.get("c_of_m", 3) == 500
    assert reg.get("lemma48_k", 1, 2) == 2550
    assert reg.get("gerasimov_radius", 1) == 3
    assert reg.get("transfer_bound", 3) == 5
    for v in (reg.get("c_of_m", 1), reg.get("lemma48_k", 1, 2), reg.get("gerasimov_radius", 1)):
        assert v == int(v)


# ----------------------------------------------------------------------------
# 3. projection and bridge bounds


def _random_subset(rng, pts, k):
    return sorted(rng.sample(pts, k))


@crit(3, "1000 random F2 cases: projection spread <= 2eps+8delta, bridge paths (1,50), < 60 s")
def test_c3_projection_and_bridge(F2):
    t0 = time.perf_counter()
    rng = random.Random(3)
    ball3 = F2.ball(F2.identity(), 3)
    ball5 = F2.ball(F2.identity(), 5)
    violations = []
    # nearest-point spread: 500 cases, at delta = 0 (exact minimizers) and at the
    # internal-unit convention delta = 1 (minimizers up to +1)
    for _ in range(500):
        A = _random_subset(rng, ball3, rng.randint(2, 12))
        eps = quasiconvexity_estimate(F2, A)
        p = rng.choice(ball5)
        for delta in (F2.internal_delta, 1.0):
            d = F2.dist_matrix([p], A)[0]
            close = [a for a, v in zip(A, d) if v <= d.min() + delta]
            spread = max(F2.dist(a, b) for a in close for b in close)
            if spread > 2 * eps + 8 * delta:
                violations.append(("3.11", A, p, delta, spread, eps))
    # bridges of length >= 100 between convex sets: 500 cases
    for _ in range(500):
        A = conv(F2, _random_subset(rng, ball3, rng.randint(1, 5)))
        shift = random_word(rng, rng.randint(110, 130))
        B = conv(F2, [multiply(shift, q) for q in _random_subset(rng, ball3, rng.randint(1, 5))])
        br = bridge(F2, A, B)
        assert br.length >= 100
        a2, b2 = rng.choice(A), rng.choice(B)
        path = concat_paths(F2.geodesic(a2, br.a), F2.geodesic(br.a, br.b), F2.geodesic(br.b, b2))
        rep = is_quasigeodesic(F2, path, QuasiParams(1.0, 50.0))
        hd = hausdorff(F2, path.points, F2.geodesic(a2, b2).points)
        if not rep.ok or hd > 50:
            violations.append(("5.2", a2, b2, rep.achieved_eps, hd))
        # the three-point version with exact gate projections
        chk = check_broken_geodesic(F2, a2, br.a, br.b, b2) if (
            nearest_points(F2, a2, F2.geodesic(br.a, br.b).points) == [br.a]
            and nearest_points(F2, b2, F2.geodesic(br.a, br.b).points) == [br.b]) else None
        if chk is not None and chk["ok"] is False:
            violations.append(("3.12", chk))
    assert violations == []
    assert time.perf_counter() - t0 < 60


# ----------------------------------------------------------------------------
# 4. connector optimality on small trees


@crit(4, "all trees <= 12 vertices, <= 4 sets (cap 1e5): perimeter = brute force; connector invariants hold")
def test_c4_connector_optimality():
    spaces = {}
    cases = mismatches = 0
    for n, edges, sets in connector_cases(12, 4, 10 ** 5):
        key = (n, tuple(edges))
        sp = spaces.get(key)
        if sp is None:
            sp = spaces[key] = tree_from_edges(edges)
        conn = minimal_connector(sp, sets)
        best = steiner_bruteforce(n, edges, [set(S) for S in sets])
        if conn.perimeter != best:
            mismatches += 1
        total_terminals = 0
        for comp in conn.components:
            idx = [i for _, i in comp.terminals]
            assert len(idx) == len(set(idx))
            total_terminals += len(idx)
        assert total_terminals <= 2 * (len(sets) - 1)
        cases += 1
    assert cases == 10 ** 5
    assert mismatches == 0


# ----------------------------------------------------------------------------
# 5. free-product soundness


@crit(5, "500 elliptic pairs: certificate true implies oracle free product; <a>,<a^2> is case (1)")
def test_c5_free_product_soundness(F2, tree_reg):
    rng = random.Random(5)
    issued = positives = false_pos = 0
    for _ in range(500):
        w1 = random_word(rng, rng.randint(0, 4))
        w2 = random_word(rng, rng.randint(0, 4))
        k = rng.choice([1, 2, 3, -1, -2])
        j = rng.choice([1, 2, 3, -1, -2])
        U1 = SubgroupGens([F2.conjugate(power((1,), k), w1)])
        U2 = SubgroupGens([F2.conjugate(power((2,), j), w2)])
        try:
            cert = pingpong_certify(F2, GTuple([U1, U2], []), 3, 2, registry=tree_reg, oracle=False)
        except PreconditionError as ex:  # the hulls meet: no certificate
            assert "hull distance" in str(ex)
            continue
        issued += 1
        if cert.finite_verdict:
            positives += 1
            rep = free_oracle(F2, U1.gens + U2.gens)
            if not (rep.rank == 2 and rep.is_free_product_of([U1.gens, U2.gens])):
                false_pos += 1
    assert issued > 100 and positives == issued
    assert false_pos == 0
    neg = GTuple([SubgroupGens([(1,)]), SubgroupGens([(1, 1)])], [])
    assert trichotomy(F2, neg, registry=tree_reg).case == 1
    with pytest.raises(PreconditionError, match="hull distance"):
        pingpong_certify(F2, neg, 3, 2, registry=tree_reg)


# ----------------------------------------------------------------------------
# 6. transfer-loop contract


@crit(6, "200 random F2 tuples: <= 2m-1 steps, (m,n) decreases, log replays, oracle confirms, < 5 min")
def test_c6_transfer_loop(F2, tree_reg):
    t0 = time.perf_counter()
    rng = random.Random(6)
    outcomes = {}
    for _ in range(200):
        m = rng.randint(1, 4)
        t = [random_word(rng, rng.randint(1, 6)) for _ in range(m)]
        l = rng.randint(1, m)
        res = transfer_loop(F2, t, l, registry=tree_reg)
        outcomes[res.outcome] = outcomes.get(res.outcome, 0) + 1
        assert res.structural_steps <= 2 * m - 1
        for st in res.steps:
            assert mn_less(st.mn_after, st.mn_before)
        assert replay(F2, t, res.log) == res.state.entries
        assert res.oracle["same_subgroup"] and res.oracle["replays"]
        assert res.oracle["confirmed"], (t, l, res.outcome)
    assert set(outcomes) <= {"success", "free_split"}
    assert time.perf_counter() - t0 < 300


# ----------------------------------------------------------------------------
# 7. essential parts


@crit(7, "200 random (<a>, g), l_V(g) > 40: l_V-20 <= len(E_g) <= l_V+20, basepoint stability <= 10")
def test_c7_essential_parts(F2):
    rng = random.Random(7)
    V = SubgroupGens([(1,)])
    T = FreeSubtree(F2, V.gens)
    done = 0
    while done < 200:
        g = multiply(power((1,), rng.randint(-8, 8)), random_word(rng, rng.randint(40, 90)),
                     power((1,), rng.randint(-8, 8)))
        lv = subtree_translate_gap(T, g)[0]
        if lv <= 40:
            continue
        E = essential_part(F2, g, V)
        assert lv - 20 <= E.length <= lv + 20
        x = power((1,), rng.randint(-15, 15))
        y = power((1,), rng.randint(-15, 15))
        assert essential_stability(F2, g, V, x, y) <= 10
        done += 1


# ----------------------------------------------------------------------------
# 8. equivariance


SUBGROUPS = [[(1,)], [(1, 1), (2, 2)], [(1, 2)], [(2, 1, -2), (1, 1)]]


@crit(8, "100 random conjugators: hulls translate, complexity and l_V unchanged (exact)")
def test_c8_equivariance(F2):
    rng = random.Random(8)
    geo = ExactFreeGeometry(F2)
    M = GTuple([SubgroupGens([(1,)]), SubgroupGens([(2, 1, -2)])], [(1, 2, 2), (2, -1)])
    base = complexity(F2, M, geo)
    hulls = {}
    for k, gens in enumerate(SUBGROUPS):
        for mode, W in ((COARSE, 3), (TREE_EXACT, 4)):
            hulls[k, mode] = convex_hull_approx(F2, SubgroupGens(gens), W, mode=mode, word_len=2)
    fields = ("orbit_sample", "limit_sample", "small_disp", "z_set", "hull", "weak_hull")
    for _ in range(100):
        g = random_word(rng, rng.randint(1, 6))
        for (k, mode), H in hulls.items():
            moved = H.translate(F2, g)
            U = SubgroupGens([F2.conjugate(u, g) for u in SUBGROUPS[k]])
            again = convex_hull_approx(F2, U, H.window_radius, mode=mode, basepoint=g, word_len=2)
            for f in fields:
                assert getattr(again, f) == getattr(moved, f), (k, mode, f, g)
        Mg = GTuple([U.conjugate(F2, g) for U in M.elliptic], [F2.conjugate(h, g) for h in M.hyperbolic])
        c = complexity(F2, Mg, geo)
        assert (c.d_M, c.H_V_len, c.mn_pair) == (base.d_M, base.H_V_len, base.mn_pair)
        h = random_word(rng, 5)
        assert geo.v_length(F2.conjugate(h, g), [F2.conjugate((1,), g)]) == geo.v_length(h, [(1,)])


# ----------------------------------------------------------------------------
# 9. CLI determinism


CLI_RUNS = [
    ["delta", "--radius", "2"],
    ["delta", "--radius", "3", "--sample", "20", "--seed", "4"],
    ["hull", "a", "bb", "--window", "3", "--svg", "{tmp}/h.svg"],
    ["hull", "a", "--window", "3", "--mode", "coarse_sampled"],
    ["reduce", "a", "aaa", "--l", "1", "--log", "{tmp}/r.log"],
    ["reduce", "a", "bAB", "abab"],
    ["connector", "1", "aa", "bb", "--svg", "{tmp}/c.svg"],
    ["certify", "a", "bAB", "--syllables", "3"],
    ["rank-demo", "--k", "2", "--radius", "1"],
]


def _run_cli(args, tmp, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    argv = [a.format(tmp=tmp) for a in args]
    out = subprocess.run([sys.executable, "-m", "nielsenhyp"] + argv, capture_output=True, env=env,
                         timeout=120)
    files = {}
    for a in argv:
        if a.startswith(str(tmp)):
            with open(a, "rb") as fh:
                files[os.path.basename(a)] = fh.read()
    return out.returncode, out.stdout, files


@crit(9, "two runs of every CLI command with the same seed give byte-identical reports")
def test_c9_cli_determinism(tmp_path):
    for args in CLI_RUNS:
        d1, d2 = tmp_path / "one", tmp_path / "two"
        d1.mkdir(exist_ok=True)
        d2.mkdir(exist_ok=True)
        r1 = _run_cli(args, d1, 1)
        r2 = _run_cli(args, d2, 2)
        assert r1[0] == 0, (args, r1)
        assert r1 == r2, args


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
