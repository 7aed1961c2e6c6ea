import random

import pytest

from nielsenhyp.errors import PreconditionError, SpecError
from nielsenhyp.hulls import SubgroupGens
from nielsenhyp.nielsen import (GMove, GTuple, LoopConfig, Move, PartitionedTuple, complexity,
                                free_split_holds, gtuple_move, minimize, mn_less, move_is_legal,
                                nielsen_move, replay, transfer_loop, trichotomy, v_length)
from nielsenhyp.stallings import FoldedGraph, subgroup_equal

from oracles import random_word


def test_elementary_moves(F2, w):
    t = [w("a"), w("b")]
    assert nielsen_move(F2, t, Move("N1", 1)) == [w("A"), w("b")]
    assert nielsen_move(F2, t, Move("N2", 1, 2)) == [w("ab"), w("b")]
    assert nielsen_move(F2, t, Move("N3", 1, 2)) == [w("b"), w("a")]
    assert nielsen_move(F2, t, Move("CONJ", 1, w1=w("b"))) == [w("baB"), w("b")]
    assert nielsen_move(F2, t, Move("MULT", 1, w1=w("b"), w2=w("B"))) == [w("baB"), w("b")]
    with pytest.raises(PreconditionError):
        nielsen_move(F2, t, Move("N2", 1, 1))
    with pytest.raises(PreconditionError):
        nielsen_move(F2, t, Move("N1", 3))


def test_move_lines_round_trip(F2, w):
    for mv in [Move("N1", 2), Move("N2", 1, 2), Move("N3", 2, 1), Move("CONJ", 1, w1=w("bA")),
               Move("MULT", 2, w1=w("a"), w2=w("AB"))]:
        assert Move.parse(F2, mv.format(F2)) == mv
    for bad in ["", "N4 1", "N2 1", "MULT 1 a", "N1 x"]:
        with pytest.raises(SpecError):
            Move.parse(F2, bad)


def test_replay_ignores_comments(F2, w):
    out = replay(F2, [w("a"), w("b")], ["# start", "N2 1 2", "", "N1 2"])
    assert out == [w("ab"), w("B")]


def test_legality(F2, w):
    t = [w("a"), w("b")]
    assert move_is_legal(F2, t, Move("MULT", 1, w1=w("bb"), w2=w("B")))
    assert not move_is_legal(F2, t, Move("MULT", 1, w1=w("a"), w2=()))
    assert not move_is_legal(F2, t, Move("CONJ", 2, w1=w("b")))


def test_nielsen_moves_preserve_subgroup(F2):
    rng = random.Random(7)
    for _ in range(200):
        t = [random_word(rng, rng.randint(1, 5)) for _ in range(3)]
        s = list(t)
        for _ in range(6):
            op = rng.choice(["N1", "N2", "N3"])
            i, j = rng.sample(range(1, 4), 2)
            s = nielsen_move(F2, s, Move(op, i, j if op != "N1" else None))
        assert subgroup_equal(FoldedGraph(t), FoldedGraph(s))


def test_gtuple_moves(F2, w):
    M = GTuple([SubgroupGens([w("a")]), SubgroupGens([w("b")])], [w("ab")])
    N = gtuple_move(F2, M, GMove("conj", 1, ((("U", 0, 0), 1),)))
    assert N.elliptic[1].gens == [w("abA")]
    N = gtuple_move(F2, M, GMove("mult", 0, ((("U", 0, 0), -1),), ((("U", 1, 0), -1),)))
    assert N.hyperbolic == [()]
    with pytest.raises(PreconditionError):
        gtuple_move(F2, M, GMove("conj", 0, ((("U", 0, 0), 1),)))
    with pytest.raises(PreconditionError):
        gtuple_move(F2, M, GMove("mult", 0, ((("H", 0), 1),)))
    with pytest.raises(PreconditionError):
        gtuple_move(F2, M, GMove("conj", 0, ((("U", 1, 0), 2),)))
    with pytest.raises(PreconditionError):
        GTuple([], [])


def test_v_length(F2, w):
    assert v_length(F2, w("b"), [w("a")]) == 1
    assert v_length(F2, w("baaaaab"), [w("a")]) == 7
    assert v_length(F2, w("aaa"), [w("a")]) == 0
    assert v_length(F2, w("ab"), []) == 2


def test_complexity(F2, w):
    M = GTuple([SubgroupGens([w("a")])], [w("bab")])
    rep = complexity(F2, M)
    assert rep.mn_pair == (1, 1) and rep.d_M == 0 and rep.H_V_len == 3
    M2 = GTuple([SubgroupGens([w("a")]), SubgroupGens([w("BBabb")])], [])
    assert complexity(F2, M2).d_M == 2


def test_mn_order():
    assert mn_less((1, 5), (2, 0))
    assert mn_less((1, 0), (1, 1))
    assert not mn_less((2, 0), (1, 5))
    assert not mn_less((1, 1), (1, 1))


def test_minimize_shortens(F2, w, tree_reg):
    M = PartitionedTuple([w("a"), w("aab")], [[0]], [()], [1])
    res = minimize(F2, M, registry=tree_reg)
    assert res.minimal
    assert res.state.entries[1] == w("b")
    assert replay(F2, M.entries, res.log) == res.state.entries
    with pytest.raises(PreconditionError):
        minimize(F2, M, multiplier_len_cap=0)


def test_trichotomy_cases(F2, w, tree_reg):
    tri = lambda M: trichotomy(F2, M, registry=tree_reg)
    assert tri(GTuple([SubgroupGens([w("a")])], [w("b")])).case == 3
    assert tri(GTuple([SubgroupGens([w("a")]), SubgroupGens([w("bab")])], [])).case == 1
    assert tri(GTuple([SubgroupGens([w("a")])], [w("aaa")])).case == 2
    assert tri(GTuple([SubgroupGens([w("a")])], [w("bab")])).case == "presumed_free_product"


def test_transfer_loop_success(F2, w, tree_reg):
    r = transfer_loop(F2, [w("a"), w("aaa")], 1, registry=tree_reg)
    assert r.outcome == "success"
    assert r.oracle["confirmed"] and r.oracle["same_subgroup"] and r.oracle["replays"]
    assert len(r.short_entries) >= 2
    assert r.structural_steps <= 2 * 2 - 1


def test_transfer_loop_free_split(F2, w, tree_reg):
    r = transfer_loop(F2, [w("a"), w("bAB")], 1, registry=tree_reg)
    assert r.outcome == "free_split" and r.oracle["confirmed"]
    assert free_split_holds(F2, r.state)


def test_transfer_loop_merge(F2, w, tree_reg):
    r = transfer_loop(F2, [w("ab"), w("abab"), w("b")], 1, registry=tree_reg)
    assert r.outcome == "success"
    assert [s.kind for s in r.steps] == ["open", "open", "merge"]
    assert r.oracle["confirmed"]


def test_transfer_loop_input_checks(F2, w):
    with pytest.raises(PreconditionError):
        transfer_loop(F2, [], 1)
    with pytest.raises(PreconditionError):
        transfer_loop(F2, [w("a")], 0)


def test_transfer_loop_random_replays(F2, tree_reg):
    rng = random.Random(11)
    for _ in range(30):
        t = [random_word(rng, rng.randint(1, 4)) for _ in range(rng.randint(2, 3))]
        r = transfer_loop(F2, t, 1, LoopConfig(), registry=tree_reg)
        assert r.outcome in ("success", "free_split", "indeterminate")
        assert r.oracle["same_subgroup"] and r.oracle["replays"]
