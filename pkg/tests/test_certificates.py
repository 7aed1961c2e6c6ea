import random

import pytest

from nielsenhyp.certificates import (Certificate, free_oracle, nielsen_reduce, pingpong_certify,
                                     rank_search, replay_certificate, trichotomy_certificate)
from nielsenhyp.errors import CapExceeded, Indeterminate, PreconditionError
from nielsenhyp.hulls import SubgroupGens
from nielsenhyp.nielsen import GTuple, trichotomy
from nielsenhyp.space import tree_from_edges
from nielsenhyp.stallings import FoldedGraph, subgroup_equal

from oracles import random_word


def test_oracle_examples(F2, w):
    rep = free_oracle(F2, [w("a"), w("ab")])
    assert rep.basis == [w("a"), w("b")] and rep.rank == 2
    rep = free_oracle(F2, [w("aa"), w("aaa")])
    assert rep.basis == [w("a")] and rep.rank == 1
    assert rep.member(w("AAAAA")) and not rep.member(w("b"))
    assert free_oracle(F2, [()]).rank == 0


def test_oracle_random_tuples(F2):
    rng = random.Random(8)
    for _ in range(1000):
        t = [random_word(rng, rng.randint(0, 6)) for _ in range(rng.randint(1, 4))]
        red = nielsen_reduce(t)
        assert sum(map(len, red)) <= sum(map(len, t))
        nz = [x for x in t if x]
        if not nz:
            assert red == []
            continue
        assert subgroup_equal(FoldedGraph(nz), FoldedGraph(red))
        rep = free_oracle(F2, t)
        assert len(rep.basis) == rep.rank
        assert subgroup_equal(FoldedGraph(nz), FoldedGraph(rep.basis))


def test_free_product_detection(F2, w):
    rep = free_oracle(F2, [w("a"), w("bAB")])
    assert rep.is_free_product_of([[w("a")], [w("bAB")]])
    rep = free_oracle(F2, [w("a"), w("aa")])
    assert not rep.is_free_product_of([[w("a")], [w("aa")]])
    with pytest.raises(PreconditionError):
        free_oracle(tree_from_edges([(0, 1)]), [0])


def test_pingpong_certificate(F2, w, tree_reg):
    cert = pingpong_certify(F2, [[w("a")], [w("bAB")]], 3, 2, registry=tree_reg)
    assert cert.verdict is True and cert.finite_verdict is True and cert.oracle is True
    assert len(cert.checked_words) == 168
    assert all(d > 0 for _, d, _ in cert.checked_words)
    assert replay_certificate(F2, cert)
    again = Certificate.from_text(cert.to_text())
    assert again == cert


def test_tampered_certificate_fails_replay(F2, w, tree_reg):
    cert = pingpong_certify(F2, [[w("a")], [w("bAB")]], 2, 1, registry=tree_reg)
    lines = cert.to_text().splitlines()
    k = next(i for i, line in enumerate(lines) if line.startswith("  "))
    shape, disp, sig = lines[k].split("|")
    lines[k] = "%s| %s |%s" % (shape, float(disp) + 1, sig)
    assert not replay_certificate(F2, Certificate.from_text("\n".join(lines) + "\n"))


def test_pingpong_preconditions(F2, w, tree_reg):
    with pytest.raises(PreconditionError, match="hull distance"):
        pingpong_certify(F2, [[w("a")], [w("aa")]], registry=tree_reg)
    with pytest.raises(PreconditionError):
        pingpong_certify(F2, [[w("a")]], registry=tree_reg)
    with pytest.raises(PreconditionError):
        pingpong_certify(F2, [[w("a")], [w("bAB")]], 0, registry=tree_reg)
    with pytest.raises(PreconditionError):
        pingpong_certify(F2, GTuple([SubgroupGens([w("a")])], [w("b")]), registry=tree_reg)


def test_trichotomy_certificate(F2, w, tree_reg):
    M = GTuple([SubgroupGens([w("a")]), SubgroupGens([w("aa")])], [])
    out = trichotomy(F2, M, registry=tree_reg)
    cert = trichotomy_certificate(F2, M, out)
    assert cert.kind == "trichotomy_case(1)"
    assert Certificate.from_text(cert.to_text()) == cert
    M = GTuple([SubgroupGens([w("a")]), SubgroupGens([w("bAB")])], [])
    with pytest.raises(Indeterminate):
        trichotomy_certificate(F2, M, trichotomy(F2, M, registry=tree_reg))


def test_rank_search_small(F2):
    rep = rank_search(F2, 1, 1)
    assert rep.subsets == 4 and len(rep.classes) == 2
    rep = rank_search(F2, 2, 1)
    assert rep.subsets == 10 and len(rep.classes) == 3
    assert rep.rank_histogram == {1: 2, 2: 1} and rep.smallest_rank == 1


def test_rank_search_partition(F2):
    rep = rank_search(F2, 2, 2)
    # every multiset lands in exactly one class; the trivial ones (none here) are skipped
    assert sum(c.count for c in rep.classes) == rep.subsets
    sigs = [c.signature for c in rep.classes]
    assert len(sigs) == len(set(sigs))


def test_rank_search_limits(F2):
    with pytest.raises(PreconditionError):
        rank_search(F2, 0, 1)
    with pytest.raises(CapExceeded):
        rank_search(F2, 3, 3, cap=100)
