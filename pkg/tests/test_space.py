import math
import random

import numpy as np
import pytest

from nielsenhyp.errors import SpecError
from nielsenhyp.space import make_space, max_piece_ratio, parse_space_spec
from nielsenhyp.words import (Alphabet, cyclic_reduction, inverse, multiply, reduce_word,
                              shortlex_key, words_up_to)

from oracles import random_word


def test_reduce_and_inverse():
    assert reduce_word((1, -1, 2)) == (2,)
    assert multiply((1, 2), (-2, -1)) == ()
    assert inverse((1, -2)) == (2, -1)


def test_cyclic_reduction():
    c, r = cyclic_reduction((1, 2, -1))
    assert r == (2,) and multiply(c, r, inverse(c)) == (1, 2, -1)


def test_alphabet_parsing():
    A = Alphabet.standard(2)
    assert A.parse("ab^-1") == A.parse("aB") == (1, -2)
    assert A.format((1, -2, -2)) == "aBB"
    with pytest.raises(SpecError):
        A.parse("az")


def test_shortlex_enumeration():
    ws = words_up_to([1, -1, 2, -2], 2)
    assert len(ws) == 17
    assert ws == sorted(ws, key=shortlex_key)


# spaces


def test_free_handle(F2):
    assert F2.delta == 0 and F2.generator_count == 2 and F2.backend_kind == "free_cayley"


def test_free_distances(F2, w):
    assert F2.dist((), w("abab")) == 4
    assert F2.dist(w("ab"), w("ab")) == 0
    assert F2.geodesic((), w("ab")).points == [(), w("a"), w("ab")]
    assert F2.apply(w("a"), w("b")) == w("ab")
    assert F2.apply((), w("ab")) == w("ab")


def test_ball_sizes(F2, path4):
    assert len(F2.ball((), 1)) == 5
    assert len(F2.ball((), 2)) == 17
    assert set(path4.ball(1, 1)) == {0, 1, 2}


def test_tree_geodesic(path4):
    g = path4.geodesic(0, 3)
    assert g.points == [0, 1, 2, 3] and g.length == 3


def test_metric_axioms_radius4(F2):
    B = F2.ball((), 4)
    D = F2.dist_matrix(B, B)
    assert (D == D.T).all() and (np.diag(D) == 0).all()
    assert ((D > 0) | np.eye(len(B), dtype=bool)).all()
    assert (D[:, None, :] <= D[:, :, None] + D[None, :, :]).all()


def test_isometry_action_random(F2):
    rng = random.Random(0)
    for _ in range(1000):
        g, p, q = (random_word(rng, rng.randint(0, 8)) for _ in range(3))
        assert F2.dist(F2.apply(g, p), F2.apply(g, q)) == F2.dist(p, q)


def test_genus2_accepted(genus2):
    assert genus2.backend_kind == "presentation_ball"
    ratio = max_piece_ratio([genus2.backend.rels[0]])
    assert ratio[0] == pytest.approx(1 / 8)


def test_genus2_dehn_and_action(genus2):
    p = genus2.parse_point
    assert genus2.is_trivial(p("abABcdCD"))
    assert genus2.dist((), p("abAB")) == 4
    nf = genus2.normal_form(p("abABc"))
    assert genus2.normal_form(nf) == nf
    rng = random.Random(1)
    letters = [1, -1, 2, -2, 3, -3, 4, -4]
    for _ in range(200):
        g, x, y = (genus2.normal_form(random_word(rng, rng.randint(0, 2), letters)) for _ in range(3))
        assert genus2.dist(genus2.apply(g, x), genus2.apply(g, y)) == genus2.dist(x, y)


def test_small_cancellation_rejects_torsion():
    with pytest.raises(SpecError):
        make_space("presentation gens=a rels=aaa radius=3")


def test_rescaling(genus2):
    p, q = genus2.parse_point("ab"), genus2.parse_point("cdC")
    assert genus2.idist(p, q) == genus2.dist(p, q) / genus2.unit_scale
    assert genus2.internal_delta <= 1


def test_half_plane(H2):
    assert H2.delta == 1
    assert H2.dist(1j, 2j) == pytest.approx(math.log(2))
    g = H2.geodesic(1j, 2j, 0.1)
    assert g.length == pytest.approx(math.log(2), abs=1e-6)
    assert all(abs(z.real) < 1e-12 for z in g.points)
    T = H2.parse_isometry("[[1,1],[0,1]]")
    assert H2.apply(T, 1j) == pytest.approx(1 + 1j)
    rng = random.Random(2)
    for _ in range(1000):
        a, b, c = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)
        d = (1 + b * c) / a if abs(a) > 0.1 else None
        if d is None:
            continue
        M = H2.parse_isometry("[[%r,%r],[%r,%r]]" % (a, b, c, d))
        z1 = complex(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        z2 = complex(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        assert H2.dist(H2.apply(M, z1), H2.apply(M, z2)) == pytest.approx(H2.dist(z1, z2), abs=1e-9)


@pytest.mark.parametrize("text", ["", "free", "free 0", "tree 1 1", "tree 1 2\ntree 3 4",
                                  "presentation gens=a", "bogus 3", "h2 5"])
def test_bad_specs(text):
    with pytest.raises(SpecError):
        make_space(parse_space_spec(text) if text.startswith("tree") else text)


def test_tree_spec_parsing():
    sp = make_space("tree 0 1\ntree 1 2  # comment\n")
    assert sp.backend_kind == "tree" and sp.delta == 0 and sp.dist(0, 2) == 2
