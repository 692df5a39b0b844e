import json

import numpy as np
import pytest

from epeckit import (
    Game,
    LeaderProblem,
    ParametricLcp,
    ParseError,
    Polyhedron,
    Polynomial,
    SemanticError,
    VariableLayout,
    membership_F,
    parse_game,
    parse_point,
    serialize_game,
)
from epeckit.generators import cournot, pang_fukushima
from conftest import pf_point


def test_parse_pf_original_game():
    game = parse_game(serialize_game(pang_fukushima("original")))
    assert game.layout.nleaders == 2
    assert game.layout.m == (1, 1)
    assert game.layout.p == 1
    assert np.allclose(game.follower.M, [[1.0]])
    assert np.allclose(game.follower.Nmat, [[1.0, 1.0]])
    assert np.allclose(game.follower.q, [-1.0])
    assert game.formulation == "original"


def test_empty_leader_list_is_semantic_error():
    doc = {
        "layout": {"m": [], "p": 1},
        "formulation": "original",
        "follower": {"M": [[1.0]], "N": [[]], "q": [-1.0]},
        "leaders": [],
    }
    with pytest.raises(SemanticError):
        parse_game(json.dumps(doc))


def test_syntax_error_reports_location():
    with pytest.raises(ParseError) as err:
        parse_game('{"layout": ')
    assert err.value.line is not None


def test_cournot_roundtrip_is_identity_on_canonical_form():
    game = cournot(10, 1, 1, 3, 2)
    text = serialize_game(game)
    again = serialize_game(parse_game(text))
    assert text == again


def test_roundtrip_all_examples():
    games = [pang_fukushima(v) for v in ("original", "quasi-plus", "quasi-minus", "shared")]
    games += [cournot(10, 1, 1, 3, 2), cournot(5, 0.5, 2, 4, 3, full_followers=True)]
    for game in games:
        text = serialize_game(game)
        assert serialize_game(parse_game(text)) == text


def test_rival_conjecture_dependency_rejected():
    layout = VariableLayout(m=(1, 1), p=1)
    bad = Polynomial(4, {(0, 0, 0, 1): 1.0})  # leader 1 touching y2
    ok = Polynomial(4, {(0, 1, 0, 0): 1.0})
    unit = Polyhedron([[1.0]], [0.0])
    free = Polyhedron(np.zeros((0, 1)), [])
    lcp = ParametricLcp([[1.0]], [[1.0, 1.0]], [-1.0])
    with pytest.raises(SemanticError, match="y-block of leader 2"):
        Game(
            leaders=(LeaderProblem(bad, unit, free), LeaderProblem(ok, unit, free)),
            follower=lcp, formulation="original", layout=layout,
        )


def test_ind_formulation_rejects_follower_terms():
    layout = VariableLayout(m=(1, 1), p=1)
    phi1 = Polynomial(4, {(0, 0, 1, 0): 1.0})
    phi2 = Polynomial(4, {(0, 1, 0, 0): 1.0})
    unit = Polyhedron([[1.0]], [0.0])
    free = Polyhedron(np.zeros((0, 1)), [])
    lcp = ParametricLcp([[1.0]], [[1.0, 1.0]], [-1.0])
    with pytest.raises(SemanticError, match="ind"):
        Game(
            leaders=(LeaderProblem(phi1, unit, free), LeaderProblem(phi2, unit, free)),
            follower=lcp, formulation="ind", layout=layout,
        )


def test_bl_formulation_requires_block_coupling():
    layout = VariableLayout(m=(1, 1), p=2)
    phi1 = Polynomial(6, {(1, 0, 0, 0, 0, 0): 1.0})
    phi2 = Polynomial(6, {(0, 1, 0, 0, 0, 0): 1.0})
    unit = Polyhedron([[1.0]], [0.0])
    free = Polyhedron(np.zeros((0, 2)), [])
    coupled = ParametricLcp(np.eye(2), [[1.0, 1.0], [1.0, 1.0]], [-1.0, -1.0])
    with pytest.raises(SemanticError, match="bl"):
        Game(
            leaders=(LeaderProblem(phi1, unit, free), LeaderProblem(phi2, unit, free)),
            follower=coupled, formulation="bl", layout=layout,
        )
    decoupled = ParametricLcp(np.eye(2), [[1.0, 0.0], [0.0, 1.0]], [-1.0, -1.0])
    game = Game(
        leaders=(LeaderProblem(phi1, unit, free), LeaderProblem(phi2, unit, free)),
        follower=decoupled, formulation="bl", layout=layout,
    )
    assert game.formulation == "bl"


def test_membership_pf_equilibrium_point(pf_original):
    assert membership_F(pf_original, *pf_point(0, 1, 0, 0))


def test_membership_pf_origin_fails(pf_original):
    # S(0, 0) = {1}, so y = 0 is not a follower equilibrium
    assert not membership_F(pf_original, *pf_point(0, 0, 0, 0))


def test_membership_x_outside_strategy_set(pf_original):
    assert not membership_F(pf_original, *pf_point(1.5, 0, 0, 0))


def test_membership_identical_for_original_and_ae():
    # F = F^ae: the fixed-point sets of the two feasible-region maps agree
    import dataclasses

    rng = np.random.default_rng(42)
    for game in [pang_fukushima("original"), cournot(10, 1, 1, 3, 2)]:
        ae = dataclasses.replace(game, formulation="ae")
        lay = game.layout
        for _ in range(300):
            xs = [rng.uniform(-0.5, 1.5, lay.m[i]) for i in range(lay.nleaders)]
            ys = [rng.uniform(-0.5, 1.5, lay.p) for i in range(lay.nleaders)]
            assert membership_F(game, xs, ys) == membership_F(ae, xs, ys)


def test_point_file_parsing(pf_original):
    xs, ys = parse_point('{"x": [[0.0], [1.0]], "y": [[0.0], [0.0]]}', pf_original)
    assert np.allclose(xs[1], [1.0])
    with pytest.raises(SemanticError):
        parse_point('{"x": [[0.0]], "y": [[0.0]]}', pf_original)


def test_layout_bookkeeping():
    lay = VariableLayout(m=(2, 1), p=2)
    assert lay.n == 3 + 4
    assert lay.x_indices(0) == [0, 1]
    assert lay.x_indices(1) == [2]
    assert lay.y_indices(0) == [3, 4]
    assert lay.y_indices(1) == [5, 6]
    assert lay.leader_of(0) == ("x", 0)
    assert lay.leader_of(5) == ("y", 1)
    w = VariableLayout(m=(2, 1), p=2, shared_w=True)
    assert w.n == 5
    assert w.names()[-1] == "w_2"
