from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hedonic_dynamics.game import (
    ContractError,
    DynamicState,
    Game,
    Partition,
    aggregate,
    as_rational,
    game_from_json,
    game_to_json,
    is_individually_rational,
    partition_from_json,
    partition_to_json,
    partition_utility,
    rational_from_json,
    rational_to_json,
    validate_partition,
)

A, B, C = 0, 1, 2


@pytest.fixture
def ate_game():
    # u_a(b) = -1, u_a(c) = -3, u_b(a) = 1, u_b(c) = -1
    return Game.from_matrix([[0, -1, -3], [1, 0, -1], [0, 0, 0]], "MF")


def test_mf_removing_enemy_hurts(ate_game):
    assert aggregate(ate_game, A, {A, B, C}) == -2
    assert aggregate(ate_game, A, {A, C}) == -3


def test_mf_values_of_b(ate_game):
    assert partition_utility(ate_game, B, Partition([[A, B, C]])) == 0
    assert partition_utility(ate_game, B, Partition([[A, B], [C]])) == 1


def test_as_value_of_b(ate_game):
    as_game = Game.from_matrix(ate_game.utilities, "AS")
    assert aggregate(as_game, B, {A, B, C}) == 0


def test_singleton_is_zero(ate_game):
    for caf in ("AS", "MF"):
        g = Game.from_matrix(ate_game.utilities, caf)
        for i in range(3):
            assert aggregate(g, i, {i}) == 0


def test_aggregate_requires_membership(ate_game):
    with pytest.raises(ContractError):
        aggregate(ate_game, A, {B, C})


def test_mf_is_exact():
    g = Game.from_matrix([[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], "MF")
    value = aggregate(g, 0, {0, 1, 2, 3})
    assert value == Fraction(1, 3) and isinstance(value, Fraction)


def test_individual_rationality(ate_game):
    assert is_individually_rational(ate_game, A, {A})
    assert not is_individually_rational(ate_game, A, {A, B, C})
    triangle = Game.from_matrix([[0, 4, 1], [1, 0, 4], [4, 1, 0]], "AS")
    assert partition_utility(triangle, A, Partition([[A, B], [C]])) == 4
    assert is_individually_rational(triangle, B, {A, B})


@pytest.mark.parametrize("coalitions, n, expected", [
    ([[0, 1], [2]], 3, None),
    ([[0, 1], [1, 2]], 3, "overlap at agent 1"),
    ([[0]], 2, "agent 1 uncovered"),
    ([[0], []], 1, "empty coalition"),
    ([[0, 5]], 2, "agent 5 out of range"),
])
def test_validate_partition(coalitions, n, expected):
    assert validate_partition(coalitions, n) == expected


def test_partition_json_is_one_based():
    p = Partition([[0, 1], [2]])
    assert partition_to_json(p) == [[1, 2], [3]]
    assert partition_from_json([[1, 2], [3]], 3) == p
    with pytest.raises(ValueError, match="overlap at agent 2"):
        partition_from_json([[1, 2], [2, 3]], 3)
    with pytest.raises(ValueError, match="agent 0 out of range"):
        partition_from_json([[0, 1], [2]], 2)
    with pytest.raises(ValueError, match="agent 3 uncovered"):
        partition_from_json([[1, 2]], 3)


def test_partition_is_canonical():
    p = Partition([[2], [1, 0]])
    assert p.coalitions == (frozenset({0, 1}), frozenset({2}))
    assert p.index_of(2) == 1
    assert Partition.from_labels([5, 5, 1]) == p


def test_game_rejects_bad_matrices():
    with pytest.raises(ContractError):
        Game.from_matrix([[1, 0], [0, 0]])
    with pytest.raises(ContractError):
        Game.from_matrix([[0, 1, 2], [0, 0, 0]])
    with pytest.raises(ContractError):
        Game.from_matrix([[0, 1], [1, 0]], "XY")
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_game_json_roundtrip():
    g = Game.from_matrix([[0, Fraction(1, 2)], [-3, 0]], "MF")
    doc = game_to_json(g)
    assert doc == {"n": 2, "caf": "MF", "utilities": [[0, {"num": 1, "den": 2}], [-3, 0]]}
    assert game_from_json(doc) == g
    assert game_from_json({"n": 2, "caf": "AS", "utilities": [[0, {"num": 4, "den": 2}], [0, 0]]}).utilities[0][1] == 2


@pytest.mark.parametrize("doc", [
    {"n": 2, "caf": "AS"},
    {"n": 2, "caf": "AS", "utilities": [[1, 0], [0, 0]]},
    {"n": 2, "caf": "AS", "utilities": [[0, {"num": 1, "den": 0}], [0, 0]]},
    {"n": 2, "caf": "AS", "utilities": [[0, 0.5], [0, 0]]},
])
def test_game_json_rejects(doc):
    with pytest.raises(ValueError):
        game_from_json(doc)


def test_dynamic_state_checks_partition():
    g = Game.from_matrix([[0, 0], [0, 0]])
    with pytest.raises(ContractError):
        DynamicState.initial(g, Partition([[0]]))


rationals = st.fractions(max_denominator=50).map(as_rational)


@given(rationals)
def test_rational_json_roundtrip(value):
    assert rational_from_json(rational_to_json(value)) == value


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=n, max_size=n),
    st.sets(st.integers(0, n - 1), min_size=1),
)))
def test_mf_equals_as_over_size(args):
    n, rows, coalition = args
    for i in range(n):
        rows[i][i] = 0
    as_game, mf_game = Game.from_matrix(rows, "AS"), Game.from_matrix(rows, "MF")
    for agent in coalition:
        s = aggregate(as_game, agent, coalition)
        m = aggregate(mf_game, agent, coalition)
        if len(coalition) == 1:
            assert s == 0 and m == 0
        else:
            assert m == Fraction(s, len(coalition) - 1)
