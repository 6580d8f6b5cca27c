import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_game
from hedonic_dynamics import scenarios
from hedonic_dynamics.deviations import (
    NEW,
    Group,
    Single,
    Stability,
    apply_deviation,
    classify_deviation,
    deviation_from_json,
    enumerate_deviations,
    enumerate_group,
    enumerate_single,
    is_stable,
)
from hedonic_dynamics.game import ContractError, DynamicState, Game, Partition, aggregate


def state_of(game, coalitions=None):
    return DynamicState.initial(game, None if coalitions is None else Partition(coalitions))


# --- apply ---------------------------------------------------------------


def test_apply_join():
    assert apply_deviation(Partition([[0], [1]]), Single(1, 0)) == Partition([[0, 1]])


def test_apply_listed_move():
    sc = scenarios.builtin("mfhg_resent_ns")
    a = sc.agent
    before = Partition([[a("b'"), a("a'")], [a("a")], [a("c'"), a("c"), a("b")]])
    after = apply_deviation(before, Single(a("b"), before.index_of(a("b'"))))
    assert after == Partition([[a("b'"), a("a'"), a("b")], [a("a")], [a("c'"), a("c")]])


def test_apply_group():
    assert apply_deviation(Partition.singletons(3), Group({0, 1})) == Partition([[0, 1], [2]])
    assert apply_deviation(Partition([[0, 1, 2], [3]]), Group({1, 3})) == Partition([[0, 2], [1, 3]])


@pytest.mark.parametrize("partition, dev", [
    (Partition.singletons(2), Single(0, NEW)),
    (Partition([[0, 1]]), Single(0, 0)),
    (Partition.singletons(2), Single(0, 5)),
    (Partition([[0, 1], [2]]), Group({0, 1})),
    (Partition.singletons(2), Group({0, 4})),
])
def test_apply_rejects_malformed(partition, dev):
    with pytest.raises(ContractError):
        apply_deviation(partition, dev)


def test_deviation_json_roundtrip():
    for dev in (Single(0, 2), Single(3, NEW), Group({0, 4})):
        assert deviation_from_json(dev.to_json()) == dev
    assert Single(0, NEW).to_json() == {"type": "single", "agent": 1, "target": "new"}
    with pytest.raises(ValueError):
        deviation_from_json({"type": "single", "agent": 0, "target": 1})


# --- classification ------------------------------------------------------


def test_run_and_chase_join_is_not_individually_stable(run_and_chase):
    cls = classify_deviation(run_and_chase, state_of(run_and_chase), Single(1, 0))
    assert cls.kinds == {Stability.NS, Stability.CNS}
    assert Stability.IS not in cls.kinds
    assert cls.ir


def test_triangle_pair_is_core_deviation():
    g = Game.from_matrix([[0, 4, 1], [1, 0, 4], [4, 1, 0]], "AS")
    cls = classify_deviation(g, state_of(g), Group({0, 1}))
    assert cls.kinds == {Stability.CS, Stability.SCS}
    assert cls.ir


def test_leaving_an_enemy_for_a_neutral_coalition():
    # b leaves {a, b} for {c}: u_b(a) = -1, u_b(c) = 0, u_a(b) = 0, u_c(b) = 0
    g = Game.from_matrix([[0, 0, 0], [-1, 0, 0], [0, 0, 0]], "AS")
    cls = classify_deviation(g, state_of(g, [[0, 1], [2]]), Single(1, 1))
    assert cls.kinds == {Stability.NS, Stability.CNS, Stability.IS}
    assert cls.ir


def test_scs_without_cs():
    g = Game.from_matrix([[0, 1], [0, 0]], "AS")
    cls = classify_deviation(g, state_of(g), Group({0, 1}))
    assert cls.kinds == {Stability.SCS}


def test_ir_flag_for_negative_join():
    g = Game.from_matrix([[0, -1, -5], [0, 0, 0], [0, 0, 0]], "AS")
    cls = classify_deviation(g, state_of(g, [[0, 2], [1]]), Single(0, 1))
    assert Stability.NS in cls.kinds and not cls.ir


# --- enumeration ---------------------------------------------------------


def test_run_and_chase_enumeration(run_and_chase):
    assert enumerate_single(run_and_chase, state_of(run_and_chase), Stability.NS) == [Single(1, 0)]


def test_listed_state_offers_listed_move():
    sc = scenarios.builtin("mfhg_resent_ns")
    state = DynamicState.initial(sc.game, sc.initial)
    move = Single(sc.agent("b"), sc.initial.index_of(sc.agent("b'")))
    assert move in enumerate_single(sc.game, state, Stability.NS)
    assert not is_stable(sc.game, state, Stability.NS)


def test_triangle_group_enumeration():
    g = Game.from_matrix([[0, 4, 1], [1, 0, 4], [4, 1, 0]], "AS")
    found = enumerate_group(g, state_of(g), Stability.CS)
    for pair in ({0, 1}, {1, 2}, {0, 2}):
        assert Group(pair) in found


def test_enumeration_order_and_new_last():
    g = Game.from_matrix([[0, -3, 1, 2], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], "AS")
    devs = enumerate_single(g, state_of(g, [[0, 1], [2], [3]]), Stability.NS)
    assert devs == [Single(0, 1), Single(0, 2), Single(0, NEW)]


def test_stable_singletons_with_negative_utilities():
    g = Game.from_matrix([[0, -1, -2], [-3, 0, -1], [-1, -1, 0]], "MF")
    state = state_of(g)
    for kind in Stability:
        assert enumerate_deviations(g, state, kind) == []
        assert is_stable(g, state, kind)


def test_group_size_cap_validation():
    g = Game.from_matrix([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        enumerate_group(g, state_of(g), Stability.CS, size_cap=0)
    assert enumerate_group(g, state_of(g), Stability.CS, size_cap=1) == []


def test_single_kind_rejects_group_enumeration():
    g = Game.from_matrix([[0, 1], [1, 0]])
    with pytest.raises(ContractError):
        enumerate_single(g, state_of(g), Stability.CS)


def test_strict_ir_excludes_zero_value_joins():
    g = Game.from_matrix([[0, 0, -2], [0, 0, 0], [0, 0, 0]], "AS")
    state = state_of(g, [[0, 2], [1]])
    assert Single(0, 1) in enumerate_single(g, state, Stability.NS)
    assert Single(0, 1) not in enumerate_single(g, state, Stability.NS, strict_ir=True)
    assert Single(0, NEW) in enumerate_single(g, state, Stability.NS, strict_ir=True)


# --- independent oracle ---------------------------------------------------


def naive_single(game, state, kind, ir_only):
    """Direct transcription of the single-agent definitions via ``aggregate``."""
    p, u = state.partition, state.utilities
    out = []
    for k in range(game.n):
        old = p.coalition_of(k)
        targets = list(range(len(p))) + [NEW]
        for t in targets:
            if t == p.index_of(k) or (t == NEW and len(old) == 1):
                continue
            target = frozenset() if t == NEW else p.coalitions[t]
            new = target | {k}
            ok = aggregate(game, k, new, u) > aggregate(game, k, old, u)
            if kind == "IS":
                ok = ok and all(aggregate(game, j, new, u) >= aggregate(game, j, target, u) for j in target)
            if kind == "CNS":
                ok = ok and all(aggregate(game, j, old - {k}, u) >= aggregate(game, j, old, u) for j in old - {k})
            if ir_only:
                ok = ok and aggregate(game, k, new, u) >= 0
            if ok:
                out.append(Single(k, t))
    return out


def naive_group(game, state, kind, ir_only):
    p, u = state.partition, state.utilities
    out = []
    for r in range(1, game.n + 1):
        for members in itertools.combinations(range(game.n), r):
            C = frozenset(members)
            if C in p.coalitions:
                continue
            diffs = [aggregate(game, i, C, u) - aggregate(game, i, p.coalition_of(i), u) for i in C]
            ok = all(d > 0 for d in diffs) if kind == "CS" else (all(d >= 0 for d in diffs) and any(d > 0 for d in diffs))
            if ir_only:
                ok = ok and all(aggregate(game, i, C, u) >= 0 for i in C)
            if ok:
                out.append(Group(C))
    return out


@given(st.integers(0, 10**6), st.integers(1, 5), st.sampled_from(["AS", "MF"]),
       st.lists(st.integers(0, 4), min_size=5, max_size=5), st.booleans())
def test_single_enumeration_matches_oracle(seed, n, caf, labels, ir_only):
    game = random_game(seed, n, caf)
    state = DynamicState.initial(game, Partition.from_labels(labels[:n]))
    for kind in ("NS", "IS", "CNS"):
        assert enumerate_single(game, state, kind, ir_only) == naive_single(game, state, kind, ir_only)


@given(st.integers(0, 10**6), st.integers(1, 5), st.sampled_from(["AS", "MF"]),
       st.lists(st.integers(0, 4), min_size=5, max_size=5), st.booleans())
def test_group_enumeration_matches_oracle(seed, n, caf, labels, ir_only):
    game = random_game(seed, n, caf)
    state = DynamicState.initial(game, Partition.from_labels(labels[:n]))
    for kind in ("CS", "SCS"):
        got = enumerate_group(game, state, kind, ir_only)
        want = naive_group(game, state, kind, ir_only)
        assert sorted(got, key=lambda g: sorted(g.members)) == sorted(want, key=lambda g: sorted(g.members))
        assert len(set(got)) == len(got)


@given(st.integers(0, 10**6), st.integers(1, 5), st.sampled_from(["AS", "MF"]),
       st.lists(st.integers(0, 4), min_size=5, max_size=5))
def test_enumerated_moves_classify_as_their_kind(seed, n, caf, labels):
    game = random_game(seed, n, caf)
    state = DynamicState.initial(game, Partition.from_labels(labels[:n]))
    for kind in Stability:
        for dev in enumerate_deviations(game, state, kind, ir_only=True):
            assert classify_deviation(game, state, dev).holds(kind, ir_only=True)


@given(st.integers(0, 10**6), st.integers(1, 5), st.sampled_from(["AS", "MF"]),
       st.lists(st.integers(0, 4), min_size=5, max_size=5))
def test_single_deviation_implies_ir_deviation(seed, n, caf, labels):
    game = random_game(seed, n, caf)
    state = DynamicState.initial(game, Partition.from_labels(labels[:n]))
    for kind in ("NS", "IS", "CNS"):
        if enumerate_single(game, state, kind):
            assert enumerate_single(game, state, kind, ir_only=True)


def test_group_ir_fallback_where_it_holds():
    # Someone strictly prefers being alone, so an IR group deviation (the singleton) exists.
    g = Game.from_matrix([[0, -2, 1], [3, 0, 1], [1, 1, 0]], "AS")
    state = state_of(g, [[0, 1, 2]])
    assert enumerate_group(g, state, "SCS")
    assert enumerate_group(g, state, "SCS", ir_only=True)
