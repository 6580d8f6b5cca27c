"""Built-in scenarios: small games with scripted executions and known outcomes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .deviations import NEW, Deviation, Group, Single, Stability, apply_deviation
from .dynamics import CycleCertificate, FirstPolicy, Trace, certify_cycle, run
from .game import Game, Partition, game_to_json, matrix_to_json, partition_to_json
from .perception import PerceptionModel


@dataclass(frozen=True)
class Scenario:
    """A game, a dynamics, a starting partition and the scripted execution.

    ``expected`` is ``"cycle"`` (certify ``warmup`` then ``period``),
    ``"converges"`` (first-in-order policy reaches a stable state) or
    ``"diverges"`` (first-in-order policy hits the step limit).
    ``deltas`` holds the expected per-period change of every ``u_i(j)`` in
    units of the model coefficient.
    """

    name: str
    game: Game
    model: PerceptionModel
    kind: Stability
    initial: Partition
    expected: str
    names: tuple
    warmup: tuple = ()
    period: tuple = ()
    ir_only: bool = False
    deltas: tuple | None = None
    max_steps: int = 1000
    description: str = ""
    waypoints: tuple = field(default=(), compare=False)

    def agent(self, name: str) -> int:
        return self.names.index(name)

    def certify(self) -> CycleCertificate:
        return certify_cycle(self.game, self.model, self.kind, self.initial, self.warmup, self.period, self.ir_only)

    def replay(self, cycles: int = 1) -> Trace:
        """Run the scenario: a scripted replay for cycles, first-in-order otherwise."""
        from .dynamics import ScriptedPolicy

        if self.expected == "cycle":
            script = list(self.warmup) + list(self.period) * cycles
            return run(self.game, self.initial, self.kind, self.model, ScriptedPolicy(script),
                       max_steps=len(script), ir_only=self.ir_only)
        return run(self.game, self.initial, self.kind, self.model, FirstPolicy(),
                   max_steps=self.max_steps, ir_only=self.ir_only)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "game": game_to_json(self.game),
            "model": self.model.to_json(),
            "stability": self.kind.value.lower(),
            "ir": self.ir_only,
            "initial": partition_to_json(self.initial),
            "warmup": [d.to_json() for d in self.warmup],
            "period": [d.to_json() for d in self.period],
            "expected": self.expected,
            "agents": list(self.names),
            "deltas": None if self.deltas is None else matrix_to_json(self.deltas),
        }


# --- transcription helpers ---------------------------------------------


def _matrix(names, entries: dict) -> list[list[int]]:
    idx = {nm: i for i, nm in enumerate(names)}
    rows = [[0] * len(names) for _ in names]
    for (i, j), v in entries.items():
        rows[idx[i]][idx[j]] = v
    return rows


def _table(names, rows) -> list[list[int]]:
    # Rows list the off-diagonal entries in column order, skipping the agent itself.
    out = []
    for i, row in enumerate(rows):
        vals = list(row)
        vals.insert(i, 0)
        out.append(vals)
    return out


def _parse_partition(names, text: str) -> list[list[int]]:
    idx = {nm: i for i, nm in enumerate(names)}
    return [[idx[a.strip()] for a in block.split(",")] for block in text.split("|")]


def _listed_moves(names, listing) -> tuple[Partition, list[Deviation], list[Partition]]:
    """Turn ``(partition text, mover, listed target position)`` rows into a script.

    Target positions refer to the listed order of coalitions, which is
    translated into the canonical coalition index.
    """
    idx = {nm: i for i, nm in enumerate(names)}
    script, waypoints = [], []
    for text, mover, pos in listing:
        listed = _parse_partition(names, text)
        part = Partition(listed)
        waypoints.append(part)
        target = part.index_of(listed[pos - 1][0])
        script.append(Single(idx[mover], target))
    return waypoints[0], script, waypoints


def _uniform_deltas(n: int, value: int) -> tuple:
    return tuple(tuple(0 if i == j else value for j in range(n)) for i in range(n))


def _sparse_deltas(names, entries: dict) -> tuple:
    return tuple(tuple(r) for r in _matrix(names, entries))


def _group(names, *members) -> Group:
    return Group(names.index(m) for m in members)


def _join(names, partition: Partition, mover: str, anchor: str | None) -> Single:
    k = names.index(mover)
    if anchor is None:
        return Single(k, NEW)
    return Single(k, partition.index_of(names.index(anchor)))


# --- scenarios ----------------------------------------------------------

SIX = ("a", "a'", "b", "b'", "c", "c'")


def _mfhg_resent_ns() -> Scenario:
    rows = _table(SIX, [
        [20, 10, 230, 0, 230],
        [110, 30, 120, 30, 100],
        [0, 230, 20, 10, 230],
        [30, 100, 110, 30, 120],
        [10, 230, 0, 230, 20],
        [30, 120, 30, 100, 110],
    ])
    listing = [
        ("b',a' | a | c',c,b", "b", 1),
        ("b',a',b | a | c',c", "c", 1),
        ("b',a',b,c | a | c'", "a'", 3),
        ("b',b,c | a | c',a'", "a'", 2),
        ("b',b,c | a,a' | c'", "c", 2),
        ("b',b | a,a',c | c'", "b'", 3),
        ("b | a,a',c | c',b'", "c", 3),
        ("b | a,a' | c',b',c", "a", 3),
        ("b | a' | c',b',c,a", "b'", 2),
        ("b | a',b' | c',c,a", "b'", 1),
        ("b,b' | a' | c',c,a", "a", 1),
        ("b,b',a | a' | c',c", "c'", 2),
        ("b,b',a | a',c' | c", "a", 2),
        ("b,b' | a',c',a | c", "b", 2),
        ("b' | a',c',a,b | c", "c'", 1),
        ("b',c' | a',a,b | c", "c'", 3),
        ("b' | a',a,b | c,c'", "b", 3),
        ("b' | a',a | c,c',b", "a'", 1),
    ]
    start, script, waypoints = _listed_moves(SIX, listing)
    return Scenario(
        "mfhg_resent_ns", Game.from_matrix(rows, "MF"), PerceptionModel("resent"), Stability.NS,
        start, "cycle", SIX, (), tuple(script), False, _uniform_deltas(6, -1),
        description="MF game with resentful agents whose NS dynamics cycles with period 18; "
                    "every agent leaves every other agent once per period.",
        waypoints=tuple(waypoints),
    )


def _mfhg_apprec_ns() -> Scenario:
    rows = _table(SIX, [
        [110, 120, -100, 130, -100],
        [20, 100, 10, 100, 30],
        [130, -100, 110, 120, -100],
        [100, 30, 20, 100, 10],
        [120, -100, 130, -100, 110],
        [100, 10, 100, 30, 20],
    ])
    listing = [
        ("b' | a,a' | b,c,c'", "b", 2),
        ("b' | b,a,a' | c,c'", "c'", 1),
        ("b',c' | b,a,a' | c", "c'", 2),
        ("b' | b,a,a',c' | c", "b", 1),
        ("b',b | a,a',c' | c", "a", 1),
        ("b',b,a | a',c' | c", "c'", 3),
        ("b',b,a | a' | c,c'", "a", 3),
        ("b',b | a' | c,c',a", "b'", 2),
        ("b | a',b' | c,c',a", "b'", 3),
        ("b | a' | c,c',a,b'", "a", 2),
        ("b | a',a | c,c',b'", "c", 2),
        ("b | a',a,c | c',b'", "b'", 1),
        ("b,b' | a',a,c | c'", "c", 1),
        ("b,b',c | a',a | c'", "a'", 3),
        ("b,b',c | a | c',a'", "a'", 1),
        ("b,b',c,a' | a | c'", "c", 3),
        ("b,b',a' | a | c',c", "b", 3),
        ("b',a' | a | c',c,b", "a'", 2),
    ]
    start, script, waypoints = _listed_moves(SIX, listing)
    return Scenario(
        "mfhg_apprec_ns", Game.from_matrix(rows, "MF"), PerceptionModel("appreciation"), Stability.NS,
        start, "cycle", SIX, (), tuple(script), True, _uniform_deltas(6, 1),
        description="MF game with appreciative agents whose individually rational NS dynamics "
                    "cycles with period 18; every agent joins every other agent once per period.",
        waypoints=tuple(waypoints),
    )


def _core_apprec_3cycle() -> Scenario:
    names = ("a", "b", "c")
    rows = _matrix(names, {("a", "b"): 4, ("b", "c"): 4, ("c", "a"): 4,
                           ("a", "c"): 1, ("b", "a"): 1, ("c", "b"): 1})
    g = lambda *m: _group(names, *m)  # noqa: E731
    return Scenario(
        "core_apprec_3cycle", Game.from_matrix(rows, "AS"), PerceptionModel("appreciation"), Stability.CS,
        Partition.singletons(3), "cycle", names, (g("a", "b"),), (g("b", "c"), g("a", "c"), g("a", "b")),
        True, _uniform_deltas(3, 1),
        description="Three appreciative agents whose individually rational CS dynamics cycles "
                    "through the three pairs.",
    )


def _devresent_cns_ir_3cycle() -> Scenario:
    names = ("a", "b", "c")
    rows = _matrix(names, {("b", "a"): -1, ("c", "b"): -1, ("a", "c"): -1})
    start = Partition([[0, 1], [2]])
    p1 = Partition([[0], [1, 2]])
    p2 = Partition([[0, 2], [1]])
    period = (
        _join(names, start, "b", "c"),
        _join(names, p1, "c", "a"),
        _join(names, p2, "a", "b"),
    )
    return Scenario(
        "devresent_cns_ir_3cycle", Game.from_matrix(rows, "AS"), PerceptionModel("deviator-resent"),
        Stability.CNS, start, "cycle", names, (), period, True,
        _sparse_deltas(names, {("b", "a"): -1, ("c", "b"): -1, ("a", "c"): -1}),
        description="Deviator-resentful triangle with an individually rational CNS cycle of length 3.",
    )


def _devresent_ns_runchase() -> Scenario:
    names = ("a", "b")
    rows = _matrix(names, {("a", "b"): 1, ("b", "a"): -1})
    start = Partition.singletons(2)
    return Scenario(
        "devresent_ns_runchase", Game.from_matrix(rows, "AS"), PerceptionModel("deviator-resent"),
        Stability.NS, start, "cycle", names, (), (Single(0, 1), Single(1, NEW)), False,
        _sparse_deltas(names, {("b", "a"): -1}),
        description="a keeps joining b and b keeps leaving; deviator-resent only makes b "
                    "dislike a more.",
    )


GREEK = ("a", "b", "c", "alpha", "beta", "gamma")


def _greek_game() -> Game:
    rows = _matrix(GREEK, {
        ("a", "b"): 7, ("b", "c"): 7, ("c", "a"): 7,
        ("b", "a"): 3, ("c", "b"): 3, ("a", "c"): 3,
        ("b", "alpha"): 3, ("c", "beta"): 3, ("a", "gamma"): 3,
        ("b", "beta"): 1, ("c", "gamma"): 1, ("a", "alpha"): 1,
        ("alpha", "a"): 1, ("alpha", "b"): 1,
        ("beta", "b"): 1, ("beta", "c"): 1,
        ("gamma", "a"): 1, ("gamma", "c"): 1,
    })
    return Game.from_matrix(rows, "MF")


_GREEK_DELTAS = _sparse_deltas(GREEK, {
    ("b", "a"): -1, ("c", "b"): -1, ("a", "c"): -1,
    ("b", "alpha"): -1, ("b", "beta"): -1,
    ("c", "beta"): -1, ("c", "gamma"): -1,
    ("a", "gamma"): -1, ("a", "alpha"): -1,
})


def _greek_start() -> Partition:
    return Partition(_parse_partition(GREEK, "alpha,a,b | beta | gamma,c"))


def _devresent_scs(singleton_start: bool) -> Scenario:
    g = lambda *m: _group(GREEK, *m)  # noqa: E731
    period = (g("beta", "b", "c"), g("gamma", "a", "c"), g("alpha", "a", "b"))
    if singleton_start:
        initial, warmup = Partition.singletons(6), (g("alpha", "a", "b"), g("gamma", "c"))
        name = "devresent_mfhg_scs_3cycle_singletons"
    else:
        initial, warmup = _greek_start(), ()
        name = "devresent_mfhg_scs_3cycle"
    return Scenario(
        name, _greek_game(), PerceptionModel("deviator-resent"), Stability.SCS, initial, "cycle", GREEK,
        warmup, period, False, _GREEK_DELTAS,
        description="MF game with deviator-resentful agents and a (strict) core cycle of length 3.",
    )


def _devresent_is(singleton_start: bool) -> Scenario:
    p = [_greek_start()]
    moves = [("c", "beta"), ("b", "beta"), ("a", "gamma"), ("c", "gamma"), ("b", "alpha"), ("a", "alpha")]
    period = []
    for mover, anchor in moves:
        dev = _join(GREEK, p[-1], mover, anchor)
        period.append(dev)
        p.append(apply_deviation(p[-1], dev))
    if singleton_start:
        s0 = Partition.singletons(6)
        w1 = _join(GREEK, s0, "a", "alpha")
        s1 = apply_deviation(s0, w1)
        w2 = _join(GREEK, s1, "b", "alpha")
        s2 = apply_deviation(s1, w2)
        w3 = _join(GREEK, s2, "c", "gamma")
        initial, warmup = s0, (w1, w2, w3)
        name = "devresent_mfhg_is_6cycle_singletons"
    else:
        initial, warmup = p[0], ()
        name = "devresent_mfhg_is_6cycle"
    return Scenario(
        name, _greek_game(), PerceptionModel("deviator-resent"), Stability.IS, initial, "cycle", GREEK,
        warmup, tuple(period), False, _GREEK_DELTAS,
        description="MF game with deviator-resentful agents and an IS cycle of length 6.",
    )


def _run_and_chase() -> Scenario:
    names = ("alice", "bob")
    rows = _matrix(names, {("bob", "alice"): 1, ("alice", "bob"): -1})
    return Scenario(
        "run_and_chase", Game.from_matrix(rows, "AS"), PerceptionModel("resent"), Stability.NS,
        Partition.singletons(2), "converges", names, max_steps=10,
        description="Bob likes Alice, Alice dislikes Bob; with resent Bob gives up after one chase.",
    )


def _run_and_chase_classical() -> Scenario:
    names = ("alice", "bob")
    rows = _matrix(names, {("bob", "alice"): 1, ("alice", "bob"): -1})
    return Scenario(
        "run_and_chase_classical", Game.from_matrix(rows, "AS"), PerceptionModel("none"), Stability.NS,
        Partition.singletons(2), "diverges", names, max_steps=1000,
        description="The same pair without perception changes chases forever.",
    )


def _mf_violates_ate() -> Scenario:
    names = ("a", "b", "c")
    rows = _matrix(names, {("a", "b"): -1, ("a", "c"): -3, ("b", "a"): 1, ("b", "c"): -1})
    return Scenario(
        "mf_violates_ate", Game.from_matrix(rows, "MF"), PerceptionModel("none"), Stability.NS,
        Partition.grand(3), "diverges", names, max_steps=100,
        description="Removing an enemy from a coalition can hurt under MF: a values the grand "
                    "coalition at -2 but {a,c} at -3.",
    )


_BUILDERS: dict[str, Callable[[], Scenario]] = {
    "run_and_chase": _run_and_chase,
    "run_and_chase_classical": _run_and_chase_classical,
    "mf_violates_ate": _mf_violates_ate,
    "mfhg_resent_ns": _mfhg_resent_ns,
    "core_apprec_3cycle": _core_apprec_3cycle,
    "mfhg_apprec_ns": _mfhg_apprec_ns,
    "devresent_ns_runchase": _devresent_ns_runchase,
    "devresent_cns_ir_3cycle": _devresent_cns_ir_3cycle,
    "devresent_mfhg_scs_3cycle": lambda: _devresent_scs(False),
    "devresent_mfhg_scs_3cycle_singletons": lambda: _devresent_scs(True),
    "devresent_mfhg_is_6cycle": lambda: _devresent_is(False),
    "devresent_mfhg_is_6cycle_singletons": lambda: _devresent_is(True),
}

NAMES = tuple(_BUILDERS)
CYCLES = tuple(n for n in NAMES if n not in ("run_and_chase", "run_and_chase_classical", "mf_violates_ate"))


class UnknownScenario(KeyError):
    def __str__(self):
        return self.args[0]


def builtin(name: str) -> Scenario:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise UnknownScenario(f"unknown example {name!r}; available: {', '.join(NAMES)}") from None
