"""Randomized falsification of axioms about how aggregation treats enemies and friends.

Every sampled instance is one agent (id 0), a coalition containing her and
integer utility vectors in ``[-10, 10]``. A returned counterexample can be
replayed through :func:`hedonic_dynamics.game.aggregate` and reproduces the
violated inequality exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from numbers import Rational

import numpy as np

from .game import CAFS, Game, aggregate, aggregate_value, rational_to_json

AXIOMS = ("ATE", "IR_ATE", "EM", "ED", "FN", "SFD")
LOW, HIGH = -10, 10


@dataclass(frozen=True)
class Counterexample:
    """A concrete violation: ``lhs <relation> rhs`` should hold but does not.

    ``left`` and ``right`` name the ``(coalition, utility vector)`` pairs whose
    aggregated values are ``lhs`` and ``rhs``.
    """

    agent: int
    n: int
    relation: str
    left: tuple
    right: tuple
    lhs: Rational
    rhs: Rational
    note: str = ""

    def to_json(self) -> dict:
        def side(pair):
            coalition, u = pair
            return {"coalition": [a + 1 for a in sorted(coalition)], "utilities": list(u)}

        return {
            "agent": self.agent + 1, "n": self.n, "relation": self.relation,
            "left": side(self.left), "right": side(self.right),
            "lhs": rational_to_json(self.lhs), "rhs": rational_to_json(self.rhs), "note": self.note,
        }


@dataclass(frozen=True)
class AxiomVerdict:
    axiom: str
    caf: str
    counterexample: Counterexample | None
    samples_tried: int
    samples_tested: int = field(default=0)

    @property
    def found(self) -> bool:
        return self.counterexample is not None

    def summary(self) -> str:
        if self.counterexample is None:
            return (f"{self.caf} {self.axiom}: no counterexample found "
                    f"({self.samples_tested} of {self.samples_tried} samples met the premise)")
        c = self.counterexample
        return (f"{self.caf} {self.axiom}: counterexample, expected {c.lhs} {c.relation} {c.rhs} "
                f"after {self.samples_tried} samples")

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom, "caf": self.caf,
            "result": "no-counterexample-found" if self.counterexample is None else "counterexample",
            "counterexample": None if self.counterexample is None else self.counterexample.to_json(),
            "samples_tried": self.samples_tried, "samples_tested": self.samples_tested,
        }


def _holds(relation: str, lhs, rhs) -> bool:
    return {"<=": lhs <= rhs, ">=": lhs >= rhs, "<": lhs < rhs, ">": lhs > rhs}[relation]


def replay(caf: str, cex: Counterexample) -> bool:
    """True iff recomputing both sides through a game reproduces the violation."""
    def value(pair):
        coalition, u = pair
        rows = [list(u)] + [[0] * cex.n for _ in range(cex.n - 1)]
        game = Game.from_matrix(rows, caf)
        return aggregate(game, cex.agent, coalition)

    lhs, rhs = value(cex.left), value(cex.right)
    return lhs == cex.lhs and rhs == cex.rhs and not _holds(cex.relation, lhs, rhs)


def _val(caf: str, coalition, u) -> Rational:
    return aggregate_value(caf, 0, coalition, (tuple(u),))


def ed_constant(u, j: int) -> int:
    """Bound on ``u(j)`` below which no coalition with ``j`` is individually rational.

    Minimizing ``-1 - sum(u(k) for k in C - {j})`` over coalitions picks
    every agent with positive utility. The same constant serves MF because
    an MF value has the sign of the corresponding sum.
    """
    return -1 - sum(max(0, int(u[k])) for k in range(1, len(u)) if k != j)


def example_seed():
    """The three-agent instance in which removing an enemy hurts under MF."""
    u = (0, -1, -3)
    return u, frozenset({0, 1, 2}), 1


class _Sampler:
    def __init__(self, rng: np.random.Generator, max_n: int):
        self.rng = rng
        self.max_n = max_n

    def n(self) -> int:
        return int(self.rng.integers(2, self.max_n + 1))

    def vector(self, n: int) -> list[int]:
        u = [int(v) for v in self.rng.integers(LOW, HIGH + 1, size=n)]
        u[0] = 0
        return u

    def coalition(self, n: int, must=()) -> frozenset:
        mask = self.rng.integers(0, 2, size=n).astype(bool)
        mask[0] = True
        for m in must:
            mask[m] = True
        return frozenset(int(a) for a in np.flatnonzero(mask))

    def negative(self) -> int:
        return int(self.rng.integers(LOW, 0))

    def positive(self) -> int:
        return int(self.rng.integers(1, HIGH + 1))


def _check_once(caf: str, axiom: str, s: _Sampler):
    """One sample: returns ``(tested, counterexample or None)``."""
    n = s.n()
    u = s.vector(n)
    if axiom in ("ATE", "IR_ATE"):
        j = int(s.rng.integers(1, n))
        u[j] = s.negative()
        C = s.coalition(n, (j,))
        return _ate(caf, axiom, u, C, j, n)
    if axiom == "EM":
        j = int(s.rng.integers(1, n))
        u[j] = s.negative()
        if u[j] == LOW:
            u[j] += 1
        v = list(u)
        v[j] = int(s.rng.integers(LOW, u[j]))
        C = s.coalition(n)
        lhs, rhs = _val(caf, C, u), _val(caf, C, v)
        if lhs >= rhs:
            return True, None
        return True, Counterexample(0, n, ">=", (C, tuple(u)), (C, tuple(v)), lhs, rhs,
                                    f"lowering u({j + 1}) improved the coalition")
    if axiom == "ED":
        j = int(s.rng.integers(1, n))
        c = ed_constant(u, j)
        v = [x - int(s.rng.integers(0, 4)) for x in u]
        v[0] = 0
        v[j] = min(v[j], c) - int(s.rng.integers(0, 4))
        others = [k for k in range(1, n) if k != j]
        for r in range(len(others) + 1):
            for extra in itertools.combinations(others, r):
                C = frozenset((0, j) + extra)
                val = _val(caf, C, v)
                if not val < 0:
                    return True, Counterexample(0, n, "<", (C, tuple(v)), (frozenset({0}), tuple(v)), val, 0,
                                                f"u({j + 1}) at or below {c} yet coalition is IR")
        return True, None
    if axiom == "FN":
        C = s.coalition(n)
        val = _val(caf, C, u)
        if not val > 0:
            return False, None
        if any(u[k] > 0 for k in C if k != 0):
            return True, None
        return True, Counterexample(0, n, "<=", (C, tuple(u)), (frozenset({0}), tuple(u)), val, 0,
                                    "positive value without a friend")
    if axiom == "SFD":
        j = int(s.rng.integers(1, n))
        C = s.coalition(n, (j,))
        for k in C:
            if k not in (0, j):
                u[k] = -int(s.rng.integers(0, HIGH + 1))
        u[j] = s.positive()
        without = C - {j}
        lhs, rhs = _val(caf, C, u), _val(caf, without, u)
        if lhs > rhs:
            return True, None
        return True, Counterexample(0, n, ">", (C, tuple(u)), (without, tuple(u)), lhs, rhs,
                                    f"single friend {j + 1} did not help")
    raise ValueError(f"unknown axiom {axiom!r}")


def _ate(caf, axiom, u, C, j, n):
    lhs = _val(caf, C, u)
    if axiom == "IR_ATE" and lhs < 0:
        return False, None
    rhs = _val(caf, C - {j}, u)
    if lhs <= rhs:
        return True, None
    return True, Counterexample(0, n, "<=", (C, tuple(u)), (C - {j}, tuple(u)), lhs, rhs,
                                f"removing enemy {j + 1} lowered the value")


def check_axiom(caf: str, axiom: str, budget: int = 10_000, seed: int = 0, max_n: int = 6,
                include_seed: bool = True) -> AxiomVerdict:
    """Search for a violation of ``axiom`` under ``caf``.

    For ATE and IR ATE the known three-agent instance is tried first unless
    ``include_seed`` is false.
    """
    caf = caf.upper()
    axiom = axiom.upper().replace("-", "_")
    if caf not in CAFS:
        raise ValueError(f"unknown aggregation {caf!r}; choose from {', '.join(CAFS)}")
    if axiom not in AXIOMS:
        raise ValueError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if max_n < 2:
        raise ValueError("max_n must be at least 2")
    tried = tested = 0
    if include_seed and axiom in ("ATE", "IR_ATE"):
        u, C, j = example_seed()
        tried += 1
        ok, cex = _ate(caf, axiom, list(u), C, j, 3)
        tested += ok
        if cex is not None:
            return AxiomVerdict(axiom, caf, cex, tried, tested)
    sampler = _Sampler(np.random.Generator(np.random.PCG64(seed)), max_n)
    while tried < budget:
        tried += 1
        ok, cex = _check_once(caf, axiom, sampler)
        tested += ok
        if cex is not None:
            return AxiomVerdict(axiom, caf, cex, tried, tested)
    return AxiomVerdict(axiom, caf, None, tried, tested)
