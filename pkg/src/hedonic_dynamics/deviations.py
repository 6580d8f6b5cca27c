"""Single-agent and group deviations: application, classification, enumeration."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Union

from .game import ContractError, DynamicState, Game, Partition

NEW = "new"


class Stability(str, enum.Enum):
    NS = "NS"
    IS = "IS"
    CNS = "CNS"
    CS = "CS"
    SCS = "SCS"

    @classmethod
    def parse(cls, text) -> "Stability":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown stability notion {text!r}; choose from "
                             + ", ".join(s.value.lower() for s in cls)) from None

    @property
    def is_group(self) -> bool:
        return self in (Stability.CS, Stability.SCS)


SINGLE_KINDS = (Stability.NS, Stability.IS, Stability.CNS)
GROUP_KINDS = (Stability.CS, Stability.SCS)


@dataclass(frozen=True)
class Single:
    """Agent ``agent`` leaves her coalition for coalition index ``target`` (or ``NEW``)."""

    agent: int
    target: Union[int, str]

    def to_json(self) -> dict:
        target = self.target if self.target == NEW else self.target + 1
        return {"type": "single", "agent": self.agent + 1, "target": target}


@dataclass(frozen=True)
class Group:
    """The agents in ``members`` leave their coalitions and form ``members``."""

    members: frozenset

    def __init__(self, members):
        object.__setattr__(self, "members", frozenset(members))

    def to_json(self) -> dict:
        return {"type": "group", "members": [m + 1 for m in sorted(self.members)]}

    def __repr__(self):
        return f"Group({sorted(self.members)})"


Deviation = Union[Single, Group]


def deviation_from_json(obj) -> Deviation:
    """Parse the 1-based deviation JSON used in trace and script files."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError(f"bad deviation {obj!r}")
    if obj["type"] == "single":
        target = obj.get("target")
        if target != NEW:
            if not isinstance(target, int) or target < 1:
                raise ValueError(f"bad deviation target {target!r}")
            target -= 1
        agent = obj.get("agent")
        if not isinstance(agent, int) or agent < 1:
            raise ValueError(f"bad deviation agent {agent!r}")
        return Single(agent - 1, target)
    if obj["type"] == "group":
        members = obj.get("members")
        if not isinstance(members, list) or not members or any(not isinstance(m, int) or m < 1 for m in members):
            raise ValueError(f"bad group members {members!r}")
        return Group(m - 1 for m in members)
    raise ValueError(f"unknown deviation type {obj['type']!r}")


def _check_well_formed(partition: Partition, deviation: Deviation) -> None:
    n = len(partition.owner)
    if isinstance(deviation, Single):
        if deviation.agent not in partition.owner:
            raise ContractError(f"agent {deviation.agent} not in partition")
        own = partition.owner[deviation.agent]
        if deviation.target == NEW:
            if len(partition.coalitions[own]) == 1:
                raise ContractError(f"agent {deviation.agent} is already alone")
        elif not isinstance(deviation.target, int) or not 0 <= deviation.target < len(partition):
            raise ContractError(f"no coalition with index {deviation.target!r}")
        elif deviation.target == own:
            raise ContractError(f"agent {deviation.agent} cannot deviate to her own coalition")
    elif isinstance(deviation, Group):
        if not deviation.members:
            raise ContractError("group deviation needs at least one member")
        if any(not 0 <= m < n for m in deviation.members):
            raise ContractError(f"group {sorted(deviation.members)} has agents outside 0..{n - 1}")
        if deviation.members in partition.coalitions:
            raise ContractError(f"group {sorted(deviation.members)} is already a coalition")
    else:
        raise ContractError(f"not a deviation: {deviation!r}")


def apply_deviation(partition: Partition, deviation: Deviation) -> Partition:
    _check_well_formed(partition, deviation)
    if isinstance(deviation, Single):
        k = deviation.agent
        own = partition.owner[k]
        out = []
        for idx, c in enumerate(partition.coalitions):
            if idx == own:
                c = c - {k}
            elif idx == deviation.target:
                c = c | {k}
            out.append(c)
        if deviation.target == NEW:
            out.append(frozenset([k]))
        return Partition(out)
    members = deviation.members
    out = [c - members for c in partition.coalitions]
    out.append(members)
    return Partition(out)


def target_coalition(partition: Partition, deviation: Single) -> frozenset:
    return frozenset() if deviation.target == NEW else partition.coalitions[deviation.target]


# --- classification -----------------------------------------------------


def _value(caf: str, row, members, size: int) -> Rational:
    total = sum((row[j] for j in members), 0)
    if caf == "AS" or size <= 1:
        return total if caf == "AS" else 0
    value = Fraction(total, size - 1) if isinstance(total, int) else total / (size - 1)
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class Margin:
    """``after - before`` for one agent affected by a deviation.

    ``role`` is ``mover``, ``joined`` or ``abandoned`` for single-agent moves,
    ``member`` for group moves and ``ir`` for the deviator's value relative to
    being alone.
    """

    agent: int
    role: str
    value: Rational


@dataclass(frozen=True)
class Classification:
    kinds: frozenset
    ir: bool
    margins: tuple = field(default=())

    def holds(self, kind: Stability, ir_only: bool = False) -> bool:
        return kind in self.kinds and (self.ir or not ir_only)

    def relevant(self, kind: Stability, ir_only: bool = False) -> list[Margin]:
        """Margins whose signs decide membership in ``kind`` (plus IR if requested)."""
        roles = {
            Stability.NS: {"mover"},
            Stability.IS: {"mover", "joined"},
            Stability.CNS: {"mover", "abandoned"},
            Stability.CS: {"member"},
            Stability.SCS: {"member"},
        }[kind]
        if ir_only:
            roles = roles | {"ir"}
        return [m for m in self.margins if m.role in roles]


def classify_deviation(game: Game, state: DynamicState, deviation: Deviation) -> Classification:
    """Deviation kinds that hold under the state's current utilities."""
    partition, u, caf = state.partition, state.utilities, game.caf
    _check_well_formed(partition, deviation)
    margins: list[Margin] = []
    if isinstance(deviation, Single):
        k = deviation.agent
        old = partition.coalition_of(k)
        target = target_coalition(partition, deviation)
        joined = target | {k}
        left = old - {k}
        after = _value(caf, u[k], joined, len(joined))
        gain = after - _value(caf, u[k], old, len(old))
        margins.append(Margin(k, "mover", gain))
        for j in sorted(target):
            margins.append(Margin(j, "joined", _value(caf, u[j], joined, len(joined)) - _value(caf, u[j], target, len(target))))
        for j in sorted(left):
            margins.append(Margin(j, "abandoned", _value(caf, u[j], left, len(left)) - _value(caf, u[j], old, len(old))))
        margins.append(Margin(k, "ir", after))
        kinds = set()
        if gain > 0:
            kinds.add(Stability.NS)
            if all(m.value >= 0 for m in margins if m.role == "joined"):
                kinds.add(Stability.IS)
            if all(m.value >= 0 for m in margins if m.role == "abandoned"):
                kinds.add(Stability.CNS)
        return Classification(frozenset(kinds), after >= 0, tuple(margins))

    members = deviation.members
    ir = True
    for i in sorted(members):
        cur = partition.coalition_of(i)
        after = _value(caf, u[i], members, len(members))
        margins.append(Margin(i, "member", after - _value(caf, u[i], cur, len(cur))))
        ir = ir and after >= 0
    for i in sorted(members):
        margins.append(Margin(i, "ir", _value(caf, u[i], members, len(members))))
    diffs = [m.value for m in margins if m.role == "member"]
    kinds = set()
    if all(d > 0 for d in diffs):
        kinds.add(Stability.CS)
    if all(d >= 0 for d in diffs) and any(d > 0 for d in diffs):
        kinds.add(Stability.SCS)
    return Classification(frozenset(kinds), ir, tuple(margins))


# --- enumeration --------------------------------------------------------


def current_values(game: Game, state: DynamicState) -> list[Rational]:
    u, p = state.utilities, state.partition
    out = []
    for i in range(game.n):
        c = p.coalition_of(i)
        out.append(_value(game.caf, u[i], c, len(c)))
    return out


def iter_single(game: Game, state: DynamicState, kind: Stability, ir_only: bool = False,
                strict_ir: bool = False) -> Iterator[Single]:
    """Yield single-agent deviations of ``kind`` in canonical order.

    Order: agent id, then target coalition index, ``NEW`` last. With
    ``strict_ir`` a move into an existing coalition must leave the mover
    strictly better off than being alone.
    """
    kind = Stability.parse(kind)
    if kind.is_group:
        raise ContractError(f"{kind.value} is a group notion")
    caf, u, p = game.caf, state.utilities, state.partition
    coalitions = p.coalitions
    # Per-coalition sums are reused by every agent considering that coalition.
    for k in range(game.n):
        row = u[k]
        own = p.owner[k]
        old = coalitions[own]
        cur = _value(caf, row, old, len(old))
        if kind is Stability.CNS and len(old) > 1:
            left = old - {k}
            if any(_value(caf, u[j], left, len(left)) < _value(caf, u[j], old, len(old)) for j in left):
                continue
        for idx, target in enumerate(coalitions):
            if idx == own:
                continue
            size = len(target) + 1
            total = sum((row[j] for j in target), 0)
            if caf == "AS":
                after = total
            else:
                after = Fraction(total, size - 1) if isinstance(total, int) else total / (size - 1)
            if not after > cur:
                continue
            if ir_only and after < 0:
                continue
            if strict_ir and not after > 0:
                continue
            if kind is Stability.IS:
                joined = target | {k}
                if any(_value(caf, u[j], joined, size) < _value(caf, u[j], target, size - 1) for j in target):
                    continue
            yield Single(k, idx)
        if len(old) > 1 and cur < 0:
            yield Single(k, NEW)


def enumerate_single(game: Game, state: DynamicState, kind, ir_only: bool = False,
                     strict_ir: bool = False) -> list[Single]:
    return list(iter_single(game, state, kind, ir_only, strict_ir))


def _group_dfs(game: Game, state: DynamicState, kind: Stability, ir_only: bool, cap: int,
               cur: list) -> Iterator[Group]:
    n, u, caf = game.n, state.utilities, game.caf
    existing = set(state.partition.coalitions)
    strict = kind is Stability.CS
    members: list[int] = []
    sums: list = []

    def ok() -> bool:
        size = len(members)
        any_strict = False
        for pos, i in enumerate(members):
            total = sums[pos]
            if caf == "AS":
                lhs, rhs = total, cur[i]
                zero_cmp = total
            elif size == 1:
                lhs, rhs = 0, cur[i]
                zero_cmp = 0
            else:
                lhs, rhs = total, cur[i] * (size - 1)
                zero_cmp = total
            if lhs > rhs:
                any_strict = True
            elif strict or lhs < rhs:
                return False
            if ir_only and zero_cmp < 0:
                return False
        return any_strict

    def extend(start: int):
        for j in range(start, n):
            row_j = u[j]
            new_sum = sum((row_j[i] for i in members), 0)
            for pos, i in enumerate(members):
                sums[pos] += u[i][j]
            members.append(j)
            sums.append(new_sum)
            if ok() and frozenset(members) not in existing:
                yield Group(members)
            if len(members) < cap:
                yield from extend(j + 1)
            members.pop()
            sums.pop()
            for pos, i in enumerate(members):
                sums[pos] -= u[i][j]

    yield from extend(0)


def iter_group(game: Game, state: DynamicState, kind, ir_only: bool = False,
               size_cap: int | None = None) -> Iterator[Group]:
    """Yield group deviations of ``kind`` in lexicographic member order."""
    kind = Stability.parse(kind)
    if not kind.is_group:
        raise ContractError(f"{kind.value} is a single-agent notion")
    cap = game.n if size_cap is None else size_cap
    if cap < 1:
        raise ValueError("size_cap must be at least 1")
    yield from _group_dfs(game, state, kind, ir_only, min(cap, game.n), current_values(game, state))


def enumerate_group(game: Game, state: DynamicState, kind, ir_only: bool = False,
                    size_cap: int | None = None) -> list[Group]:
    return list(iter_group(game, state, kind, ir_only, size_cap))


def iter_deviations(game: Game, state: DynamicState, kind, ir_only: bool = False,
                    size_cap: int | None = None, strict_ir: bool = False) -> Iterator[Deviation]:
    kind = Stability.parse(kind)
    if kind.is_group:
        return iter_group(game, state, kind, ir_only, size_cap)
    return iter_single(game, state, kind, ir_only, strict_ir)


def enumerate_deviations(game: Game, state: DynamicState, kind, ir_only: bool = False,
                         size_cap: int | None = None, strict_ir: bool = False) -> list[Deviation]:
    return list(iter_deviations(game, state, kind, ir_only, size_cap, strict_ir))


def is_stable(game: Game, state: DynamicState, kind, size_cap: int | None = None) -> bool:
    """True iff no deviation of ``kind`` exists (never IR-filtered)."""
    for _ in iter_deviations(game, state, kind, False, size_cap):
        return False
    return True
