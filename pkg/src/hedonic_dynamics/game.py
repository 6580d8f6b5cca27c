"""Cardinal hedonic games, partitions and the AS / MF aggregation functions.

Agents are the integers ``0 .. n-1``. Utility matrices are tuples of tuples
whose entries are exact rationals (``int`` or :class:`fractions.Fraction`);
no floating point value ever enters a comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

Matrix = tuple[tuple[Rational, ...], ...]

CAFS = ("AS", "MF")


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


def as_rational(value) -> Rational:
    """Coerce ``value`` to an exact rational, preferring plain ``int``.

    Accepts ints, Fractions, integral floats, numpy integers and strings such
    as ``"3/4"``. Non-integral floats are refused: they have no exact decimal
    meaning the caller could have intended.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not utilities")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, float):
        if not value.is_integer():
            raise TypeError(f"non-integral float {value!r} is not an exact utility")
        return int(value)
    if isinstance(value, str):
        return as_rational(Fraction(value))
    if hasattr(value, "__index__"):
        return int(value.__index__())
    if isinstance(value, Rational):
        return as_rational(Fraction(value.numerator, value.denominator))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def _norm(value: Rational) -> Rational:
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


def freeze_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(as_rational(v) for v in row) for row in rows)


@dataclass(frozen=True)
class Game:
    """A hedonic game ``(N, u0)`` with a fixed aggregation function.

    Parameters
    ----------
    n : int
        Number of agents.
    caf : {"AS", "MF"}
        Additively separable or modified fractional aggregation.
    utilities : Matrix
        ``utilities[i][j]`` is agent ``i``'s initial value for agent ``j``.
    """

    n: int
    caf: str
    utilities: Matrix

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("a game needs at least one agent")
        if self.caf not in CAFS:
            raise ContractError(f"unknown aggregation function {self.caf!r}")
        rows = freeze_matrix(self.utilities)
        if len(rows) != self.n or any(len(r) != self.n for r in rows):
            raise ContractError(f"utility matrix must be {self.n}x{self.n}")
        for i in range(self.n):
            if rows[i][i] != 0:
                raise ContractError(f"diagonal entry for agent {i} must be 0")
        object.__setattr__(self, "utilities", rows)

    @classmethod
    def from_matrix(cls, rows, caf: str = "AS") -> "Game":
        rows = [list(r) for r in rows]
        return cls(len(rows), caf, freeze_matrix(rows))

    def with_utilities(self, rows) -> "Game":
        return Game(self.n, self.caf, freeze_matrix(rows))


class Partition:
    """Coalition structure, stored canonically (coalitions sorted by least member).

    Coalition indices used throughout the package refer to this canonical
    order, so two equal partitions always agree on indices.
    """

    __slots__ = ("coalitions", "owner")

    def __init__(self, coalitions: Iterable[Iterable[int]]):
        cs = [frozenset(c) for c in coalitions]
        cs = tuple(sorted((c for c in cs if c), key=min))
        owner: dict[int, int] = {}
        for idx, c in enumerate(cs):
            for agent in c:
                owner[agent] = idx
        self.coalitions: tuple[frozenset[int], ...] = cs
        self.owner = owner

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls([i] for i in range(n))

    @classmethod
    def grand(cls, n: int) -> "Partition":
        return cls([range(n)])

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for agent, label in enumerate(labels):
            groups.setdefault(label, []).append(agent)
        return cls(groups.values())

    def coalition_of(self, agent: int) -> frozenset[int]:
        return self.coalitions[self.owner[agent]]

    def index_of(self, agent: int) -> int:
        return self.owner[agent]

    def labels(self) -> list[int]:
        return [self.owner[i] for i in range(len(self.owner))]

    def __len__(self):
        return len(self.coalitions)

    def __iter__(self):
        return iter(self.coalitions)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.coalitions == other.coalitions

    def __hash__(self):
        return hash(self.coalitions)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in self.coalitions)
        return f"Partition({inner})"


def validate_partition(partition: Iterable[Iterable[int]], n: int, base: int = 0) -> str | None:
    """Return ``None`` if ``partition`` is a partition of ``range(base, base + n)``.

    Otherwise return a diagnostic naming the first violated invariant, e.g.
    ``"overlap at agent 1"``. Accepts raw iterables as well as
    :class:`Partition` so it can vet untrusted input before construction.
    """
    seen: set[int] = set()
    coalitions = partition.coalitions if isinstance(partition, Partition) else partition
    for coalition in coalitions:
        members = list(coalition)
        if not members:
            return "empty coalition"
        for agent in members:
            if not isinstance(agent, int) or isinstance(agent, bool):
                return f"non-integer agent {agent!r}"
            if agent < base or agent >= base + n:
                return f"agent {agent} out of range"
            if agent in seen:
                return f"overlap at agent {agent}"
            seen.add(agent)
    for agent in range(base, base + n):
        if agent not in seen:
            return f"agent {agent} uncovered"
    return None


def check_partition(partition: Partition, n: int) -> None:
    problem = validate_partition(partition, n)
    if problem is not None:
        raise ContractError(f"invalid partition: {problem}")


def coalition_sum(agent: int, coalition: Iterable[int], utilities: Matrix) -> Rational:
    row = utilities[agent]
    return sum((row[j] for j in coalition), 0)


def aggregate_value(caf: str, agent: int, coalition, utilities: Matrix) -> Rational:
    # Hot path: no membership check. u_i(i) = 0, so summing over C includes i harmlessly.
    total = coalition_sum(agent, coalition, utilities)
    if caf == "AS":
        return _norm(total)
    size = len(coalition)
    if size <= 1:
        return 0
    return _norm(Fraction(total, size - 1)) if isinstance(total, int) else _norm(total / (size - 1))


def aggregate(game: Game, agent: int, coalition: Iterable[int], utilities: Matrix | None = None) -> Rational:
    """Value of ``coalition`` for ``agent`` under the game's aggregation function.

    AS sums the agent's utilities for the other members; MF divides that sum by
    ``|C| - 1`` and is 0 for a singleton.
    """
    coalition = frozenset(coalition)
    if agent not in coalition:
        raise ContractError(f"agent {agent} is not a member of {sorted(coalition)}")
    return aggregate_value(game.caf, agent, coalition, game.utilities if utilities is None else utilities)


def partition_utility(game: Game, agent: int, partition: Partition, utilities: Matrix | None = None) -> Rational:
    check_partition(partition, game.n)
    return aggregate(game, agent, partition.coalition_of(agent), utilities)


def is_individually_rational(game: Game, agent: int, coalition: Iterable[int], utilities: Matrix | None = None) -> bool:
    # Both AS and MF give 0 for the singleton.
    return aggregate(game, agent, coalition, utilities) >= 0


# --- JSON helpers --------------------------------------------------------


def rational_to_json(value: Rational):
    value = as_rational(value)
    if isinstance(value, int):
        return value
    return {"num": value.numerator, "den": value.denominator}


def rational_from_json(obj) -> Rational:
    if isinstance(obj, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(obj, int):
        return obj
    if isinstance(obj, dict) and set(obj) == {"num", "den"}:
        num, den = obj["num"], obj["den"]
        if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
            raise ValueError(f"bad rational {obj!r}")
        return as_rational(Fraction(num, den))
    raise ValueError(f"bad rational {obj!r}")


def matrix_to_json(rows: Matrix) -> list[list]:
    return [[rational_to_json(v) for v in row] for row in rows]


def game_to_json(game: Game) -> dict:
    return {"n": game.n, "caf": game.caf, "utilities": matrix_to_json(game.utilities)}


def game_from_json(obj: dict) -> Game:
    try:
        n = obj["n"]
        caf = obj["caf"]
        rows = obj["utilities"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"game JSON is missing field {exc}") from None
    if not isinstance(n, int) or not isinstance(rows, list):
        raise ValueError("game JSON: 'n' must be an int and 'utilities' a list")
    matrix = [[rational_from_json(v) for v in row] for row in rows]
    try:
        return Game(n, caf, freeze_matrix(matrix))
    except ContractError as exc:
        raise ValueError(f"game JSON: {exc}") from None


def partition_to_json(partition: Partition) -> list[list[int]]:
    # External files use 1-based agent ids.
    return [[a + 1 for a in sorted(c)] for c in partition.coalitions]


def partition_from_json(obj, n: int) -> Partition:
    problem = validate_partition(obj, n, base=1)
    if problem is not None:
        raise ValueError(problem)
    return Partition([[a - 1 for a in c] for c in obj])


@dataclass(frozen=True)
class DynamicState:
    """Snapshot of a dynamics: current partition, current utilities, step counter."""

    partition: Partition
    utilities: Matrix
    step: int = 0

    @classmethod
    def initial(cls, game: Game, partition: Partition | None = None) -> "DynamicState":
        partition = Partition.singletons(game.n) if partition is None else partition
        check_partition(partition, game.n)
        return cls(partition, game.utilities, 0)

    def key(self):
        return (self.partition.coalitions, self.utilities)
