"""Exact-cover instances and the coalition games built from them.

Each construction turns a restricted exact cover by 3-sets instance (every
element in exactly three of the ``3t`` triples) into an additively separable
game plus a step budget ``k``. A cover yields a witness script of length
exactly ``k`` that starts at the singleton partition and ends stable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .deviations import Deviation, Group, Single, Stability, apply_deviation
from .game import Game, Partition
from .perception import PerceptionModel

TARGETS = ("NS_IS", "CNS", "CS")
VARIANTS = ("resentful", "appreciative")


class InvalidInstance(ValueError):
    pass


@dataclass(frozen=True)
class RX3CInstance:
    t: int
    family: tuple  # tuple of sorted 3-tuples over elements 0 .. 3t-1

    @property
    def universe(self) -> range:
        return range(3 * self.t)

    def is_exact_cover(self, cover) -> bool:
        seen: list[int] = []
        for idx in cover:
            if not 0 <= idx < len(self.family):
                return False
            seen.extend(self.family[idx])
        return sorted(seen) == list(self.universe)


def rx3c_problem(t: int, family) -> str | None:
    """Diagnostic for the first violated instance condition, or ``None``."""
    if not isinstance(t, int) or t < 1:
        return "t must be a positive integer"
    family = [tuple(s) for s in family]
    if len(family) != 3 * t:
        return f"family has {len(family)} sets, expected {3 * t}"
    counts = [0] * (3 * t)
    for idx, s in enumerate(family):
        if len(s) != 3 or len(set(s)) != 3:
            return f"set {idx + 1} does not have exactly 3 distinct elements"
        for x in s:
            if not isinstance(x, int) or not 0 <= x < 3 * t:
                return f"set {idx + 1} has element {x!r} outside the universe"
            counts[x] += 1
    for x, c in enumerate(counts):
        if c != 3:
            return f"element {x + 1} occurs in {c} sets, expected 3"
    return None


def build_rx3c(t: int, family=None) -> RX3CInstance:
    """Validate an instance. ``family`` defaults to three shifted partitions of the universe."""
    if family is None:
        family = default_family(t)
    problem = rx3c_problem(t, family)
    if problem is not None:
        raise InvalidInstance(problem)
    return RX3CInstance(t, tuple(tuple(sorted(s)) for s in family))


def default_family(t: int) -> list[tuple[int, int, int]]:
    # The unshifted triples form an exact cover: sets 0 .. t-1.
    m = 3 * t
    out = []
    for shift in range(3):
        for i in range(t):
            out.append(tuple(sorted((3 * i + shift + d) % m for d in range(3))))
    return out


def find_exact_cover(instance: RX3CInstance) -> list[int] | None:
    """Exhaustive search for an exact cover (small ``t`` only)."""
    by_element: dict[int, list[int]] = {x: [] for x in instance.universe}
    for idx, s in enumerate(instance.family):
        for x in s:
            by_element[x].append(idx)

    def solve(covered: frozenset, chosen: list[int]):
        missing = next((x for x in instance.universe if x not in covered), None)
        if missing is None:
            return list(chosen)
        for idx in by_element[missing]:
            s = instance.family[idx]
            if covered.isdisjoint(s):
                found = solve(covered | set(s), chosen + [idx])
                if found is not None:
                    return found
        return None

    return solve(frozenset(), [])


@dataclass(frozen=True)
class ReductionOutput:
    game: Game
    k: int
    roles: dict  # role name -> agent id
    kinds: tuple
    model: PerceptionModel
    target: str
    variant: str
    instance: RX3CInstance

    def role_of(self, agent: int) -> str:
        for name, idx in self.roles.items():
            if idx == agent:
                return name
        raise KeyError(agent)


class _Builder:
    def __init__(self, t: int):
        self.t = t
        self.names: list[str] = []
        self.edges: dict[tuple[int, int], int] = {}

    def add(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1

    def set(self, i: int, j: int, value: int):
        self.edges[(i, j)] = value

    def game(self) -> Game:
        n = len(self.names)
        default = -1000 * self.t
        rows = [[0 if i == j else self.edges.get((i, j), default) for j in range(n)] for i in range(n)]
        return Game.from_matrix(rows, "AS")


def _base(instance: RX3CInstance, b: _Builder):
    t = instance.t
    elements = [b.add(f"x{i + 1}") for i in range(3 * t)]
    sets = [b.add(f"S{i + 1}") for i in range(3 * t)]
    fillers = [b.add(f"f{i + 1}") for i in range(2 * t)]
    return elements, sets, fillers


def reduce(instance: RX3CInstance, target: str, variant: str = "resentful") -> ReductionOutput:
    target = target.upper().replace("/", "_").replace("-", "_")
    if target == "NS" or target == "IS":
        target = "NS_IS"
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    t = instance.t
    b = _Builder(t)
    elements, sets, fillers = _base(instance, b)
    members = {s: [elements[x] for x in instance.family[i]] for i, s in enumerate(sets)}

    if target == "NS_IS":
        p = b.add("p")
        q = [[b.add(f"p{i + 1},{j + 1}") for j in range(2)] for i in range(5 * t)]
        flat_q = [a for pair in q for a in pair]
        for x in elements:
            for y in elements:
                if x != y:
                    b.set(x, y, 0)
            for s in sets:
                b.set(x, s, 1)
        for f in fillers:
            for s in sets:
                b.set(f, s, 1)
        for s in sets:
            for x in members[s]:
                b.set(s, x, 20 * t)
            for f in fillers:
                b.set(s, f, 60 * t)
            b.set(s, p, 60 * t)
            for a in flat_q:
                b.set(s, a, 0)
        for s in sets:
            b.set(p, s, 10 * t)
        for a in flat_q:
            b.set(p, a, 0)
        for i, pair in enumerate(q):
            for j, a in enumerate(pair):
                for s in sets:
                    b.set(a, s, 30 * t)
                b.set(a, p, 30 * t)
                for other in flat_q:
                    if other != a:
                        b.set(a, other, 0)
                b.set(a, pair[1 - j], 40 * t)
        roles = {"p": p, **{b.names[a]: a for a in flat_q}}
        k, kinds = 10 * t, (Stability.NS, Stability.IS)
    elif target == "CNS":
        p = [b.add(f"p{i}") for i in range(5)]
        for x in elements:
            for y in elements:
                if x != y:
                    b.set(x, y, 1)
        for s in sets:
            for x in members[s]:
                b.set(s, x, 20 * t)
            for f in fillers:
                b.set(s, f, 60 * t)
            b.set(s, p[0], 60 * t)
            b.set(s, p[1], 0)
            b.set(p[0], s, 10 * t)
        b.set(p[0], p[1], -1 if variant == "appreciative" else 0)
        b.set(p[1], p[0], 1)
        for i in (2, 3, 4):
            b.set(p[i], p[1], 200 * t)
        b.set(p[2], p[3], -100 * t)
        b.set(p[2], p[4], -400 * t)
        b.set(p[3], p[4], -100 * t)
        b.set(p[3], p[2], -400 * t)
        b.set(p[4], p[2], -100 * t)
        b.set(p[4], p[3], -400 * t)
        roles = {f"p{i}": a for i, a in enumerate(p)}
        k, kinds = 5 * t + 1, (Stability.CNS,)
    else:
        p = [b.add(f"p{i}") for i in range(7)]
        for s in sets:
            for f in fillers:
                b.set(s, f, 60 * t)
            for x in members[s]:
                b.set(s, x, 20 * t)
            b.set(s, p[0], 60 * t)
        for x in elements:
            for s in sets:
                b.set(x, s, 1)
            for y in elements:
                if x != y:
                    b.set(x, y, 0)
        for f in fillers:
            for s in sets:
                b.set(f, s, 1)
        for s in sets:
            b.set(p[0], s, 20 * t)
        b.set(p[0], p[1], 10 * t)
        b.set(p[1], p[0], 300 * t)
        for i, j in itertools.permutations((1, 3, 5), 2):
            b.set(p[i], p[j], 40 * t)
        for i in (1, 3, 5):
            b.set(p[i], p[i + 1], 60 * t)
            b.set(p[i + 1], p[i], 60 * t)
        for i in (2, 4, 6):
            j = 1 if i == 6 else i + 1
            b.set(p[i], p[j], 50 * t)
            b.set(p[j], p[i], 50 * t)
        roles = {f"p{i}": a for i, a in enumerate(p)}
        k, kinds = 3 * t + 2, (Stability.CS,)

    roles.update({b.names[a]: a for a in elements + sets + fillers})
    model = PerceptionModel("resent" if variant == "resentful" else "appreciation")
    return ReductionOutput(b.game(), k, roles, kinds, model, target, variant, instance)


def witness(output: ReductionOutput, cover) -> list[Deviation]:
    """The deviation script that a cover induces, starting from singletons.

    Raises ``ValueError`` if ``cover`` (set indices) is not an exact cover.
    """
    inst = output.instance
    cover = sorted(cover)
    if not inst.is_exact_cover(cover):
        raise ValueError(f"sets {[c + 1 for c in cover]} do not form an exact cover")
    t, r = inst.t, output.roles
    element = lambda x: r[f"x{x + 1}"]  # noqa: E731
    set_agent = lambda i: r[f"S{i + 1}"]  # noqa: E731
    others = [i for i in range(len(inst.family)) if i not in cover]
    fillers = [r[f"f{i + 1}"] for i in range(2 * t)]

    part = Partition.singletons(output.game.n)
    script: list[Deviation] = []

    def push(dev):
        nonlocal part
        script.append(dev)
        part = apply_deviation(part, dev)

    def join(mover: int, anchor: int):
        push(Single(mover, part.index_of(anchor)))

    if output.target == "NS_IS":
        for i in cover:
            for x in inst.family[i]:
                join(element(x), set_agent(i))
        for f, i in zip(fillers, others):
            join(f, set_agent(i))
        for i in range(5 * t):
            join(r[f"p{i + 1},2"], r[f"p{i + 1},1"])
    elif output.target == "CNS":
        for i in cover:
            xi, xj, xl = inst.family[i]
            join(element(xi), element(xl))
            join(element(xj), element(xl))
            join(set_agent(i), element(xl))
        for f, i in zip(fillers, others):
            join(set_agent(i), f)
        join(r["p1"], r["p0"])
    else:
        for i in cover:
            push(Group([set_agent(i)] + [element(x) for x in inst.family[i]]))
        for f, i in zip(fillers, others):
            push(Group([set_agent(i), f]))
        push(Group([r["p0"], r["p1"]]))
        push(Group([r["p3"], r["p4"], r["p5"]]))
    assert len(script) == output.k
    return script
