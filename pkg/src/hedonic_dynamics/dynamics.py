"""Running dynamics, certifying periodic executions and searching short sequences."""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .deviations import (
    NEW,
    Classification,
    Deviation,
    Group,
    Margin,
    Single,
    Stability,
    apply_deviation,
    classify_deviation,
    enumerate_deviations,
    is_stable,
)
from .game import ContractError, DynamicState, Game, Matrix, Partition, _norm, matrix_to_json
from .perception import PerceptionModel, update_utilities


class DeviationRejected(ValueError):
    """A proposed move is not a deviation of the requested kind.

    ``margins`` holds the inequality margins that failed (``after - before``).
    """

    def __init__(self, message: str, deviation=None, margins: Sequence[Margin] = ()):
        super().__init__(message)
        self.deviation = deviation
        self.margins = tuple(margins)


class ScriptError(ValueError):
    """A scripted step was rejected; ``index`` is its 0-based position."""

    def __init__(self, index: int, reason: Exception):
        super().__init__(f"script step {index}: {reason}")
        self.index = index
        self.reason = reason


class CertificationError(ValueError):
    """A cycle certificate could not be established."""


class SearchLimitExceeded(RuntimeError):
    """Breadth-first search visited more states than allowed."""


def utility_digest(utilities: Matrix) -> str:
    payload = json.dumps(matrix_to_json(utilities), separators=(",", ":")).encode()
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


def _failed(classification: Classification, kind: Stability, ir_only: bool, strict_ir: bool) -> list[Margin]:
    bad = []
    for m in classification.relevant(kind, ir_only or strict_ir):
        if m.role == "ir":
            if m.value < 0 or (strict_ir and m.value <= 0):
                bad.append(m)
        elif m.role == "mover" or (m.role == "member" and kind is Stability.CS):
            if m.value <= 0:
                bad.append(m)
        elif m.value < 0:
            bad.append(m)
    return bad


def _strict_ir_applies(partition: Partition, deviation: Deviation) -> bool:
    return isinstance(deviation, Single) and deviation.target != NEW


def check_step(game: Game, state: DynamicState, deviation: Deviation, kind, ir_only: bool = False,
               strict_ir: bool = False) -> Classification:
    """Classify ``deviation`` and raise :class:`DeviationRejected` unless it has ``kind``."""
    kind = Stability.parse(kind)
    if kind.is_group != isinstance(deviation, Group):
        shape = "group" if isinstance(deviation, Group) else "single-agent"
        raise DeviationRejected(f"a {shape} move cannot be a {kind.value} deviation", deviation)
    try:
        cls = classify_deviation(game, state, deviation)
    except ContractError as exc:
        raise DeviationRejected(str(exc), deviation) from None
    strict = strict_ir and _strict_ir_applies(state.partition, deviation)
    ok = kind in cls.kinds and (cls.ir or not ir_only)
    if ok and strict:
        ok = all(m.value > 0 for m in cls.margins if m.role == "ir")
    if not ok:
        bad = _failed(cls, kind, ir_only, strict)
        detail = ", ".join(f"{m.role} {m.agent}: {m.value}" for m in bad) or "no strict improvement"
        raise DeviationRejected(f"not an{' IR' if ir_only else ''} {kind.value} deviation ({detail})", deviation, bad)
    return cls


def step(game: Game, state: DynamicState, deviation: Deviation, model: PerceptionModel, kind,
         ir_only: bool = False, strict_ir: bool = False) -> DynamicState:
    """Validate, apply and perceive one deviation."""
    check_step(game, state, deviation, kind, ir_only, strict_ir)
    return _advance(state, deviation, model)


def _advance(state: DynamicState, deviation: Deviation, model: PerceptionModel) -> DynamicState:
    after = apply_deviation(state.partition, deviation)
    utilities = update_utilities(state.utilities, state.partition, deviation, model)
    return DynamicState(after, utilities, state.step + 1)


# --- policies -----------------------------------------------------------


class FirstPolicy:
    """Always pick the first deviation in canonical enumeration order."""

    name = "first"

    def choose(self, options: list):
        return options[0]


class RandomPolicy:
    """Uniform choice among the enumerated deviations.

    Accepts a seed or an existing :class:`numpy.random.Generator`. Seeds map
    to ``Generator(PCG64(seed))`` so runs are reproducible given the
    enumeration order.
    """

    name = "random"

    def __init__(self, seed=None):
        if isinstance(seed, np.random.Generator):
            self.rng = seed
        else:
            self.rng = np.random.Generator(np.random.PCG64(seed))

    def choose(self, options: list):
        return options[int(self.rng.integers(len(options)))]


class ScriptedPolicy:
    """Replay a fixed list of deviations."""

    name = "scripted"

    def __init__(self, script: Iterable[Deviation]):
        self.script = list(script)


Policy = Union[FirstPolicy, RandomPolicy, ScriptedPolicy]


# --- traces -------------------------------------------------------------


@dataclass(frozen=True)
class Record:
    t: int
    deviation: Deviation
    kinds: frozenset
    ir: bool
    digest: str

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "deviation": self.deviation.to_json(),
            "kinds": sorted(k.value for k in self.kinds),
            "ir": self.ir,
            "utility_digest": self.digest,
        }


@dataclass(frozen=True)
class Converged:
    state: DynamicState
    name = "converged"


@dataclass(frozen=True)
class StepLimit:
    state: DynamicState
    name = "step-limit"


@dataclass(frozen=True)
class ScriptEnd:
    """The script ran out before a stable state was reached."""

    state: DynamicState
    name = "script-end"


@dataclass(frozen=True)
class CycleCertified:
    certificate: "CycleCertificate"
    name = "cycle-certified"

    @property
    def state(self) -> DynamicState:
        return self.certificate.end_state


Outcome = Union[Converged, StepLimit, ScriptEnd, CycleCertified]


@dataclass
class Trace:
    game: Game
    model: PerceptionModel
    kind: Stability
    ir_only: bool
    initial: DynamicState
    records: list = field(default_factory=list)
    outcome: Outcome | None = None

    @property
    def final_state(self) -> DynamicState:
        return self.outcome.state

    @property
    def steps(self) -> int:
        return self.final_state.step - self.initial.step

    def script(self) -> list[Deviation]:
        return [r.deviation for r in self.records]

    def outcome_json(self) -> dict:
        from .game import partition_to_json

        state = self.final_state
        return {
            "outcome": self.outcome.name,
            "steps": self.steps,
            "partition": partition_to_json(state.partition),
            "utility_digest": utility_digest(state.utilities),
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_json(), sort_keys=True) for r in self.records]
        lines.append(json.dumps(self.outcome_json(), sort_keys=True))
        return "\n".join(lines) + "\n"


def run(game: Game, initial: Partition | DynamicState | None = None, kind="NS",
        model: PerceptionModel | None = None, policy: Policy | None = None, max_steps: int = 100000,
        size_cap: int | None = None, ir_only: bool = False, strict_ir: bool = False,
        record: bool = True) -> Trace:
    """Execute a dynamics until stability, the end of a script or ``max_steps``.

    Under a scripted policy stability is only tested once the script is
    exhausted, so a script may pass through stable states.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    kind = Stability.parse(kind)
    model = PerceptionModel() if model is None else model
    policy = FirstPolicy() if policy is None else policy
    state = initial if isinstance(initial, DynamicState) else DynamicState.initial(game, initial)
    trace = Trace(game, model, kind, ir_only, state)
    scripted = isinstance(policy, ScriptedPolicy)
    taken = 0
    while True:
        if scripted:
            if taken == len(policy.script):
                stable = is_stable(game, state, kind, size_cap)
                trace.outcome = Converged(state) if stable else ScriptEnd(state)
                return trace
            if taken >= max_steps:
                trace.outcome = StepLimit(state)
                return trace
            deviation = policy.script[taken]
            try:
                cls = check_step(game, state, deviation, kind, ir_only, strict_ir)
            except DeviationRejected as exc:
                raise ScriptError(taken, exc) from None
        else:
            options = enumerate_deviations(game, state, kind, ir_only, size_cap, strict_ir)
            if not options:
                trace.outcome = Converged(state)
                return trace
            if taken >= max_steps:
                trace.outcome = StepLimit(state)
                return trace
            deviation = policy.choose(options)
            cls = classify_deviation(game, state, deviation) if record else None
        state = _advance(state, deviation, model)
        taken += 1
        if record:
            trace.records.append(Record(state.step, deviation, cls.kinds, cls.ir, utility_digest(state.utilities)))


# --- cycle certification -----------------------------------------------


@dataclass(frozen=True)
class CycleCertificate:
    """Finite evidence that a scripted periodic execution runs forever.

    ``margin_evidence[l]`` pairs the relevant inequality margins of period
    step ``l`` in the first and second validated period. Margins never
    decrease from one period to the next and the per-period utility change
    ``pair_deltas`` is constant, so every margin is an affine non-decreasing
    function of the period count and every inequality keeps holding.
    """

    t0: int
    p: int
    script: tuple
    pair_deltas: Matrix
    margin_evidence: tuple
    start_state: DynamicState
    end_state: DynamicState

    @property
    def stationary(self) -> bool:
        """True when every margin is identical in both validated periods."""
        return all(a == b for first, second in self.margin_evidence for a, b in zip(first, second))

    def to_json(self) -> dict:
        from .game import partition_to_json, rational_to_json

        return {
            "t0": self.t0,
            "p": self.p,
            "script": [d.to_json() for d in self.script],
            "pair_deltas": matrix_to_json(self.pair_deltas),
            "partition": partition_to_json(self.start_state.partition),
            "stationary_margins": self.stationary,
            "margins": [
                [[{"agent": m.agent + 1, "role": m.role, "value": rational_to_json(m.value)} for m in cyc]
                 for cyc in pair]
                for pair in self.margin_evidence
            ],
        }


def _matrix_diff(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(_norm(x - y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def certify_cycle(game: Game, model: PerceptionModel, kind, initial: Partition | None,
                  warmup_script: Sequence[Deviation], period_script: Sequence[Deviation],
                  ir_only: bool = False, strict_ir: bool = False) -> CycleCertificate:
    """Validate a warmup and two periods of a scripted execution.

    Raises :class:`CertificationError` naming the first failed check.
    """
    kind = Stability.parse(kind)
    period = list(period_script)
    if not period:
        raise CertificationError("period script is empty")
    state = DynamicState.initial(game, initial)
    for idx, dev in enumerate(warmup_script):
        try:
            state = step(game, state, dev, model, kind, ir_only, strict_ir)
        except DeviationRejected as exc:
            raise CertificationError(f"warmup step {idx} invalid: {exc}") from None
    t0 = state.step
    start = state
    partitions: list[list[Partition]] = [[], []]
    margins: list[list[tuple]] = [[], []]
    ends = []
    for cycle in range(2):
        for idx, dev in enumerate(period):
            partitions[cycle].append(state.partition)
            try:
                cls = check_step(game, state, dev, kind, ir_only, strict_ir)
            except DeviationRejected as exc:
                raise CertificationError(f"period {cycle + 1} step {idx} invalid: {exc}") from None
            margins[cycle].append(tuple(cls.relevant(kind, ir_only or strict_ir)))
            state = _advance(state, dev, model)
        ends.append(state)
    for idx in range(len(period)):
        if partitions[0][idx] != partitions[1][idx]:
            raise CertificationError(f"partition mismatch at period step {idx}")
    deltas = _matrix_diff(ends[0].utilities, start.utilities)
    if _matrix_diff(ends[1].utilities, ends[0].utilities) != deltas:
        raise CertificationError("per-period utility change is not constant")
    for idx, (first, second) in enumerate(zip(margins[0], margins[1])):
        for a, b in zip(first, second):
            if b.value < a.value:
                raise CertificationError(
                    f"margin drift at period step {idx}: {a.role} {a.agent} went {a.value} -> {b.value}")
    evidence = tuple(zip(margins[0], margins[1]))
    return CycleCertificate(t0, len(period), tuple(period), deltas, evidence, start, ends[0])


def reverse_periodic(game: Game, model: PerceptionModel, kind, initial: Partition | None,
                     warmup_script: Sequence[Deviation], period_script: Sequence[Deviation],
                     ir_only: bool = False):
    """Turn a certified single-agent resent cycle into an appreciation cycle (or back).

    Returns ``(game, model, initial_partition, period_script)``. The new game
    starts from the negated utilities reached after the warmup, and its
    period visits the original period's partitions in reverse order.
    """
    if model.tag not in ("resent", "appreciation"):
        raise ValueError("reversal maps between resent and appreciation only")
    try:
        cert = certify_cycle(game, model, kind, initial, warmup_script, period_script, ir_only)
    except CertificationError as exc:
        raise CertificationError(f"input does not certify: {exc}") from None
    if any(not isinstance(d, Single) for d in cert.script):
        raise ValueError("reversal is defined for single-agent cycles only")
    states = [cert.start_state.partition]
    for dev in cert.script:
        states.append(apply_deviation(states[-1], dev))
    p = cert.p
    reversed_script = []
    for l in range(p):
        here, there = states[p - l], states[p - l - 1]
        k = cert.script[p - l - 1].agent
        back = there.coalition_of(k) - {k}
        target = NEW if not back else here.index_of(min(back))
        reversed_script.append(Single(k, target))
    negated = tuple(tuple(_norm(-v) for v in row) for row in cert.start_state.utilities)
    flipped = PerceptionModel("appreciation" if model.tag == "resent" else "resent", model.coefficient)
    return game.with_utilities(negated), flipped, states[p], reversed_script


# --- shortest sequences -------------------------------------------------


def shortest_sequence(game: Game, initial: Partition | None, kind, model: PerceptionModel, bound: int,
                      ir_only: bool = False, size_cap: int | None = None, strict_ir: bool = False,
                      max_states: int = 200_000) -> list[Deviation] | None:
    """Breadth-first search for a minimum-length script ending in a stable state.

    Returns ``None`` if no such script of length ``<= bound`` exists. Ties
    are broken by enumeration order. Raises :class:`SearchLimitExceeded` once
    more than ``max_states`` distinct states have been seen.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    kind = Stability.parse(kind)
    start = DynamicState.initial(game, initial)
    seen = {start.key()}
    frontier = deque([(start, ())])
    while frontier:
        state, path = frontier.popleft()
        options = enumerate_deviations(game, state, kind, ir_only, size_cap, strict_ir)
        if not options:
            return list(path)
        if len(path) == bound:
            continue
        for dev in options:
            nxt = _advance(state, dev, model)
            key = nxt.key()
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > max_states:
                raise SearchLimitExceeded(f"more than {max_states} states within depth {bound}")
            frontier.append((nxt, path + (dev,)))
    return None

