"""Random game generators and the batch harness for NS dynamics experiments.

Seeding scheme: a batch seed feeds ``numpy.random.SeedSequence``; game ``g``
uses child ``g``, which is split again into a game stream and a choice
stream. Both streams drive ``Generator(PCG64)``. Rows therefore depend only
on ``(seed, g)`` and not on the batch size or worker count.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np

from ._fastns import run_fast
from .deviations import Stability, enumerate_single, is_stable
from .dynamics import RandomPolicy, run
from .game import DynamicState, Game, Partition, aggregate_value
from .perception import PerceptionModel

RANGE = (-100, 100)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def gen_uniform(n: int, seed=None, caf: str = "AS") -> Game:
    """Off-diagonal utilities drawn uniformly from the integers in ``[-100, 100]``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = _rng(seed)
    U = rng.integers(RANGE[0], RANGE[1] + 1, size=(n, n))
    np.fill_diagonal(U, 0)
    return Game.from_matrix(U.tolist(), caf)


def gen_gaussian(n: int, seed=None, sigma: float = 10, caf: str = "AS") -> Game:
    """Each agent ``b`` gets a base value ``mu_b`` in ``[-100, 100]``; ``u_a(b)`` rounds a N(mu_b, sigma) draw.

    Draws are rounded to the nearest integer and not clamped.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    rng = _rng(seed)
    mu = rng.integers(RANGE[0], RANGE[1] + 1, size=n)
    draws = rng.normal(loc=mu[None, :].astype(float), scale=float(sigma), size=(n, n))
    U = np.rint(draws).astype(np.int64)
    np.fill_diagonal(U, 0)
    return Game.from_matrix(U.tolist(), caf)


@dataclass(frozen=True)
class OutcomeStats:
    """Summary of one run; rationals are exact and rendered as decimals in CSV."""

    steps: int
    converged: bool
    coalitions: int
    avg_size: Fraction
    max_size: int
    ir_violations: int
    ns_deviators: int
    avg_utility: Fraction
    avg_change: Fraction
    positive_fraction: Fraction


def outcome_stats(game: Game, partition: Partition, final_utilities, steps: int, converged: bool) -> OutcomeStats:
    """Metrics for a final state; IR and NS counts use the game's original utilities."""
    n = game.n
    u0, uT = game.utilities, final_utilities
    sizes = [len(c) for c in partition.coalitions]
    ir_bad = 0
    values = []
    for i in range(n):
        c = partition.coalition_of(i)
        if aggregate_value(game.caf, i, c, u0) < 0:
            ir_bad += 1
        values.append(aggregate_value(game.caf, i, c, uT))
    original = DynamicState(partition, u0)
    deviators = len({d.agent for d in enumerate_single(game, original, Stability.NS)})
    pairs = n * (n - 1)
    change = sum((uT[i][j] - u0[i][j] for i in range(n) for j in range(n) if i != j), 0)
    positive = sum(1 for i in range(n) for j in range(n) if i != j and uT[i][j] > 0)
    return OutcomeStats(
        steps=steps,
        converged=converged,
        coalitions=len(sizes),
        avg_size=Fraction(n, len(sizes)),
        max_size=max(sizes),
        ir_violations=ir_bad,
        ns_deviators=deviators,
        avg_utility=Fraction(sum(values, Fraction(0)), n),
        avg_change=Fraction(change, pairs) if pairs else Fraction(0),
        positive_fraction=Fraction(positive, pairs) if pairs else Fraction(0),
    )


def trace_stats(trace) -> OutcomeStats:
    from .dynamics import Converged

    state = trace.final_state
    return outcome_stats(trace.game, state.partition, state.utilities, trace.steps,
                         isinstance(trace.outcome, Converged))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 20
    games: int = 20
    utilities: str = "uniform"
    sigma: float = 10
    model: str = "resent"
    coefficient: Fraction = Fraction(1)
    seed: int = 0
    max_steps: int = 100000
    caf: str = "AS"
    ir_only: bool = False
    engine: str = "fast"

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.n < 1 or self.games < 0:
            raise ValueError("n must be positive and games non-negative")
        if self.utilities not in ("uniform", "gaussian"):
            raise ValueError(f"unknown utility model {self.utilities!r}")
        if self.engine not in ("fast", "exact"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "fast" and self.caf != "AS":
            raise ValueError("the fast engine handles AS games only; use engine='exact'")
        PerceptionModel(self.model, self.coefficient)


@dataclass(frozen=True)
class Row:
    game: int
    stats: OutcomeStats


def game_streams(seed: int, index: int):
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    game_ss, choice_ss = child.spawn(2)
    return _rng(game_ss), _rng(choice_ss)


def make_game(config: ExperimentConfig, rng) -> Game:
    if config.utilities == "uniform":
        return gen_uniform(config.n, rng, config.caf)
    return gen_gaussian(config.n, rng, config.sigma, config.caf)


def run_one(config: ExperimentConfig, index: int) -> Row:
    game_rng, choice_rng = game_streams(config.seed, index)
    game = make_game(config, game_rng)
    model = PerceptionModel(config.model, config.coefficient)
    if config.engine == "fast":
        res = run_fast(game.utilities, model.tag, model.coefficient, choice_rng, config.max_steps, config.ir_only)
        partition = Partition.from_labels(res.labels.tolist())
        final = tuple(tuple(Fraction(int(v), res.scale) for v in row) for row in res.utilities)
        final = tuple(tuple(v.numerator if v.denominator == 1 else v for v in row) for row in final)
        return Row(index, outcome_stats(game, partition, final, res.steps, res.converged))
    trace = run(game, None, Stability.NS, model, RandomPolicy(choice_rng), config.max_steps,
                ir_only=config.ir_only, record=False)
    return Row(index, trace_stats(trace))


def _run_star(args):
    return run_one(*args)


def run_batch(config: ExperimentConfig, jobs: int = 1) -> list[Row]:
    """One row per game, in game order regardless of ``jobs``."""
    tasks = [(config, g) for g in range(config.games)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_star, tasks))
    return [run_one(*t) for t in tasks]


@dataclass(frozen=True)
class Aggregate:
    games: int
    timeouts: int
    mean_steps: Fraction | None  # over converged games only
    means: dict


def aggregate_rows(rows: list[Row]) -> Aggregate:
    done = [r.stats.steps for r in rows if r.stats.converged]
    names = [f.name for f in fields(OutcomeStats) if f.name not in ("steps", "converged")]
    means = {}
    for name in names:
        vals = [Fraction(getattr(r.stats, name)) for r in rows]
        means[name] = sum(vals, Fraction(0)) / len(vals) if vals else None
    return Aggregate(len(rows), len(rows) - len(done), Fraction(sum(done), len(done)) if done else None, means)


COLUMNS = ("seed", "game", "outcome", "steps", "coalitions", "avg_size", "max_size", "ir_violations",
           "ns_deviators", "avg_utility", "avg_change", "positive_fraction")


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return f"{float(value):.6f}"
    return str(value)


def rows_to_csv(config: ExperimentConfig, rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        s = asdict(r.stats)
        w.writerow([config.seed, r.game, "converged" if r.stats.converged else "timeout"]
                   + [_fmt(s[c]) for c in COLUMNS[3:]])
    agg = aggregate_rows(rows)
    w.writerow([config.seed, "mean", f"timeouts={agg.timeouts}",
                "" if agg.mean_steps is None else _fmt(agg.mean_steps)]
               + ["" if agg.means[c] is None else _fmt(agg.means[c]) for c in COLUMNS[4:]])
    return buf.getvalue()


def verify_converged(config: ExperimentConfig, index: int) -> bool:
    """Recompute game ``index`` with the fast engine and confirm NS stability of the end state."""
    game_rng, choice_rng = game_streams(config.seed, index)
    game = make_game(config, game_rng)
    model = PerceptionModel(config.model, config.coefficient)
    res = run_fast(game.utilities, model.tag, model.coefficient, choice_rng, config.max_steps, config.ir_only)
    if not res.converged:
        return False
    final = tuple(tuple(Fraction(int(v), res.scale) for v in row) for row in res.utilities)
    state = DynamicState(Partition.from_labels(res.labels.tolist()), final)
    return is_stable(game, state, Stability.NS)
