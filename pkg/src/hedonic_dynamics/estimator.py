"""Scikit-learn style front end: coalition formation as clustering of agents.

``X`` is a square utility matrix, ``X[i, j]`` being agent ``i``'s value for
agent ``j``. Fitting runs a deviation dynamics from an initial partition and
stores the partition it ends in as cluster labels.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._fastns import run_fast
from .deviations import Stability
from .dynamics import Converged, FirstPolicy, RandomPolicy, run
from .game import CAFS, Game, Partition, aggregate_value
from .perception import PerceptionModel
from .validation import check_labels, check_positive_int, check_utility_matrix


class CoalitionFormation(ClusterMixin, BaseEstimator):
    """Run a hedonic-game dynamics and report the final partition.

    Parameters
    ----------
    caf : {"AS", "MF"}, default="AS"
        How an agent aggregates her utilities for the members of a coalition.
    stability : {"NS", "IS", "CNS", "CS", "SCS"}, default="NS"
        Which deviations the dynamics may take.
    perception : str, default="resent"
        One of ``none``, ``resent``, ``appreciation``, ``both`` or
        ``deviator-resent``.
    coefficient : int, Fraction or str, default=1
        Size of each perception update.
    ir_only : bool, default=False
        Only take deviations after which the deviators are individually rational.
    strict_ir : bool, default=False
        Single agents may join an existing coalition only if they strictly
        prefer it to being alone.
    policy : {"random", "first"}, default="random"
        Uniform choice among available deviations, or the first in canonical order.
    max_steps : int, default=100000
    size_cap : int or None, default=None
        Largest deviating group considered by CS and SCS.
    engine : {"exact", "fast"}, default="exact"
        ``"fast"`` uses integer numpy arithmetic and gives the same result for
        AS games under NS with the random policy; it does not record a trace.
    random_state : int, numpy Generator or None, default=None

    Attributes
    ----------
    labels_ : ndarray of shape (n_agents,)
        Index of each agent's coalition in canonical order.
    partition_ : Partition
    utilities_ : tuple of tuples
        Exact utilities after the last step.
    n_steps_ : int
    converged_ : bool
    trace_ : Trace or None
    game_ : Game
    """

    def __init__(self, caf="AS", stability="NS", perception="resent", coefficient=1, ir_only=False,
                 strict_ir=False, policy="random", max_steps=100000, size_cap=None, engine="exact",
                 random_state=None):
        self.caf = caf
        self.stability = stability
        self.perception = perception
        self.coefficient = coefficient
        self.ir_only = ir_only
        self.strict_ir = strict_ir
        self.policy = policy
        self.max_steps = max_steps
        self.size_cap = size_cap
        self.engine = engine
        self.random_state = random_state

    def _check_params(self):
        caf = str(self.caf).upper()
        if caf not in CAFS:
            raise ValueError(f"caf must be one of {CAFS}, got {self.caf!r}")
        kind = Stability.parse(self.stability)
        model = PerceptionModel(self.perception, Fraction(self.coefficient))
        if self.policy not in ("random", "first"):
            raise ValueError(f"policy must be 'random' or 'first', got {self.policy!r}")
        check_positive_int(self.max_steps, "max_steps", allow_zero=True)
        if self.size_cap is not None:
            check_positive_int(self.size_cap, "size_cap")
        if self.engine not in ("exact", "fast"):
            raise ValueError(f"engine must be 'exact' or 'fast', got {self.engine!r}")
        if self.engine == "fast":
            if caf != "AS" or kind is not Stability.NS or self.policy != "random" or self.strict_ir:
                raise ValueError("engine='fast' supports AS games, NS dynamics and the random policy only")
        return caf, kind, model

    def fit(self, X, y=None, initial_labels=None):
        """Run the dynamics on utility matrix ``X``.

        ``initial_labels`` gives the starting partition; singletons by default.
        """
        caf, kind, model = self._check_params()
        game = Game.from_matrix(check_utility_matrix(X), caf)
        initial = Partition.singletons(game.n) if initial_labels is None else check_labels(initial_labels, game.n)
        if self.engine == "fast":
            res = run_fast(game.utilities, model.tag, model.coefficient, self._rng(), self.max_steps,
                           self.ir_only, labels=_keys(initial))
            partition = Partition.from_labels(res.labels.tolist())
            final = tuple(tuple(_exact(int(v), res.scale) for v in row) for row in res.utilities)
            self.trace_ = None
            self.n_steps_, self.converged_ = res.steps, res.converged
        else:
            policy = RandomPolicy(self._rng()) if self.policy == "random" else FirstPolicy()
            trace = run(game, initial, kind, model, policy, self.max_steps, self.size_cap,
                        self.ir_only, self.strict_ir)
            state = trace.final_state
            partition, final = state.partition, state.utilities
            self.trace_ = trace
            self.n_steps_, self.converged_ = trace.steps, isinstance(trace.outcome, Converged)
        self.game_ = game
        self.partition_ = partition
        self.utilities_ = final
        self.labels_ = np.asarray(partition.labels(), dtype=np.intp)
        return self

    def fit_predict(self, X, y=None, initial_labels=None):
        return self.fit(X, initial_labels=initial_labels).labels_

    def agent_values(self):
        """Each agent's value for her final coalition under the final utilities."""
        check_is_fitted(self, "labels_")
        p, u = self.partition_, self.utilities_
        return [aggregate_value(self.game_.caf, i, p.coalition_of(i), u) for i in range(self.game_.n)]

    def score(self, X=None, y=None):
        """Average final-coalition value, as a float."""
        vals = self.agent_values()
        return float(sum(vals, Fraction(0)) / len(vals))

    def _rng(self):
        if isinstance(self.random_state, np.random.Generator):
            return self.random_state
        return np.random.Generator(np.random.PCG64(self.random_state))


def _keys(partition: Partition) -> list[int]:
    return [min(partition.coalition_of(i)) for i in range(len(partition.owner))]


def _exact(value: int, scale: int):
    f = Fraction(value, scale)
    return f.numerator if f.denominator == 1 else f
