"""Integer NS dynamics for additively separable games.

Utilities are scaled by the coefficient's denominator so every update is an
integer step. Coalitions are keyed by their least member; ``S[i, key]`` is
agent ``i``'s summed utility for coalition ``key``. Deviations are listed in
the same order as the generic enumerator (agent, then coalition by least
member, new singleton last) and drawn with the same RNG call, so traces
coincide with the exact engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_LIMIT = 2**62


@dataclass
class FastResult:
    labels: np.ndarray  # coalition key (least member) per agent
    utilities: np.ndarray  # scaled by ``scale``
    scale: int
    steps: int
    converged: bool


class _State:
    def __init__(self, U: np.ndarray, labels: np.ndarray):
        n = U.shape[0]
        self.n = n
        self.U = U
        self.own = labels.copy()
        self.size = np.zeros(n, dtype=np.int64)
        M = np.zeros((n, n), dtype=np.int64)
        for j in range(n):
            M[j, self.own[j]] = 1
            self.size[self.own[j]] += 1
        self.S = U @ M
        self.members = {k: set(np.flatnonzero(M[:, k]).tolist()) for k in range(n) if self.size[k]}

    def options(self, ir_only: bool) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        cur = self.S[np.arange(n), self.own]
        gains = np.empty((n, n + 1), dtype=np.int64)
        gains[:, :n] = self.S - cur[:, None]
        active = self.size > 0
        ok = np.zeros((n, n + 1), dtype=bool)
        ok[:, :n] = (gains[:, :n] > 0) & active[None, :]
        if ir_only:
            ok[:, :n] &= self.S >= 0
        ok[np.arange(n), self.own] = False
        ok[:, n] = (cur < 0) & (self.size[self.own] > 1)
        return np.flatnonzero(ok), cur

    def move(self, k: int, target: int | None):
        """Move agent ``k`` to coalition key ``target`` (``None`` for a new singleton)."""
        S, U = self.S, self.U
        old = int(self.own[k])
        rest = self.members.pop(old)
        rest.discard(k)
        self.size[old] = 0
        col = S[:, old] - U[:, k]
        S[:, old] = 0
        if rest:
            new_old = min(rest)
            S[:, new_old] = col
            self.size[new_old] = len(rest)
            self.members[new_old] = rest
            for j in rest:
                self.own[j] = new_old
        else:
            new_old = None
        if target is None:
            key, members, base = k, {k}, np.zeros(self.n, dtype=np.int64)
        else:
            members = self.members.pop(target)
            base = S[:, target].copy()
            S[:, target] = 0
            self.size[target] = 0
            members.add(k)
            key = min(target, k)
        S[:, key] = base + U[:, k]
        self.size[key] = len(members)
        self.members[key] = members
        for j in members:
            self.own[j] = key
        return new_old, rest, key, members

    def bump(self, i: int, j: int, delta: int):
        self.U[i, j] += delta
        self.S[i, self.own[j]] += delta


def run_fast(utilities, model_tag: str = "none", coefficient=1, seed_or_rng=None,
             max_steps: int = 100000, ir_only: bool = False, labels=None) -> FastResult:
    """NS dynamics with a uniform-random policy on integer-scaled utilities."""
    c = Fraction(coefficient)
    scale, step_size = c.denominator, c.numerator
    rows = [[Fraction(v) * scale for v in row] for row in utilities]
    if any(v.denominator != 1 for row in rows for v in row):
        raise ValueError("utilities must be multiples of 1/denominator(coefficient)")
    U = np.array([[int(v) for v in row] for row in rows], dtype=np.int64)
    n = U.shape[0]
    bound = (int(np.abs(U).max(initial=0)) + max_steps * step_size) * n
    if bound >= _LIMIT:
        raise OverflowError("utilities could overflow 64-bit integers; use the exact engine")
    if labels is None:
        labels = np.arange(n, dtype=np.int64)
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.Generator(
        np.random.PCG64(seed_or_rng))
    st = _State(U, np.asarray(labels, dtype=np.int64))
    resent = model_tag in ("resent", "both")
    apprec = model_tag in ("appreciation", "both")
    devres = model_tag == "deviator-resent"
    steps = 0
    while True:
        flat, _ = st.options(ir_only)
        if flat.size == 0:
            return FastResult(st.own.copy(), st.U, scale, steps, True)
        if steps >= max_steps:
            return FastResult(st.own.copy(), st.U, scale, steps, False)
        pick = int(flat[int(rng.integers(flat.size))])
        k, col = divmod(pick, n + 1)
        target = None if col == n else col
        joined_before = () if target is None else tuple(st.members[target])
        new_old, rest, key, members = st.move(k, target)
        steps += 1
        if resent:
            for i in rest:
                st.bump(i, k, -step_size)
        if apprec:
            for i in joined_before:
                st.bump(i, k, step_size)
        if devres:
            for j in rest:
                st.bump(k, j, -step_size)
