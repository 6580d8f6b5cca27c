"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numbers

import numpy as np

from .game import ContractError, Matrix, Partition, freeze_matrix, validate_partition


def check_utility_matrix(X) -> Matrix:
    """Return ``X`` as an exact square matrix with a zero diagonal.

    ``X`` may be a nested sequence or a numpy array of integers, Fractions
    or integral floats. Raises ``ValueError`` on anything else.
    """
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise ValueError(f"utility matrix must be 2-dimensional, got {X.ndim} dimensions")
        if X.dtype.kind == "f" and not np.isfinite(X).all():
            raise ValueError("utility matrix contains NaN or infinity")
        rows = X.tolist()
    else:
        try:
            rows = [list(r) for r in X]
        except TypeError:
            raise ValueError("utility matrix must be a sequence of rows") from None
    n = len(rows)
    if n == 0:
        raise ValueError("utility matrix is empty")
    if any(len(r) != n for r in rows):
        raise ValueError(f"utility matrix must be square, got {n} rows of lengths {sorted({len(r) for r in rows})}")
    try:
        M = freeze_matrix(rows)
    except TypeError as exc:
        raise ValueError(str(exc)) from None
    bad = [i for i in range(n) if M[i][i] != 0]
    if bad:
        raise ValueError(f"diagonal entry for agent {bad[0]} must be 0")
    return M


def check_labels(labels, n: int) -> Partition:
    """Turn a label vector of length ``n`` into a partition."""
    labels = list(labels)
    if len(labels) != n:
        raise ValueError(f"expected {n} labels, got {len(labels)}")
    if not all(isinstance(v, numbers.Integral) for v in labels):
        raise ValueError("labels must be integers")
    part = Partition.from_labels([int(v) for v in labels])
    problem = validate_partition(part.coalitions, n)
    if problem is not None:
        raise ContractError(problem)
    return part


def check_positive_int(value, name: str, allow_zero: bool = False) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return int(value)
