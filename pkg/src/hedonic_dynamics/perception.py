"""History-dependent utility updates applied after every deviation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .deviations import NEW, Deviation, Group, Single, target_coalition
from .game import Matrix, Partition, _norm, as_rational, rational_from_json

MODELS = ("none", "resent", "appreciation", "both", "deviator-resent")

_ALIASES = {
    "none": "none",
    "resent": "resent",
    "appreciation": "appreciation",
    "both": "both",
    "resent-appreciation": "both",
    "deviator-resent": "deviator-resent",
    "deviatorresent": "deviator-resent",
}


class UnsupportedCombination(ValueError):
    """A perception model that has no defined rule for the given deviation type."""


@dataclass(frozen=True)
class PerceptionModel:
    """Which agents revise utilities after a deviation, and by how much.

    ``tag`` is one of ``none``, ``resent``, ``appreciation``, ``both`` and
    ``deviator-resent``. ``coefficient`` is the positive rational step ``c``.
    """

    tag: str = "none"
    coefficient: Rational = 1

    def __post_init__(self):
        tag = _ALIASES.get(str(self.tag).lower().replace("_", "-"))
        if tag is None:
            raise ValueError(f"unknown perception model {self.tag!r}; choose from {', '.join(MODELS)}")
        c = as_rational(self.coefficient)
        if not c > 0:
            raise ValueError("coefficient must be positive")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "coefficient", c)

    @property
    def decreases(self) -> bool:
        return self.tag in ("resent", "deviator-resent")

    @property
    def increases(self) -> bool:
        return self.tag == "appreciation"

    def to_json(self) -> dict:
        return {"model": self.tag, "coefficient": _coef_json(self.coefficient)}

    @classmethod
    def from_json(cls, obj) -> "PerceptionModel":
        if not isinstance(obj, dict) or "model" not in obj:
            raise ValueError(f"bad model JSON {obj!r}")
        return cls(obj["model"], rational_from_json(obj.get("coefficient", 1)))


def _coef_json(c):
    c = Fraction(c)
    return {"num": c.numerator, "den": c.denominator}


NONE = PerceptionModel("none")
RESENT = PerceptionModel("resent")
APPRECIATION = PerceptionModel("appreciation")
DEVIATOR_RESENT = PerceptionModel("deviator-resent")


def changed_entries(before: Partition, deviation: Deviation, model: PerceptionModel) -> dict[tuple[int, int], int]:
    """Map ``(i, j)`` to the sign of the change of ``u_i(j)``.

    Computed from the pre-move partition and the deviation alone.
    """
    tag = model.tag
    out: dict[tuple[int, int], int] = {}
    if tag == "none":
        return out
    if isinstance(deviation, Single):
        k = deviation.agent
        abandoned = before.coalition_of(k) - {k}
        joined = target_coalition(before, deviation) if deviation.target != NEW else frozenset()
        if tag in ("resent", "both"):
            for i in abandoned:
                out[(i, k)] = -1
        if tag in ("appreciation", "both"):
            for i in joined:
                out[(i, k)] = 1
        if tag == "deviator-resent":
            for j in abandoned:
                out[(k, j)] = -1
        return out
    if not isinstance(deviation, Group):
        raise TypeError(f"not a deviation: {deviation!r}")
    group = deviation.members
    if tag == "both":
        raise UnsupportedCombination("combined resent and appreciation has no rule for group deviations")
    if tag == "resent":
        for j in group:
            for i in before.coalition_of(j) - group:
                out[(i, j)] = -1
    elif tag == "appreciation":
        for i in group:
            for j in group:
                if i != j:
                    out[(i, j)] = 1
    else:
        for i in group:
            for j in before.coalition_of(i) - group:
                out[(i, j)] = -1
    return out


def update_utilities(utilities: Matrix, before: Partition, deviation: Deviation, model: PerceptionModel) -> Matrix:
    """Utilities after ``deviation`` was applied to ``before`` under ``model``."""
    changes = changed_entries(before, deviation, model)
    if not changes:
        return utilities
    c = model.coefficient
    rows = [list(r) for r in utilities]
    for (i, j), sign in changes.items():
        rows[i][j] = _norm(rows[i][j] + sign * c)
    return tuple(tuple(r) for r in rows)
