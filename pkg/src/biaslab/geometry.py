"""Indifference-set geometry on the belief simplex.

Each non-default action defines a utility-gap vector whose zero set is the
indifference hyperplane with the default action.  Testing a bias threshold
shifts that hyperplane toward the action's side; a threshold is testable
exactly when some shifted hyperplane still meets the simplex.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ATOL, Instance, _frozen
from .design import build_lp, solve_lp
from .errors import (
    DefaultActionGap,
    Infeasible,
    InconsistentClassification,
    OutOfRangeThreshold,
)


@dataclass(frozen=True, eq=False)
class GapVector:
    """Per-state utility differences default minus ``action``."""

    action: str
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))


class Testability(Enum):
    SINGLE_SAMPLE = "single_sample"
    FINITE = "finite"
    UNTESTABLE = "untestable"


@dataclass(frozen=True, eq=False)
class Classification:
    """Three-way verdict for a threshold, with the supporting quantities."""

    verdict: Testability
    useful_mass: float | None
    nonempty_actions: tuple
    tau_max: float

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "p_star": None if self.useful_mass is None else float(self.useful_mass),
            "tau_max": float(self.tau_max),
            "nonempty_actions": list(self.nonempty_actions),
        }


def gap_vector(instance: Instance, action) -> GapVector:
    if action == instance.default_action:
        raise DefaultActionGap("the default action has no gap vector")
    a = instance.action_index(action)
    coeffs = instance.utility[instance.default_index] - instance.utility[a]
    # Assumption: the default wins strictly at the prior.
    assert float(coeffs @ instance.prior.probs) > ATOL
    return GapVector(action=action, coeffs=coeffs)


def indifference_offset(instance: Instance, action, tau: float) -> float:
    """Right-hand side of the shifted indifference hyperplane; always <= 0."""
    if not 0.0 < tau < 1.0:
        raise OutOfRangeThreshold(f"threshold {tau} outside (0, 1)")
    gap = gap_vector(instance, action)
    return -tau / (1.0 - tau) * float(gap.coeffs @ instance.prior.probs)


def translated_set_nonempty(instance: Instance, action, tau: float) -> bool:
    """Does the shifted hyperplane for ``action`` still meet the simplex?

    The hyperplane value over the simplex ranges over [min coeff, max coeff],
    and the offset is nonpositive while the value at the prior is positive,
    so the test reduces to the minimum coefficient reaching the offset.
    """
    offset = indifference_offset(instance, action, tau)
    gap = gap_vector(instance, action)
    return float(gap.coeffs.min()) <= offset + ATOL


def testable_range(instance: Instance) -> float:
    """Largest threshold that remains testable on this instance.

    Zero when the default action weakly dominates everywhere: beliefs then
    never leave the default region and actions carry no information.
    """
    best = 0.0
    mu0 = instance.prior.probs
    for action in instance.actions:
        if action == instance.default_action:
            continue
        gap = gap_vector(instance, action)
        reach = max(0.0, -float(gap.coeffs.min()))
        ratio = reach / float(gap.coeffs @ mu0)
        best = max(best, ratio / (1.0 + ratio))
    return best


def _emptiness_margins(instance: Instance, tau: float) -> dict:
    """offset - min_coeff per non-default action (nonnegative => nonempty)."""
    margins = {}
    for action in instance.actions:
        if action == instance.default_action:
            continue
        offset = indifference_offset(instance, action, tau)
        gap = gap_vector(instance, action)
        margins[action] = offset - float(gap.coeffs.min())
    return margins


def classify(instance: Instance, tau: float) -> Classification:
    """Three-way classification of the threshold question at ``tau``.

    Single sample when the design LP reaches useful mass 1, finite when the
    mass is positive, untestable when it is zero.  The geometric emptiness
    test must agree with the LP outcome; a disagreement beyond the shared
    tolerance can only come from a solver defect and raises
    InconsistentClassification.
    """
    margins = _emptiness_margins(instance, tau)
    nonempty = tuple(a for a in instance.actions if margins.get(a, -1.0) >= -ATOL)
    tau_max = testable_range(instance)

    try:
        value, _ = solve_lp(build_lp(instance, tau))
    except Infeasible:
        value = 0.0

    if value <= ATOL:
        strictly_nonempty = [a for a, m in margins.items() if m > ATOL]
        if strictly_nonempty:
            raise InconsistentClassification(
                f"no useful mass but nonempty translated sets: {strictly_nonempty}"
            )
        return Classification(Testability.UNTESTABLE, None, (), tau_max)

    if not nonempty:
        raise InconsistentClassification(
            f"useful mass {value:.3g} but every translated set is empty"
        )
    verdict = Testability.SINGLE_SAMPLE if value >= 1.0 - ATOL else Testability.FINITE
    return Classification(verdict, float(value), nonempty, tau_max)
