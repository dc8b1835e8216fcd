"""Controlled-H_l gate accounting for the corrected and uncorrected methods.

One "gate" is one application of a controlled-H_l (multiplexed over l), the
unit in which the algorithm's complexity is stated.  State preparation and
reflections are free in this model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .series import choose_K


@dataclass(frozen=True)
class GateTally:
    segment_total: int
    correction_total: int
    per_term: dict = field(default_factory=dict)

    @classmethod
    def from_stages(cls, segment: int, correction: int) -> "GateTally":
        return cls(segment, correction, {"segment": segment, "correction": correction})

    @classmethod
    def zero(cls) -> "GateTally":
        return cls.from_stages(0, 0)

    @property
    def logical_total(self) -> int:
        return self.segment_total + self.correction_total

    @property
    def amplified_total(self) -> int:
        """Logical count tripled by the final amplification round."""
        return 3 * self.logical_total

    def __add__(self, other: "GateTally") -> "GateTally":
        return GateTally.from_stages(self.segment_total + other.segment_total,
                                     self.correction_total + other.correction_total)

    def as_dict(self) -> dict:
        return {"per_term": dict(self.per_term), "logical_total": self.logical_total,
                "amplified_total": self.amplified_total}


def tally(plan) -> GateTally:
    """Analytic tally: ``3rK`` for the amplified segments plus ``Q`` for the correction."""
    return GateTally.from_stages(3 * plan.r * plan.K, plan.Q)


@dataclass(frozen=True)
class BaselinePlan:
    r: int
    K: int
    count: int


def baseline_uncorrected(T: float, epsilon: float) -> BaselinePlan:
    """The uncorrected method run directly at accuracy ``epsilon``.

    Uses the smallest segment count keeping the LCU weight at most 2,
    ``r = ceil(T / ln 2)``.
    """
    r = max(1, math.ceil(T / math.log(2)))
    K = choose_K(T / r, epsilon / r)
    return BaselinePlan(r, K, 3 * r * K)
