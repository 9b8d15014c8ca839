"""Scalar estimates with uncertainty.

An :class:`Estimate` is the package's common return type for any scalar that
may carry Monte Carlo error.  Closed-form and deterministic-quadrature values
use ``stderr = 0.0``; sampled values carry the standard error of the mean.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Estimate:
    """A scalar value with its standard error and provenance.

    Attributes:
        value: the point estimate.
        stderr: standard error of ``value``; 0.0 exactly when the value is
            deterministic (closed form or fixed quadrature).
        count: number of samples or evaluation nodes behind the value.
        seed: seed of the stream that produced the samples, or None for
            deterministic values.
    """

    value: float
    stderr: float
    count: int
    seed: int | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.count < 0:
            raise ValueError("count must be nonnegative")

    def interval(self, k: float = 2.0) -> tuple[float, float]:
        """Return the symmetric ``k``-standard-error interval."""
        return (self.value - k * self.stderr, self.value + k * self.stderr)

    def consistent_with(self, other: float, k: float = 3.0) -> bool:
        """True if ``other`` lies within ``k`` standard errors of the value."""
        return abs(self.value - other) <= k * self.stderr

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "stderr": float(self.stderr),
            "count": int(self.count),
            "seed": self.seed if self.seed is None else int(self.seed),
        }


def combined_stderr(*errs: float) -> float:
    """Standard error of a sum or difference of independent estimates."""
    return float(sum(e * e for e in errs)) ** 0.5
