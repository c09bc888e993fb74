"""Closed-form certificates for the worst-case expected loss over a Hellinger ball.

Given only the mean E, variance V and a uniform ceiling M of a bounded loss
under a reference distribution P, positive semidefiniteness of the Gram
matrix of square-root densities yields closed-form bounds on

    sup / inf of E_Q[loss]  over all Q with Hellinger distance H(P, Q) <= rho.

Both directions share the coefficient C(rho) = sqrt(rho^2 (1-rho^2)^2 (2-rho^2))
and are valid only up to a maximum radius determined by (E, V, M); beyond it
the sign condition behind the derivation fails and we refuse to produce a
number rather than silently clamp the radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

__all__ = [
    "LossStatistics",
    "CertificateReport",
    "RadiusValidityError",
    "c_rho",
    "max_valid_radius_upper",
    "max_valid_radius_lower",
    "upper_bound",
    "lower_bound",
    "classification_error_upper",
]

# Slack for the Bhatia-Davis admissibility check, covering float rounding in
# variances computed from data.
_BD_SLACK = 1e-12


class RadiusValidityError(ValueError):
    """Requested radius exceeds the certificate's maximum valid radius.

    Carries ``max_valid_radius`` so callers can report how far the inputs
    can actually be certified.
    """

    def __init__(self, rho: float, max_valid_radius: float):
        super().__init__(
            f"radius {rho:.17g} exceeds the maximum valid radius "
            f"{max_valid_radius:.17g} for these loss statistics"
        )
        self.rho = rho
        self.max_valid_radius = max_valid_radius


@dataclass(frozen=True)
class LossStatistics:
    """Population triple (mean, variance, ceiling) of a loss in [0, ceiling].

    Rejects inputs violating the Bhatia-Davis inequality
    variance <= mean * (ceiling - mean), which every distribution supported
    on [0, ceiling] satisfies.
    """

    mean: float
    variance: float
    ceiling: float

    def __post_init__(self):
        if not (self.ceiling > 0 and math.isfinite(self.ceiling)):
            raise ValueError(f"ceiling must be positive and finite, got {self.ceiling}")
        if not (0.0 <= self.mean <= self.ceiling):
            raise ValueError(f"mean {self.mean} outside [0, {self.ceiling}]")
        bd_cap = self.mean * (self.ceiling - self.mean)
        if not (0.0 <= self.variance <= bd_cap + _BD_SLACK * self.ceiling**2):
            raise ValueError(
                f"variance {self.variance} violates the Bhatia-Davis bound "
                f"{bd_cap} for mean {self.mean} on [0, {self.ceiling}]"
            )


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one certificate evaluation.

    ``bound`` is clamped into the trivially attainable loss range; the
    pre-clamp value is kept in ``raw_bound`` for diagnostics.  ``inputs``
    holds whatever statistics object produced the bound.
    """

    direction: str  # "upper" | "lower"
    radius: float
    bound: float
    raw_bound: float
    max_valid_radius: float
    inputs: object
    confidence: Optional[float] = None

    def __post_init__(self):
        if self.direction not in ("upper", "lower"):
            raise ValueError(f"direction must be 'upper' or 'lower', got {self.direction!r}")
        if self.radius > self.max_valid_radius:
            raise ValueError("populated certificate with radius beyond validity")


def _check_radius(rho: float) -> None:
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"Hellinger radius must lie in [0, 1], got {rho}")


def c_rho(rho: float) -> float:
    """Radius coefficient sqrt(rho^2 (1-rho^2)^2 (2-rho^2)); zero at rho in {0, 1}."""
    _check_radius(rho)
    r2 = rho * rho
    return math.sqrt(r2 * (1.0 - r2) ** 2 * (2.0 - r2))


def max_valid_radius_upper(stats: LossStatistics) -> float:
    """Largest radius at which the upper certificate is defined.

    Equals sqrt(1 - [1 + (M-E)^2/V]^(-1/2)); the condition is vacuous for a
    zero-variance loss, where any radius in [0, 1] is admissible.
    """
    if stats.variance <= 0.0:
        return 1.0
    gap = stats.ceiling - stats.mean
    if gap <= 0.0:
        # Unreachable through the constructor (Bhatia-Davis forces V = 0
        # when E = M) but kept as a hard guard.
        raise ValueError("mean equals ceiling with positive variance")
    t2 = gap * gap / stats.variance
    return math.sqrt(1.0 - 1.0 / math.sqrt(1.0 + t2))


def max_valid_radius_lower(stats: LossStatistics) -> float:
    """Largest radius at which the lower certificate is defined (vacuous for V = 0)."""
    if stats.variance <= 0.0:
        return 1.0
    # Bhatia-Davis forces mean > 0 whenever variance > 0.
    t2 = stats.mean * stats.mean / stats.variance
    return math.sqrt(1.0 - 1.0 / math.sqrt(1.0 + t2))


def upper_bound(stats: LossStatistics, rho: float) -> CertificateReport:
    """Certified upper bound on sup E_Q[loss] over the radius-rho Hellinger ball.

    Value:  E + 2 C(rho) sqrt(V) + rho^2 (2 - rho^2) [M - E - V / (M - E)],
    with the V/(M-E) correction taken as 0 in the V = 0 limit.  Raises
    :class:`RadiusValidityError` when rho exceeds :func:`max_valid_radius_upper`.
    """
    _check_radius(rho)
    mv = max_valid_radius_upper(stats)
    if rho > mv:
        raise RadiusValidityError(rho, mv)
    e, v, m = stats.mean, stats.variance, stats.ceiling
    correction = v / (m - e) if v > 0.0 else 0.0
    r2 = rho * rho
    raw = e + 2.0 * c_rho(rho) * math.sqrt(v) + r2 * (2.0 - r2) * (m - e - correction)
    return CertificateReport(
        direction="upper",
        radius=rho,
        bound=min(raw, m),
        raw_bound=raw,
        max_valid_radius=mv,
        inputs=stats,
    )


def lower_bound(stats: LossStatistics, rho: float) -> CertificateReport:
    """Certified lower bound on inf E_Q[loss] over the radius-rho Hellinger ball.

    Value:  E - 2 C(rho) sqrt(V) - rho^2 (2 - rho^2) [E - V / E],
    with the V/E correction taken as 0 in the E = 0 limit (which forces V = 0).
    """
    _check_radius(rho)
    mv = max_valid_radius_lower(stats)
    if rho > mv:
        raise RadiusValidityError(rho, mv)
    e, v = stats.mean, stats.variance
    correction = v / e if e > 0.0 else 0.0
    r2 = rho * rho
    raw = e - 2.0 * c_rho(rho) * math.sqrt(v) - r2 * (2.0 - r2) * (e - correction)
    return CertificateReport(
        direction="lower",
        radius=rho,
        bound=max(raw, 0.0),
        raw_bound=raw,
        max_valid_radius=mv,
        inputs=stats,
    )


def classification_error_upper(error_rate: float, rho: float) -> CertificateReport:
    """Worst-case classification error over the Hellinger ball.

    Specialization to the 0-1 loss: plugging E = eps, V = eps(1 - eps), M = 1
    into the upper certificate gives

        eps + 2 C(rho) sqrt(eps (1 - eps)) + rho^2 (2 - rho^2) (1 - 2 eps),

    valid for rho^2 <= 1 - sqrt(eps).  At eps = 0 the bound rho^2 (2 - rho^2)
    is attained exactly by moving probability mass onto a misclassified point.
    """
    if not (0.0 <= error_rate <= 1.0):
        raise ValueError(f"error rate must lie in [0, 1], got {error_rate}")
    _check_radius(rho)
    mv = math.sqrt(1.0 - math.sqrt(error_rate))
    if rho > mv:
        raise RadiusValidityError(rho, mv)
    eps = error_rate
    r2 = rho * rho
    raw = (
        eps
        + 2.0 * c_rho(rho) * math.sqrt(eps * (1.0 - eps))
        + r2 * (2.0 - r2) * (1.0 - 2.0 * eps)
    )
    stats = LossStatistics(mean=eps, variance=eps * (1.0 - eps), ceiling=1.0)
    return CertificateReport(
        direction="upper",
        radius=rho,
        bound=min(max(raw, 0.0), 1.0),
        raw_bound=raw,
        max_valid_radius=mv,
        inputs=stats,
    )
