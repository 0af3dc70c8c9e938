"""Model parameters and derived exponents.

The problem quintuple is (N, s, p, eta, m): dimension, fractional order,
extra nonlinearity power, its coupling, and the prescribed L2 mass. The
admissible window for p is the mass-supercritical range below the critical
exponent,

    2 + 4s/N < p < 2N/(N - 2s),

which makes zeta_p = (Np - 2N)/(2ps) lie in (0, 1) with zeta_p * p > 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def exponents_for(dim: int, s: float, p: float) -> "DerivedExponents":
    """Raw exponent arithmetic, no admissibility checks.

    Exposed separately so boundary probes (for instance p at the critical
    exponent, where zeta_p = 1) can be evaluated without constructing an
    inadmissible ModelParams.
    """
    n = float(dim)
    two_star = 2.0 * n / (n - 2.0 * s)
    zeta_p = (n * p - 2.0 * n) / (2.0 * p * s)
    mass_critical_p = 2.0 + 4.0 * s / n
    # Raw arithmetic: at p exactly mass-critical the decay exponent blows
    # up; report it as inf so admissibility checks can still run.
    denom = n * p - 2.0 * n - 4.0 * s
    level_decay_exponent = math.inf if denom == 0.0 else 4.0 * s / denom
    return DerivedExponents(
        two_star=two_star,
        zeta_p=zeta_p,
        mass_critical_p=mass_critical_p,
        level_decay_exponent=level_decay_exponent,
    )


@dataclass(frozen=True)
class DerivedExponents:
    two_star: float
    zeta_p: float
    mass_critical_p: float
    level_decay_exponent: float


@dataclass(frozen=True)
class ModelParams:
    """Validated problem parameters (N, s, p, eta, m)."""

    dim: int
    s: float
    p: float
    eta: float
    m: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("unsupported dimension %r (must be 1, 2, or 3)" % (self.dim,))
        if not (0.0 < self.s < 1.0):
            raise ValueError("s must lie in (0, 1), got %r" % (self.s,))
        if not (2.0 * self.s < self.dim):
            raise ValueError(
                "2s must be smaller than the dimension: 2*%g >= %d" % (self.s, self.dim)
            )
        if not (self.eta > 0.0):
            raise ValueError("eta must be positive, got %r" % (self.eta,))
        if not (self.m > 0.0):
            raise ValueError("mass parameter m must be positive, got %r" % (self.m,))
        ex = exponents_for(self.dim, self.s, self.p)
        if not (self.p > ex.mass_critical_p):
            raise ValueError(
                "p must exceed 2 + 4s/N = %.6g (got p = %g)" % (ex.mass_critical_p, self.p)
            )
        if not (self.p < ex.two_star):
            raise ValueError(
                "p must stay below the critical exponent 2N/(N-2s) = %.6g (got p = %g)"
                % (ex.two_star, self.p)
            )

    @property
    def two_star(self) -> float:
        return exponents_for(self.dim, self.s, self.p).two_star

    @property
    def zeta_p(self) -> float:
        return exponents_for(self.dim, self.s, self.p).zeta_p


def derived_exponents(params: ModelParams) -> DerivedExponents:
    """All four derived exponents of a validated parameter set."""
    ex = exponents_for(params.dim, params.s, params.p)
    # Admissibility of params pins these ranges; assert the arithmetic once.
    assert 0.0 < ex.zeta_p < 1.0
    assert ex.zeta_p * params.p > 2.0
    assert ex.level_decay_exponent > 0.0
    return ex
