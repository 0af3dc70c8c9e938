"""Dilation fiber calculus on summaries.

The mass-preserving dilation acts on the invariant quadruple exactly:

    A -> e^{2 s xi} A,   M -> M,   B_beta -> e^{(beta-2) N xi / 2} B_beta,

so every fiber quantity is a closed-form function of the base summary and
no grid resampling is involved. Substituting t = e^{s xi} turns the fiber
Pohozaev functional into t^2 * phi(t) with

    phi(t) = A - t^{q-2} B_star - eta zeta t^{p zeta - 2} B_p,   q = 2*_s,

strictly decreasing because 2 < p zeta < q, which makes bisection for the
unique fiber root unconditionally safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import functionals
from .fields import FieldSummary
from .params import ModelParams, exponents_for


class DegenerateFiberError(ValueError):
    """The summary has no fiber maximum: A = 0 or no nonlinear term left."""


@dataclass(frozen=True)
class FiberProfile:
    """A base summary together with its parameters; xi is an argument of
    the operations, not state."""

    base: FieldSummary
    params: ModelParams

    def __post_init__(self):
        if self.base.A <= 0.0 or (self.base.B_star <= 0.0 and self.base.B_p <= 0.0):
            raise DegenerateFiberError(
                "degenerate fiber profile (needs A > 0 and a nonzero nonlinear term)"
            )


def scale_summary(summary: FieldSummary, xi: float, params: ModelParams) -> FieldSummary:
    ex = exponents_for(params.dim, params.s, params.p)
    n = params.dim
    return FieldSummary(
        A=math.exp(2.0 * params.s * xi) * summary.A,
        M=summary.M,
        B_p=math.exp((params.p - 2.0) * n * xi / 2.0) * summary.B_p,
        B_star=math.exp((ex.two_star - 2.0) * n * xi / 2.0) * summary.B_star,
    )


def fiber_energy(profile: FiberProfile, xi: float) -> float:
    return functionals.energy(scale_summary(profile.base, xi, profile.params), profile.params)


def fiber_pohozaev(profile: FiberProfile, xi: float) -> float:
    return functionals.pohozaev(scale_summary(profile.base, xi, profile.params), profile.params)


def fiber_derivative_residual(profile: FiberProfile, xi: float, step: float = 1e-6) -> float:
    """|d/dxi of the fiber energy - s * fiber Pohozaev| at xi, by central
    differences, normalized by max(1, |s P|)."""
    deriv = (fiber_energy(profile, xi + step) - fiber_energy(profile, xi - step)) / (2.0 * step)
    target = profile.params.s * fiber_pohozaev(profile, xi)
    return abs(deriv - target) / max(1.0, abs(target))


def _fiber_root_t(summary: FieldSummary, params: ModelParams,
                  return_iterations: bool = False):
    """Root of phi(t) on t > 0 by bracket doubling from t = 1 and bisection."""
    if summary.A <= 0.0 or (summary.B_star <= 0.0 and summary.B_p <= 0.0):
        raise DegenerateFiberError(
            "degenerate fiber profile (needs A > 0 and a nonzero nonlinear term)")
    ex = exponents_for(params.dim, params.s, params.p)
    A, Bp, Bs = summary.A, summary.B_p, summary.B_star
    cp = params.eta * ex.zeta_p
    e_star = ex.two_star - 2.0
    e_p = ex.zeta_p * params.p - 2.0

    def phi(t):
        return A - t ** e_star * Bs - cp * t ** e_p * Bp

    iters = 0
    lo = hi = 1.0
    f1 = phi(1.0)
    if f1 > 0.0:
        while phi(hi) > 0.0:
            hi *= 2.0
            iters += 1
            if iters > 200:
                raise RuntimeError("fiber root bracket expansion failed")
        lo = hi / 2.0
    elif f1 < 0.0:
        while phi(lo) < 0.0:
            lo *= 0.5
            iters += 1
            if iters > 200:
                raise RuntimeError("fiber root bracket expansion failed")
        hi = lo * 2.0
    else:
        return (1.0, iters) if return_iterations else 1.0
    while hi - lo > 1e-17 * hi and iters < 200:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if phi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
    t = 0.5 * (lo + hi)
    return (t, iters) if return_iterations else t


def fiber_root(profile: FiberProfile, return_iterations: bool = False):
    """The unique xi* with fiber_pohozaev(profile, xi*) = 0; the fiber
    energy is maximal there."""
    out = _fiber_root_t(profile.base, profile.params, return_iterations)
    if return_iterations:
        t, iters = out
        return math.log(t) / profile.params.s, iters
    return math.log(out) / profile.params.s
