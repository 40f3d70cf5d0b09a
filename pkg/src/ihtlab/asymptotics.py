"""Entropy, implicit tail-bound functions, chi-square/F oracles and the
uniform asymptotics that back the large-deviation analysis.

The three tail-bound functions are defined implicitly as roots of strictly
monotone one-dimensional equations; they are solved by bracketed bisection
followed by a single Newton polish, which trades speed for unconditional
convergence on the (delta, rho) grids used downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sp

from .errors import InvalidArgumentError

BISECTION_WIDTH = 1e-13
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class TailInputs:
    """Query point (delta, rho, lam) for the chi-square tail bounds.

    ``delta`` and ``lam`` lie in (0, 1]; ``rho`` lies in (0, 1] for the
    chi-square bounds and in (0, 1/2] for the F bound.
    """

    delta: float
    rho: float
    lam: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise InvalidArgumentError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0 < self.rho <= 1:
            raise InvalidArgumentError(f"rho must lie in (0, 1], got {self.rho}")
        if not 0 < self.lam <= 1:
            raise InvalidArgumentError(f"lambda must lie in (0, 1], got {self.lam}")


@dataclass(frozen=True)
class RootResult:
    value: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    boundary: bool = False


def shannon_entropy(p: float) -> float:
    """Natural-log Shannon entropy of a Bernoulli(p), with H(0) = H(1) = 0."""
    if not 0 <= p <= 1:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-sp.xlogy(p, p) - sp.xlogy(1.0 - p, 1.0 - p))


def _bisect_newton(g, gprime, target, lo, hi, max_iter=200):
    """Root of g(x) = target on a bracket where g is strictly increasing."""
    g_lo = g(lo) - target
    g_hi = g(hi) - target
    if g_lo > 0 or g_hi < 0:
        raise InvalidArgumentError("root not bracketed")
    iterations = 0
    a, b = lo, hi
    while b - a > BISECTION_WIDTH * max(1.0, abs(b)) and iterations < max_iter:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if g(mid) - target <= 0:
            a = mid
        else:
            b = mid
        iterations += 1
    x = 0.5 * (a + b)
    # One Newton polish; keep the result strictly inside the bracket.
    deriv = gprime(x)
    if deriv > 0:
        step = (g(x) - target) / deriv
        candidate = x - step
        if lo < candidate < hi:
            x = candidate
    x = min(max(x, np.nextafter(lo, hi)), np.nextafter(hi, lo))
    residual = g(x) - target
    return x, float(residual), iterations, (lo, hi)


def tail_iu(inputs: TailInputs) -> RootResult:
    """Upper chi-square tail bound: the nu > 0 with nu - ln(1+nu) = 2H(delta*rho)/lam."""
    target = 2.0 * shannon_entropy(inputs.delta * inputs.rho) / inputs.lam
    if target == 0.0:
        return RootResult(value=0.0, residual=0.0, iterations=0, bracket=(0.0, 0.0), boundary=True)
    g = lambda nu: nu - math.log1p(nu)
    gprime = lambda nu: nu / (1.0 + nu)
    hi = 1.0
    while g(hi) <= target:
        hi *= 2.0
    value, residual, iterations, bracket = _bisect_newton(g, gprime, target, 0.0, hi)
    return RootResult(value=value, residual=residual, iterations=iterations, bracket=bracket)


def tail_il(inputs: TailInputs) -> RootResult:
    """Lower chi-square tail bound: the nu in (0,1) with -nu - ln(1-nu) = 2H(delta*rho)/lam."""
    target = 2.0 * shannon_entropy(inputs.delta * inputs.rho) / inputs.lam
    if target == 0.0:
        return RootResult(value=0.0, residual=0.0, iterations=0, bracket=(0.0, 0.0), boundary=True)
    g = lambda nu: -nu - math.log1p(-nu)
    gprime = lambda nu: nu / (1.0 - nu)
    value, residual, iterations, bracket = _bisect_newton(g, gprime, target, 0.0, 1.0 - 1e-15)
    return RootResult(value=value, residual=residual, iterations=iterations, bracket=bracket)


def tail_if(delta: float, rho: float) -> RootResult:
    """F tail bound: the f > rho/(1-rho) with ln(1+f) - rho*ln(f) = 2H(delta*rho) + H(rho)."""
    if not 0 < delta <= 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1], got {delta}")
    if not 0 < rho <= 0.5:
        raise InvalidArgumentError(f"rho must lie in (0, 1/2], got {rho}")
    target = 2.0 * shannon_entropy(delta * rho) + shannon_entropy(rho)
    g = lambda f: math.log1p(f) - rho * math.log(f)
    gprime = lambda f: 1.0 / (1.0 + f) - rho / f
    lo = rho / (1.0 - rho)
    hi = max(2.0 * lo, 1.0)
    while g(hi) <= target:
        hi *= 2.0
    value, residual, iterations, bracket = _bisect_newton(g, gprime, target, lo, hi)
    return RootResult(value=value, residual=residual, iterations=iterations, bracket=bracket)


def regularized_gamma_p(s: float, t: float) -> float:
    """Lower regularized incomplete gamma function P(s, t)."""
    return float(sp.gammainc(s, t))


def regularized_gamma_q(s: float, t: float) -> float:
    """Upper regularized incomplete gamma function Q(s, t) = 1 - P(s, t)."""
    return float(sp.gammaincc(s, t))


def regularized_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    return float(sp.betainc(a, b, x))


def chi2_cdf(x, dof):
    """Chi-square CDF with ``dof`` degrees of freedom."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidArgumentError("chi-square CDF requires x >= 0")
    if np.any(np.asarray(dof) < 1):
        raise InvalidArgumentError("degrees of freedom must be >= 1")
    out = sp.gammainc(np.asarray(dof, dtype=float) / 2.0, x / 2.0)
    return float(out) if out.ndim == 0 else out


def f_cdf(x, d1, d2):
    """F-distribution CDF with (d1, d2) degrees of freedom."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidArgumentError("F CDF requires x >= 0")
    if np.any(np.asarray(d1) < 1) or np.any(np.asarray(d2) < 1):
        raise InvalidArgumentError("degrees of freedom must be >= 1")
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    out = sp.betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))
    return float(out) if out.ndim == 0 else out


def scaled_f_cdf(x, k: int, n: int):
    """CDF of (k/(n-k+1)) * F(k, n-k+1), the law of the squared overlap ratio."""
    d2 = n - k + 1
    return f_cdf(np.asarray(x, dtype=float) * d2 / k, k, d2)


def temme_gamma_eta(s: float, t: float, branch: str) -> tuple[float, float]:
    """Uniform-asymptotic leading term for the regularized incomplete gamma.

    For the upper branch (0 < s < t) returns ``eta > 0`` with
    ``eta^2/2 = t/s - 1 - ln(t/s)`` and the approximation
    ``Q(s, t) ~ 0.5*erfc(eta*sqrt(s/2))``; the lower branch (s > t > 0)
    mirrors the sign and approximates P(s, t).  The residual decays like
    ``s^{-1/2} * exp(-s*eta^2/2)`` at fixed t/s.
    """
    if branch not in ("Q", "P"):
        raise InvalidArgumentError(f"branch must be 'Q' or 'P', got {branch!r}")
    if branch == "Q" and not 0 < s < t:
        raise InvalidArgumentError(f"branch 'Q' requires 0 < s < t, got s={s}, t={t}")
    if branch == "P" and not s > t > 0:
        raise InvalidArgumentError(f"branch 'P' requires s > t > 0, got s={s}, t={t}")
    mu = t / s
    eta_sq = 2.0 * (mu - 1.0 - math.log(mu))
    eta_abs = math.sqrt(max(eta_sq, 0.0))
    if branch == "Q":
        eta = eta_abs
        leading = 0.5 * math.erfc(eta * math.sqrt(s / 2.0))
    else:
        eta = -eta_abs
        leading = 0.5 * math.erfc(-eta * math.sqrt(s / 2.0))
    return eta, leading


def temme_beta_eta(d1: float, d2: float, beta: float) -> tuple[float, float]:
    """Uniform-asymptotic leading term for the regularized incomplete beta.

    ``eta`` has magnitude sqrt(2*KL((p, 1-p) || (beta, 1-beta))) with
    p = d1/(d1+d2) and the sign of ``beta - p``; the approximation is
    ``I_beta(d1, d2) ~ 0.5*erfc(-eta*sqrt((d1+d2)/2))``, which vanishes
    below the concentration point p and tends to one above it.
    """
    if not d1 > d2 > 0:
        raise InvalidArgumentError(f"requires d1 > d2 > 0, got d1={d1}, d2={d2}")
    if not 0 < beta < 1:
        raise InvalidArgumentError(f"beta must lie in (0, 1), got {beta}")
    p = d1 / (d1 + d2)
    neg_half_eta_sq = p * math.log(beta / p) + (1.0 - p) * math.log((1.0 - beta) / (1.0 - p))
    eta = math.copysign(math.sqrt(max(-2.0 * neg_half_eta_sq, 0.0)), beta - p)
    leading = 0.5 * math.erfc(-eta * math.sqrt((d1 + d2) / 2.0))
    return eta, leading


def chi2_rate(nu: float, gamma: float, branch: str) -> float:
    """Exponential decay rate of normalised chi-square tails.

    ``(1/n) ln P(X >= 1+nu) -> -(gamma/2)[nu - ln(1+nu)]`` on the upper
    branch and ``(1/n) ln P(X <= 1-nu) -> -(gamma/2)[-nu - ln(1-nu)]`` on
    the lower branch, where X ~ chi^2_l / l and l/n -> gamma.
    """
    if not 0 < gamma <= 1:
        raise InvalidArgumentError(f"gamma must lie in (0, 1], got {gamma}")
    if branch == "upper":
        if nu <= 0:
            raise InvalidArgumentError("upper branch requires nu > 0")
        return -(gamma / 2.0) * (nu - math.log1p(nu))
    if branch == "lower":
        if not 0 < nu < 1:
            raise InvalidArgumentError("lower branch requires nu in (0, 1)")
        return -(gamma / 2.0) * (-nu - math.log1p(-nu))
    raise InvalidArgumentError(f"branch must be 'upper' or 'lower', got {branch!r}")


def f_rate(f: float, rho: float) -> float:
    """Decay-rate magnitude for the scaled F tail.

    Returns ``r = 0.5*[ln(1+f) - rho*ln(f) - H(rho)]`` with the convention
    ``(1/n) ln P(X_n >= f) -> -r`` for X_n ~ (k/(n-k+1)) F(k, n-k+1) and
    k/n -> rho; valid for f > rho/(1-rho), where r >= 0.
    """
    if not 0 < rho < 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1), got {rho}")
    if f <= rho / (1.0 - rho):
        raise InvalidArgumentError(f"requires f > rho/(1-rho) = {rho / (1.0 - rho)}, got {f}")
    return 0.5 * (math.log1p(f) - rho * math.log(f) - shannon_entropy(rho))


def binom_entropy_limit(delta: float, rho: float) -> float:
    """Growth exponent of the support count: (1/n) ln C(N, k) -> H(delta*rho)/delta."""
    if not 0 < delta <= 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1], got {delta}")
    if not 0 < rho <= 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1], got {rho}")
    return shannon_entropy(delta * rho) / delta
