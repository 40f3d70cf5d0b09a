"""Phase-transition lower bounds, admissible stepsize intervals and noise
stability factors, plus deterministic CSV emission of the curve/surface grids.

All quantities combine the implicit tail-bound roots from ``asymptotics``
with asymptotic Gaussian RIP bounds supplied by a ``RipBoundProvider``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import TailInputs, tail_if, tail_il, tail_iu
from .errors import InvalidArgumentError, NumericalDomainError, StabilityUndefinedError
from .rip import RipBoundProvider

RHO_BRACKET_LO = 1e-8
RHO_BRACKET_HI = 0.5

XI_NIHT_AS_PRINTED = "as_printed"
XI_NIHT_WITH_ONE_PLUS_A = "with_one_plus_a"
XI_NIHT_VARIANTS = (XI_NIHT_AS_PRINTED, XI_NIHT_WITH_ONE_PLUS_A)


@dataclass(frozen=True)
class TransitionResult:
    delta: float
    rho_hat: float
    residual: float
    provider_id: str
    saturated: bool = False


@dataclass(frozen=True)
class StabilityResult:
    a: float
    xi: float
    alpha_interval: tuple[float, float] | None = None


def lhs_stable(delta: float, rho: float) -> float:
    """Left side of the transition equation: sqrt(IF)/[(1-rho)(1 - IL(delta,rho,1-rho))]."""
    if not 0 < rho <= 0.5:
        raise InvalidArgumentError(f"rho must lie in (0, 1/2], got {rho}")
    f_root = tail_if(delta, rho).value
    il_root = tail_il(TailInputs(delta, rho, 1.0 - rho)).value
    denom = (1.0 - rho) * (1.0 - il_root)
    if denom < 1e-300:
        raise NumericalDomainError("stable-point denominator underflow")
    return math.sqrt(f_root) / denom


def _solve_rho(delta: float, rhs_of_rho, provider_id: str) -> TransitionResult:
    """Bisect lhs_stable(delta, rho) = rhs(rho) for rho in the standard bracket.

    The left side is strictly increasing and the right side nonincreasing in
    rho, so the crossing is unique; if the left side stays below the right
    side on the whole bracket, the result saturates at rho = 1/2.
    """
    g = lambda rho: lhs_stable(delta, rho) - rhs_of_rho(rho)
    lo, hi = RHO_BRACKET_LO, RHO_BRACKET_HI
    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 0:
        raise NumericalDomainError(
            f"no crossing: transition lies below rho={lo} at delta={delta} (provider {provider_id})"
        )
    if g_hi < 0:
        return TransitionResult(
            delta=delta, rho_hat=hi, residual=abs(g_hi), provider_id=provider_id, saturated=True
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) <= 0:
            lo = mid
        else:
            hi = mid
    rho_hat = 0.5 * (lo + hi)
    return TransitionResult(
        delta=delta, rho_hat=rho_hat, residual=abs(g(rho_hat)), provider_id=provider_id
    )


def rho_hat_iht(delta: float, provider: RipBoundProvider) -> TransitionResult:
    """Phase-transition lower bound for constant-stepsize IHT."""
    def rhs(rho: float) -> float:
        _, U = provider.query(delta, 2.0 * rho)
        return 1.0 / (1.0 + U)

    return _solve_rho(delta, rhs, provider.provider_id)


def rho_hat_niht(delta: float, kappa: float, provider: RipBoundProvider) -> TransitionResult:
    """Phase-transition lower bound for normalised IHT with parameter kappa."""
    if kappa < 1.0:
        raise InvalidArgumentError(f"kappa must be >= 1, got {kappa}")

    def rhs(rho: float) -> float:
        _, U = provider.query(delta, 2.0 * rho)
        return 1.0 / (kappa * (1.0 + U))

    return _solve_rho(delta, rhs, provider.provider_id)


def stepsize_interval_iht(
    delta: float, rho: float, provider: RipBoundProvider
) -> tuple[float, float] | None:
    """Admissible IHT stepsize interval (lo, hi); None when empty."""
    lo = lhs_stable(delta, rho)
    _, U = provider.query(delta, 2.0 * rho)
    hi = 1.0 / (1.0 + U)
    if lo >= hi:
        return None
    return lo, hi


def _iu_product_term(delta: float, rho: float) -> float:
    iu1 = tail_iu(TailInputs(delta, rho, 1.0 - rho)).value
    iu2 = tail_iu(TailInputs(delta, rho, rho)).value
    return math.sqrt(rho * (1.0 - rho) * (1.0 + iu1) * (1.0 + iu2))


def _stability_core(delta: float, rho: float, alpha: float, one_plus_a: bool) -> tuple[float, float]:
    """Shared a/xi computation; ``alpha`` is the effective lower stepsize."""
    f_root = tail_if(delta, rho).value
    sqrt_f = math.sqrt(f_root)
    il_root = tail_il(TailInputs(delta, rho, 1.0 - rho)).value
    denom = alpha * (1.0 - rho) * (1.0 - il_root) - sqrt_f
    if denom <= 0:
        raise StabilityUndefinedError(
            f"stability undefined at delta={delta}, rho={rho}: "
            f"alpha*(1-rho)*(1-IL) = {alpha * (1.0 - rho) * (1.0 - il_root):.6g} "
            f"does not exceed sqrt(IF) = {sqrt_f:.6g}"
        )
    a = (sqrt_f + alpha * _iu_product_term(delta, rho)) / denom
    if one_plus_a:
        xi = math.sqrt(f_root * (1.0 + a) ** 2 + a**2)
    else:
        xi = math.sqrt(f_root * a**2 + a**2)
    return a, xi


def stability_factor_iht(
    delta: float, rho: float, alpha: float, provider: RipBoundProvider | None = None
) -> StabilityResult:
    """Noise stability factor for IHT at stepsize alpha.

    Requires alpha strictly above the stable-point threshold; the optional
    provider fills in the admissible stepsize interval.
    """
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be positive")
    a, xi = _stability_core(delta, rho, alpha, one_plus_a=True)
    interval = stepsize_interval_iht(delta, rho, provider) if provider is not None else None
    return StabilityResult(a=a, xi=xi, alpha_interval=interval)


def stability_factor_niht(
    delta: float,
    rho: float,
    kappa: float,
    provider: RipBoundProvider,
    xi_variant: str = XI_NIHT_AS_PRINTED,
) -> StabilityResult:
    """Noise stability factor for N-IHT.

    The stepsize role is played by the guaranteed lower bound
    ``1/(kappa*(1+U(delta, 2*rho)))``.  ``xi_variant`` selects between the
    factor exactly as defined (``as_printed``, the default) and the variant
    carrying the extra ``(1+a)^2`` term that mirrors the IHT factor
    (``with_one_plus_a``); the two disagree in the source analysis and both
    are kept available.
    """
    if xi_variant not in XI_NIHT_VARIANTS:
        raise InvalidArgumentError(f"xi_variant must be one of {XI_NIHT_VARIANTS}")
    if kappa < 1.0:
        raise InvalidArgumentError(f"kappa must be >= 1, got {kappa}")
    _, U = provider.query(delta, 2.0 * rho)
    alpha_eff = 1.0 / (kappa * (1.0 + U))
    a, xi = _stability_core(
        delta, rho, alpha_eff, one_plus_a=(xi_variant == XI_NIHT_WITH_ONE_PLUS_A)
    )
    return StabilityResult(a=a, xi=xi, alpha_interval=None)


def default_delta_grid(num: int = 100, lo: float = 1e-3, hi: float = 1.0) -> np.ndarray:
    """Log-spaced delta grid matching the qualitative range of the curves."""
    return np.logspace(math.log10(lo), math.log10(hi), num)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


GRID_KINDS = ("phase_iht", "phase_niht", "xi_iht", "xi_niht", "stepsize_iht")


def grid_emit(
    kind: str,
    provider: RipBoundProvider,
    delta_grid,
    rho_grid=None,
    kappa: float = 1.1,
    alpha: float | None = None,
    xi_variant: str = XI_NIHT_AS_PRINTED,
) -> list[str]:
    """Deterministic CSV rows (header first) for one curve or surface.

    Curves (``phase_*``) carry ``delta,rho_hat,residual``; surfaces
    (``xi_*``) carry ``delta,rho,xi``; the stepsize grid carries
    ``delta,rho,alpha_lo,alpha_hi``.  Points where a quantity is undefined
    emit empty fields.
    """
    if kind not in GRID_KINDS:
        raise InvalidArgumentError(f"unknown grid kind {kind!r}; choose from {GRID_KINDS}")
    rows: list[str] = []
    if kind in ("phase_iht", "phase_niht"):
        rows.append("delta,rho_hat,residual")
        for delta in delta_grid:
            if kind == "phase_iht":
                res = rho_hat_iht(float(delta), provider)
            else:
                res = rho_hat_niht(float(delta), kappa, provider)
            rows.append(f"{_fmt(float(delta))},{_fmt(res.rho_hat)},{_fmt(res.residual)}")
        return rows
    if rho_grid is None:
        raise InvalidArgumentError(f"grid kind {kind!r} requires a rho grid")
    if kind == "stepsize_iht":
        rows.append("delta,rho,alpha_lo,alpha_hi")
        for delta in delta_grid:
            for rho in rho_grid:
                interval = stepsize_interval_iht(float(delta), float(rho), provider)
                lo, hi = interval if interval is not None else (None, None)
                rows.append(f"{_fmt(float(delta))},{_fmt(float(rho))},{_fmt(lo)},{_fmt(hi)}")
        return rows
    rows.append("delta,rho,xi")
    for delta in delta_grid:
        for rho in rho_grid:
            try:
                if kind == "xi_iht":
                    if alpha is not None:
                        result = stability_factor_iht(float(delta), float(rho), alpha)
                    else:
                        interval = stepsize_interval_iht(float(delta), float(rho), provider)
                        if interval is None:
                            raise StabilityUndefinedError("empty stepsize interval")
                        result = stability_factor_iht(
                            float(delta), float(rho), 0.5 * (interval[0] + interval[1])
                        )
                else:
                    result = stability_factor_niht(
                        float(delta), float(rho), kappa, provider, xi_variant=xi_variant
                    )
                xi: float | None = result.xi
            except StabilityUndefinedError:
                xi = None
            rows.append(f"{_fmt(float(delta))},{_fmt(float(rho))},{_fmt(xi)}")
    return rows


def curve_monotonicity_flags(rows: list[str]) -> list[bool]:
    """Per-row flags marking whether rho_hat is nondecreasing along the curve."""
    values = []
    for row in rows[1:]:
        fields = row.split(",")
        values.append(float(fields[1]) if fields[1] else math.nan)
    flags = [True]
    for prev, cur in zip(values, values[1:]):
        flags.append(not (cur < prev))
    return flags


def write_grid_csv(path, rows: list[str]) -> None:
    """UTF-8, LF-terminated CSV output."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(row + "\n")
