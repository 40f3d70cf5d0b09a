"""Gradient-projection solvers: constant-stepsize IHT and normalised IHT.

Both variants share the iteration x+ = H_k(x - alpha * grad), differ only in
the stepsize rule, start from x0 = 0, and record a full per-iteration trace
used by the runtime invariant checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SupportSet, ProblemInstance, hard_threshold, objective, restrict, top_support
from .errors import (
    InvalidArgumentError,
    ShapeMismatchError,
    ShrinkageLoopError,
    StationaryPointError,
)

VARIANT_IHT = "iht"
VARIANT_NIHT = "niht"

TERMINATION_STEP_TOL = "step_tol"
TERMINATION_RESIDUAL_TOL = "residual_tol"
TERMINATION_MAX_ITERS = "max_iters"
TERMINATION_STATIONARY = "linesearch_fixed_support_stationary"

# Guard on the stepsize shrinkage loop; termination is guaranteed in exact
# arithmetic but floating point needs a cap.
MAX_SHRINK_STEPS = 200


@dataclass(frozen=True)
class SolverConfig:
    variant: str
    alpha: float | None = None
    kappa: float = 1.1
    c: float = 0.05
    max_iters: int = 10_000
    step_tol: float = 1e-10
    residual_tol: float = 0.0

    def __post_init__(self):
        if self.variant not in (VARIANT_IHT, VARIANT_NIHT):
            raise InvalidArgumentError(f"unknown solver variant {self.variant!r}")
        if self.variant == VARIANT_IHT:
            if self.alpha is None or self.alpha <= 0:
                raise InvalidArgumentError("constant-stepsize IHT requires alpha > 0")
        else:
            if not 0 < self.c < 1:
                raise InvalidArgumentError("N-IHT requires c in (0, 1)")
            if self.kappa * (1.0 - self.c) <= 1.0:
                raise InvalidArgumentError(
                    f"N-IHT requires kappa > 1/(1-c); got kappa={self.kappa}, c={self.c}"
                )
        if self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be >= 1")
        if self.step_tol < 0 or self.residual_tol < 0:
            raise InvalidArgumentError("tolerances must be nonnegative")


@dataclass(eq=False)
class IterateRecord:
    """State at iteration m plus the stepsize applied to leave it.

    ``alpha`` is NaN on the final record (no further step is taken).
    """

    x: np.ndarray
    support: SupportSet
    alpha: float
    objective: float
    used_shrinkage: bool


@dataclass(eq=False)
class SolverTrace:
    iterates: list[IterateRecord] = field(default_factory=list)
    termination_reason: str = ""

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1].x

    @property
    def n_iterations(self) -> int:
        return len(self.iterates) - 1

    def stepsizes(self) -> np.ndarray:
        return np.array([rec.alpha for rec in self.iterates[:-1]])

    def objectives(self) -> np.ndarray:
        return np.array([rec.objective for rec in self.iterates])


@dataclass
class InequalityReport:
    """Result of re-checking the per-iteration descent inequalities on a trace."""

    n_pairs: int
    violations: list[tuple[int, str, float]]
    max_projection_slack: float
    max_taylor_residual: float

    @property
    def ok(self) -> bool:
        return not self.violations


def giht_step(x_m: np.ndarray, alpha_m: float, A: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """One generic iteration: hard-threshold the gradient step."""
    if alpha_m <= 0:
        raise InvalidArgumentError("stepsize must be positive")
    A = np.asarray(A, dtype=float)
    x_m = np.asarray(x_m, dtype=float)
    b = np.asarray(b, dtype=float)
    if x_m.shape != (A.shape[1],) or b.shape != (A.shape[0],):
        raise ShapeMismatchError(f"shapes disagree: A {A.shape}, x {x_m.shape}, b {b.shape}")
    return hard_threshold(x_m - alpha_m * (A.T @ (A @ x_m - b)), k)


def _record(x, A, b, alpha=math.nan, used_shrinkage=False) -> IterateRecord:
    return IterateRecord(
        x=x,
        support=SupportSet.support_of(x),
        alpha=alpha,
        objective=objective(x, A, b),
        used_shrinkage=used_shrinkage,
    )


def run_iht(instance: ProblemInstance, config: SolverConfig) -> SolverTrace:
    """Run constant-stepsize IHT from x0 = 0 until a termination criterion fires.

    Divergent runs (the stepsize violates the convergence condition and the
    iterates overflow) stop early and report ``max_iters``, the
    non-convergence reason.
    """
    if config.variant != VARIANT_IHT:
        raise InvalidArgumentError("run_iht requires an IHT config")
    A, b, k = instance.A, instance.b, instance.k
    trace = SolverTrace()
    x = np.zeros(instance.N)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.max_iters):
            x_next = giht_step(x, config.alpha, A, b, k)
            trace.iterates.append(_record(x, A, b, alpha=config.alpha))
            if not np.all(np.isfinite(x_next)):
                x = x_next
                trace.termination_reason = TERMINATION_MAX_ITERS
                break
            step = float(np.linalg.norm(x_next - x))
            x = x_next
            if step <= config.step_tol:
                trace.termination_reason = TERMINATION_STEP_TOL
                break
            if config.residual_tol > 0 and np.linalg.norm(A @ x - b) <= config.residual_tol:
                trace.termination_reason = TERMINATION_RESIDUAL_TOL
                break
        else:
            trace.termination_reason = TERMINATION_MAX_ITERS
        trace.iterates.append(_record(x, A, b))
    return trace


def niht_stepsize(
    x_m: np.ndarray,
    gamma_m: SupportSet,
    A: np.ndarray,
    b: np.ndarray,
    k: int,
    config: SolverConfig,
) -> tuple[float, bool, np.ndarray]:
    """Stepsize for one N-IHT iteration: exact linesearch, then shrinkage.

    Returns ``(alpha_m, used_shrinkage, x_next)``.  The exact-linesearch value
    is the Rayleigh quotient of the restricted gradient; it is kept when the
    trial point preserves the support, otherwise it is shrunk by kappa*(1-c)
    until the sufficient-decrease inequality admits the trial point.

    Raises ``StationaryPointError`` when the restricted gradient vanishes
    (the linesearch quotient is 0/0); the caller terminates with the current
    iterate.
    """
    if len(gamma_m) == 0:
        raise InvalidArgumentError("stepsize support must be nonempty")
    A = np.asarray(A, dtype=float)
    residual = b - A @ x_m
    g = A.T @ residual  # negative gradient
    g_gamma = g[gamma_m.as_array()]
    num = float(g_gamma @ g_gamma)
    den_vec = restrict(A, gamma_m) @ g_gamma
    den = float(den_vec @ den_vec)
    if num == 0.0 or den == 0.0:
        raise StationaryPointError("restricted gradient is zero; linesearch stepsize is 0/0")
    alpha = num / den
    x_trial = hard_threshold(x_m + alpha * g, k)
    if SupportSet.support_of(x_trial) == gamma_m:
        return alpha, False, x_trial
    shrink = config.kappa * (1.0 - config.c)
    for _ in range(MAX_SHRINK_STEPS):
        diff = x_trial - x_m
        diff_norm2 = float(diff @ diff)
        if diff_norm2 == 0.0:
            # Null trial step: nothing to decrease; accept and let the
            # caller's step tolerance terminate the run.
            return alpha, True, x_trial
        a_diff = A @ diff
        bound = (1.0 - config.c) * diff_norm2 / float(a_diff @ a_diff)
        if alpha < bound:
            return alpha, True, x_trial
        alpha /= shrink
        x_trial = hard_threshold(x_m + alpha * g, k)
    raise ShrinkageLoopError(
        f"shrinkage loop did not exit within {MAX_SHRINK_STEPS} reductions"
    )


def run_niht(instance: ProblemInstance, config: SolverConfig) -> SolverTrace:
    """Run normalised IHT from x0 = 0 until a termination criterion fires."""
    if config.variant != VARIANT_NIHT:
        raise InvalidArgumentError("run_niht requires an N-IHT config")
    A, b, k = instance.A, instance.b, instance.k
    trace = SolverTrace()
    x = np.zeros(instance.N)
    for _ in range(config.max_iters):
        gamma = SupportSet.support_of(x)
        if len(gamma) == 0:
            # x = 0 carries no support; use the support the next projection
            # would select, i.e. the k largest gradient magnitudes.
            g0 = A.T @ (b - A @ x)
            if not np.any(g0):
                trace.termination_reason = TERMINATION_STATIONARY
                break
            gamma = top_support(g0, k)
        try:
            alpha, used_shrinkage, x_next = niht_stepsize(x, gamma, A, b, k, config)
        except StationaryPointError:
            trace.termination_reason = TERMINATION_STATIONARY
            break
        trace.iterates.append(_record(x, A, b, alpha=alpha, used_shrinkage=used_shrinkage))
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        if step <= config.step_tol:
            trace.termination_reason = TERMINATION_STEP_TOL
            break
        if config.residual_tol > 0 and np.linalg.norm(A @ x - b) <= config.residual_tol:
            trace.termination_reason = TERMINATION_RESIDUAL_TOL
            break
    else:
        trace.termination_reason = TERMINATION_MAX_ITERS
    trace.iterates.append(_record(x, A, b))
    return trace


def run_solver(instance: ProblemInstance, config: SolverConfig) -> SolverTrace:
    if config.variant == VARIANT_IHT:
        return run_iht(instance, config)
    return run_niht(instance, config)


def check_iterate_inequalities(
    trace: SolverTrace, A: np.ndarray, b: np.ndarray, tol: float = 1e-10
) -> InequalityReport:
    """Re-verify the projection inequality and the exact Taylor identity.

    For every consecutive iterate pair the projection property gives
    ``||x+ - x||^2 + 2*alpha*g.(x+ - x) <= 0`` up to ``tol*(1+||x||^2)``,
    and since the objective is quadratic,
    ``Psi(x+) - Psi(x) = g.(x+ - x) + 0.5*||A(x+ - x)||^2`` must hold to
    ``tol`` relative.
    """
    A = np.asarray(A, dtype=float)
    violations: list[tuple[int, str, float]] = []
    max_slack = 0.0
    max_taylor = 0.0
    pairs = list(zip(trace.iterates[:-1], trace.iterates[1:]))
    for m, (rec, rec_next) in enumerate(pairs):
        x, x_next, alpha = rec.x, rec_next.x, rec.alpha
        if not np.isfinite(alpha):
            continue
        g = A.T @ (A @ x - b)
        diff = x_next - x
        slack = float(diff @ diff + 2.0 * alpha * (g @ diff))
        max_slack = max(max_slack, slack)
        if slack > tol * (1.0 + float(x @ x)):
            violations.append((m, "projection", slack))
        a_diff = A @ diff
        taylor = abs(
            (rec_next.objective - rec.objective)
            - (float(g @ diff) + 0.5 * float(a_diff @ a_diff))
        )
        scale = max(1.0, abs(rec.objective), abs(rec_next.objective))
        max_taylor = max(max_taylor, taylor / scale)
        if taylor > tol * scale:
            violations.append((m, "taylor", taylor / scale))
    return InequalityReport(
        n_pairs=len(pairs),
        violations=violations,
        max_projection_slack=max_slack,
        max_taylor_residual=max_taylor,
    )
