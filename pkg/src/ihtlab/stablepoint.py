"""Stable-point verification: fixed-point conditions, minimum-norm solutions
and exhaustive enumeration of stable supports at desk scale.

A point x̄ supported inside a cardinality-k set Γ is an alpha-stable point
when the gradient of the least-squares objective vanishes on Γ and the
smallest on-support magnitude dominates alpha times the largest off-support
gradient entry.  Fixed points of constant-stepsize IHT are exactly the
alpha-stable points for that stepsize.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import SupportSet, pseudo_inverse_apply, restrict
from .errors import BudgetExceededError, InvalidArgumentError

ENUMERATION_BUDGET = 2_000_000
DEFAULT_STABILITY_TOL = 1e-8


@dataclass(frozen=True)
class StablePointReport:
    gamma: SupportSet
    is_stable: bool
    gradient_on_support_norm: float
    min_on_support: float
    max_off_support_gradient: float
    alpha_used: float


@dataclass(frozen=True)
class StableConditionTerms:
    """The four norms entering the stable-point necessary condition.

    A stable point on Γ ≠ Λ with lower stepsize bound alpha requires
    ``lhs_signal + lhs_noise >= alpha * (rhs_signal - rhs_noise)``.
    """

    lhs_signal: float
    lhs_noise: float
    rhs_signal: float
    rhs_noise: float

    def holds_for(self, alpha: float) -> bool:
        return self.lhs_signal + self.lhs_noise >= alpha * (self.rhs_signal - self.rhs_noise)

    def critical_alpha(self) -> float:
        """Largest alpha for which the necessary condition can hold; inf when
        the right-hand side is nonpositive."""
        rhs = self.rhs_signal - self.rhs_noise
        if rhs <= 0:
            return math.inf
        return (self.lhs_signal + self.lhs_noise) / rhs


def min_norm_solution(A: np.ndarray, b: np.ndarray, gamma: SupportSet) -> np.ndarray:
    """Least-squares solution supported on gamma, zero elsewhere."""
    A = np.asarray(A, dtype=float)
    x = np.zeros(A.shape[1])
    if len(gamma) == 0:
        return x
    x[gamma.as_array()] = pseudo_inverse_apply(restrict(A, gamma), np.asarray(b, dtype=float))
    return x


def is_stable_point(
    x_bar: np.ndarray,
    gamma: SupportSet,
    alpha_lb: float,
    A: np.ndarray,
    b: np.ndarray,
    tol: float = DEFAULT_STABILITY_TOL,
    k: int | None = None,
) -> StablePointReport:
    """Check the two stable-point conditions at absolute tolerance ``tol``.

    The gradient condition is tested entrywise (max-norm) on gamma; the
    magnitude condition compares the smallest on-support entry of x̄ against
    ``alpha_lb`` times the largest off-support gradient magnitude.
    """
    if k is not None and len(gamma) != k:
        raise InvalidArgumentError(f"support cardinality {len(gamma)} differs from k={k}")
    x_bar = np.asarray(x_bar, dtype=float)
    if not SupportSet.support_of(x_bar).issubset(gamma):
        raise InvalidArgumentError("x_bar must be supported inside gamma")
    A = np.asarray(A, dtype=float)
    grad = A.T @ (np.asarray(b, dtype=float) - A @ x_bar)
    idx = gamma.as_array()
    on_mask = np.zeros(A.shape[1], dtype=bool)
    on_mask[idx] = True
    grad_on = float(np.max(np.abs(grad[idx]), initial=0.0))
    min_on = float(np.min(np.abs(x_bar[idx]))) if len(idx) else 0.0
    max_off = float(np.max(np.abs(grad[~on_mask]), initial=0.0))
    stable = grad_on <= tol and min_on >= alpha_lb * max_off - tol
    return StablePointReport(
        gamma=gamma,
        is_stable=stable,
        gradient_on_support_norm=grad_on,
        min_on_support=min_on,
        max_off_support_gradient=max_off,
        alpha_used=alpha_lb,
    )


def stable_condition_terms(
    A: np.ndarray,
    x_star: np.ndarray,
    e: np.ndarray,
    gamma: SupportSet,
    lam: SupportSet,
) -> StableConditionTerms:
    """Evaluate the four norms of the stable-point necessary condition.

    Projections onto the complement of range(A_gamma) use a thin QR factor
    rather than an explicitly formed projector.
    """
    if gamma == lam:
        raise InvalidArgumentError("the condition is defined only for gamma != lam")
    if len(gamma) != len(lam):
        raise InvalidArgumentError("gamma and lam must have equal cardinality")
    A = np.asarray(A, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    e = np.asarray(e, dtype=float)
    diff = lam.difference(gamma)
    A_diff = restrict(A, diff)
    z = x_star[diff.as_array()]
    v_signal = A_diff @ z

    A_gamma = restrict(A, gamma)
    lhs_signal = float(np.linalg.norm(pseudo_inverse_apply(A_gamma, v_signal)))
    lhs_noise = float(np.linalg.norm(pseudo_inverse_apply(A_gamma, e)))

    Q, _ = np.linalg.qr(A_gamma)
    w_signal = v_signal - Q @ (Q.T @ v_signal)
    w_noise = e - Q @ (Q.T @ e)
    rhs_signal = float(np.linalg.norm(A_diff.T @ w_signal))
    rhs_noise = float(np.linalg.norm(A_diff.T @ w_noise))
    return StableConditionTerms(
        lhs_signal=lhs_signal,
        lhs_noise=lhs_noise,
        rhs_signal=rhs_signal,
        rhs_noise=rhs_noise,
    )


def enumerate_stable_supports(
    A: np.ndarray,
    b: np.ndarray,
    k: int,
    alpha_lb: float,
    tol: float = DEFAULT_STABILITY_TOL,
) -> list[StablePointReport]:
    """Test every cardinality-k support for stability; return the stable ones.

    Supports are visited in lexicographic order, and each candidate point is
    the minimum-norm solution on its support.  The combinatorial budget caps
    C(N, k) at ``ENUMERATION_BUDGET``.
    """
    A = np.asarray(A, dtype=float)
    N = A.shape[1]
    if math.comb(N, k) > ENUMERATION_BUDGET:
        raise BudgetExceededError(
            f"C({N},{k}) = {math.comb(N, k)} exceeds the enumeration budget {ENUMERATION_BUDGET}"
        )
    stable = []
    for idx in combinations(range(N), k):
        gamma = SupportSet(idx)
        x_bar = min_norm_solution(A, b, gamma)
        report = is_stable_point(x_bar, gamma, alpha_lb, A, b, tol=tol, k=k)
        if report.is_stable:
            stable.append(report)
    return stable
