"""Dense linear-algebra kernels, Gaussian ensembles and the hard-threshold projection.

Everything here is pure given its inputs.  Samplers draw from explicit,
counter-based random streams (``RngSpec``) so that concurrent trials are
order-independent and bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, ShapeMismatchError, SingularMatrixError

# Condition-number estimate above which a least-squares subproblem is
# treated as rank deficient.  Exact general position holds almost surely
# for Gaussian ensembles but not in floating point.
RANK_DEFICIENCY_CONDITION = 1e12

COEFFICIENT_MODELS = ("unit", "gaussian", "uniform")


@dataclass(frozen=True)
class RngSpec:
    """Identifies one reproducible random stream.

    Identical ``(master_seed, stream_id)`` pairs reproduce identical draws.
    ``substream`` derives further independent streams (e.g. one per Monte
    Carlo trial) without any shared mutable state.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return self.substream()

    def substream(self, *keys: int) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_id, *keys)
        )
        return np.random.Generator(np.random.Philox(seq))


def _as_generator(rng: RngSpec | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    return rng


@dataclass(frozen=True)
class SupportSet:
    """Strictly increasing set of column/coefficient indices (0-based)."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = self.indices
        if any(int(i) != i or i < 0 for i in idx):
            raise InvalidArgumentError(f"support indices must be nonnegative integers: {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidArgumentError(f"support indices must be strictly increasing: {idx}")
        object.__setattr__(self, "indices", tuple(int(i) for i in idx))

    @classmethod
    def from_iterable(cls, it) -> "SupportSet":
        return cls(tuple(sorted(set(int(i) for i in it))))

    @classmethod
    def support_of(cls, x: np.ndarray) -> "SupportSet":
        return cls(tuple(int(i) for i in np.flatnonzero(x)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def difference(self, other: "SupportSet") -> "SupportSet":
        return SupportSet.from_iterable(set(self.indices) - set(other.indices))

    def intersection(self, other: "SupportSet") -> "SupportSet":
        return SupportSet.from_iterable(set(self.indices) & set(other.indices))

    def union(self, other: "SupportSet") -> "SupportSet":
        return SupportSet.from_iterable(set(self.indices) | set(other.indices))

    def complement(self, n_total: int) -> "SupportSet":
        return SupportSet.from_iterable(set(range(n_total)) - set(self.indices))

    def issubset(self, other: "SupportSet") -> bool:
        return set(self.indices) <= set(other.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return i in self.indices


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One sparse-recovery instance: measurements b = A x* + e with k-sparse x*."""

    A: np.ndarray
    b: np.ndarray
    x_star: np.ndarray
    e: np.ndarray
    k: int
    sigma: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        n, N = A.shape
        if not 0 < 2 * self.k <= n <= N:
            raise InvalidArgumentError(
                f"problem dimensions must satisfy 0 < 2k <= n <= N, got k={self.k}, n={n}, N={N}"
            )
        if self.sigma < 0:
            raise InvalidArgumentError("sigma must be nonnegative")
        if self.b.shape != (n,) or self.e.shape != (n,) or self.x_star.shape != (N,):
            raise ShapeMismatchError("b, e must have length n and x_star length N")
        nnz = int(np.count_nonzero(self.x_star))
        if nnz != self.k:
            raise InvalidArgumentError(f"x_star must have exactly k={self.k} nonzeros, found {nnz}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def true_support(self) -> SupportSet:
        return SupportSet.support_of(self.x_star)

    @classmethod
    def from_parts(cls, A, x_star, e, k, sigma=0.0) -> "ProblemInstance":
        """Assemble b = A x* + e from its parts."""
        A = np.asarray(A, dtype=float)
        x_star = np.asarray(x_star, dtype=float)
        e = np.asarray(e, dtype=float)
        b = A @ x_star + e
        return cls(A=A, b=b, x_star=x_star, e=e, k=k, sigma=sigma)

    def consistency_residual(self) -> float:
        """Max-norm deviation of b from A x* + e; bounded by 1e-12*n by construction."""
        return float(np.max(np.abs(self.A @ self.x_star + self.e - self.b), initial=0.0))


def top_support(x: np.ndarray, k: int) -> SupportSet:
    """Indices of the k largest-magnitude entries, ties broken by lowest index."""
    x = np.asarray(x, dtype=float)
    if not 1 <= k <= x.shape[0]:
        raise InvalidArgumentError(f"k must satisfy 1 <= k <= len(x), got k={k}, len={x.shape[0]}")
    # Stable sort on descending magnitude keeps the lowest original index
    # first among equal magnitudes.
    order = np.argsort(-np.abs(x), kind="stable")
    return SupportSet.from_iterable(order[:k])


def hard_threshold(x: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries of x and zero the rest.

    Ties are broken towards the lowest index so that the projection is
    deterministic.
    """
    x = np.asarray(x, dtype=float)
    supp = top_support(x, k)
    out = np.zeros_like(x)
    idx = supp.as_array()
    out[idx] = x[idx]
    return out


def restrict(A: np.ndarray, gamma: SupportSet) -> np.ndarray:
    """Column submatrix of A indexed by gamma, in gamma's order."""
    A = np.asarray(A, dtype=float)
    if len(gamma) and max(gamma.indices) >= A.shape[1]:
        raise InvalidArgumentError(
            f"support index {max(gamma.indices)} out of range for {A.shape[1]} columns"
        )
    return A[:, gamma.as_array()].copy()


def pseudo_inverse_apply(A_gamma: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Least-squares solution y of A_gamma y ~ v via a thin QR factorization.

    Raises ``SingularMatrixError`` when the condition estimate of the factor
    exceeds ``RANK_DEFICIENCY_CONDITION``.
    """
    A_gamma = np.asarray(A_gamma, dtype=float)
    v = np.asarray(v, dtype=float)
    if A_gamma.ndim != 2 or v.shape != (A_gamma.shape[0],):
        raise ShapeMismatchError(
            f"expected matrix ({A_gamma.shape}) and vector of length {A_gamma.shape[0]}"
        )
    m, p = A_gamma.shape
    if p == 0:
        return np.zeros(0)
    if p > m:
        raise InvalidArgumentError("submatrix must have at least as many rows as columns")
    Q, R = np.linalg.qr(A_gamma)
    diag = np.abs(np.diag(R))
    cond = np.inf if diag.min() == 0.0 else float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > RANK_DEFICIENCY_CONDITION:
        raise SingularMatrixError(cond)
    return scipy.linalg.solve_triangular(R, Q.T @ v)


def objective(x: np.ndarray, A: np.ndarray, b: np.ndarray) -> float:
    """Half squared residual norm 0.5*||Ax - b||^2."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if x.shape != (A.shape[1],) or b.shape != (A.shape[0],):
        raise ShapeMismatchError(f"shapes disagree: A {A.shape}, x {x.shape}, b {b.shape}")
    r = A @ x - b
    return 0.5 * float(r @ r)


def sample_gaussian_matrix(n: int, N: int, rng: RngSpec | np.random.Generator) -> np.ndarray:
    """n-by-N matrix with i.i.d. normal entries of mean 0 and variance 1/n."""
    if n < 1 or N < 1:
        raise InvalidArgumentError("matrix dimensions must be >= 1")
    gen = _as_generator(rng)
    return gen.normal(0.0, 1.0 / np.sqrt(n), size=(n, N))


def sample_sparse_signal(
    N: int, k: int, coefficient_model: str, rng: RngSpec | np.random.Generator
) -> np.ndarray:
    """Exactly-k-sparse signal on a uniformly random support.

    Coefficient models: ``unit`` (random sign, magnitude 1), ``gaussian``
    (standard normal) and ``uniform`` (random sign, magnitude uniform on
    [1, 2]).
    """
    if coefficient_model not in COEFFICIENT_MODELS:
        raise InvalidArgumentError(
            f"unknown coefficient model {coefficient_model!r}; choose from {COEFFICIENT_MODELS}"
        )
    if not 1 <= k <= N:
        raise InvalidArgumentError(f"k must satisfy 1 <= k <= N, got k={k}, N={N}")
    gen = _as_generator(rng)
    support = gen.choice(N, size=k, replace=False)
    x = np.zeros(N)
    if coefficient_model == "unit":
        coeffs = gen.choice([-1.0, 1.0], size=k)
    elif coefficient_model == "gaussian":
        coeffs = gen.standard_normal(k)
        # Resample exact zeros so the signal has exactly k nonzeros.
        while np.any(coeffs == 0.0):
            coeffs[coeffs == 0.0] = gen.standard_normal(int(np.sum(coeffs == 0.0)))
    else:
        coeffs = gen.choice([-1.0, 1.0], size=k) * gen.uniform(1.0, 2.0, size=k)
    x[support] = coeffs
    return x


def sample_noise(n: int, sigma: float, rng: RngSpec | np.random.Generator) -> np.ndarray:
    """Noise vector with i.i.d. N(0, sigma^2/n) entries, so E||e||^2 = sigma^2."""
    if sigma < 0:
        raise InvalidArgumentError("sigma must be nonnegative")
    if sigma == 0.0:
        return np.zeros(n)
    gen = _as_generator(rng)
    return gen.normal(0.0, sigma / np.sqrt(n), size=n)


def sample_instance(
    n: int,
    N: int,
    k: int,
    sigma: float,
    rng: RngSpec | np.random.Generator,
    coefficient_model: str = "gaussian",
) -> ProblemInstance:
    """Draw a full random instance: Gaussian A, sparse x*, Gaussian noise."""
    gen = _as_generator(rng)
    A = sample_gaussian_matrix(n, N, gen)
    x_star = sample_sparse_signal(N, k, coefficient_model, gen)
    e = sample_noise(n, sigma, gen)
    return ProblemInstance.from_parts(A, x_star, e, k, sigma)
