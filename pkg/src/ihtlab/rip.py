"""Restricted-isometry constants: exact enumeration, Monte Carlo inner
estimates, and a pluggable provider for asymptotic Gaussian bound tables.

The analytic asymptotic bound expressions are external to this package; they
enter only through a ``RipBoundProvider`` backed by a data table (or a
constant override for testing).  The shipped default table is produced by
large-n Monte Carlo simulation; see ``scripts/make_rip_table.py``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .core import RngSpec, _as_generator
from .errors import (
    BudgetExceededError,
    InvalidArgumentError,
    NumericalDomainError,
    TableFormatError,
)

ENUMERATION_BUDGET = 2_000_000

METHOD_EXACT = "exact"
METHOD_MONTE_CARLO = "monte_carlo"
METHOD_PROVIDER_TABLE = "provider_table"

TABLE_HEADER_PREFIX = "# rip-table v1"

DEFAULT_TABLE_PATH = Path(__file__).parent / "data" / "rip_table_default.csv"


@dataclass(frozen=True)
class RipConstants:
    """Two-sided restricted-isometry constants of order s.

    ``L = 1 - min eig`` and ``U = max eig - 1`` of the order-s Gram
    submatrices; L < 1 iff every s-column submatrix has full rank.
    """

    s: int
    L: float
    U: float
    method: str

    @property
    def general_position(self) -> bool:
        return self.L < 1.0


def _gram_eig_range(A: np.ndarray, support: np.ndarray) -> tuple[float, float]:
    sub = A[:, support]
    w = np.linalg.eigvalsh(sub.T @ sub)
    return float(w[0]), float(w[-1])


def rip_exact(A: np.ndarray, s: int) -> RipConstants:
    """Exact order-s RIP constants by enumerating all C(N, s) supports."""
    A = np.asarray(A, dtype=float)
    N = A.shape[1]
    if not 1 <= s <= min(A.shape):
        raise InvalidArgumentError(f"order s must satisfy 1 <= s <= min(n, N), got {s}")
    if math.comb(N, s) > ENUMERATION_BUDGET:
        raise BudgetExceededError(
            f"C({N},{s}) = {math.comb(N, s)} exceeds the enumeration budget {ENUMERATION_BUDGET}"
        )
    min_eig = math.inf
    max_eig = -math.inf
    for idx in combinations(range(N), s):
        lo, hi = _gram_eig_range(A, np.asarray(idx, dtype=np.intp))
        min_eig = min(min_eig, lo)
        max_eig = max(max_eig, hi)
    return RipConstants(s=s, L=1.0 - min_eig, U=max_eig - 1.0, method=METHOD_EXACT)


def rip_monte_carlo(
    A: np.ndarray,
    s: int,
    trials: int,
    rng: RngSpec | np.random.Generator,
    dedup: bool = False,
) -> RipConstants:
    """Inner RIP estimates over ``trials`` uniformly sampled supports.

    The estimates never exceed the exact constants; with ``dedup`` the
    supports are sampled without repetition, so ``trials = C(N, s)``
    exhausts the enumeration and reproduces ``rip_exact``.
    """
    A = np.asarray(A, dtype=float)
    N = A.shape[1]
    if not 1 <= s <= min(A.shape):
        raise InvalidArgumentError(f"order s must satisfy 1 <= s <= min(n, N), got {s}")
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    total = math.comb(N, s)
    if dedup and trials > total:
        raise InvalidArgumentError(f"cannot draw {trials} distinct supports out of C({N},{s}) = {total}")
    gen = _as_generator(rng)
    seen: set[tuple[int, ...]] = set()
    min_eig = math.inf
    max_eig = -math.inf
    drawn = 0
    while drawn < trials:
        support = np.sort(gen.choice(N, size=s, replace=False))
        if dedup:
            key = tuple(int(i) for i in support)
            if key in seen:
                continue
            seen.add(key)
        lo, hi = _gram_eig_range(A, support.astype(np.intp))
        min_eig = min(min_eig, lo)
        max_eig = max(max_eig, hi)
        drawn += 1
    return RipConstants(s=s, L=1.0 - min_eig, U=max_eig - 1.0, method=METHOD_MONTE_CARLO)


class RipBoundProvider:
    """Supplies asymptotic bounds (L(delta, rho), U(delta, rho)) on Gaussian
    RIP constants in the proportional-growth limit."""

    provider_id: str

    def query(self, delta: float, rho: float) -> tuple[float, float]:
        raise NotImplementedError


class ConstantRipProvider(RipBoundProvider):
    """Returns fixed (L, U) everywhere; for testing and degenerate cases."""

    def __init__(self, L: float, U: float):
        if L < 0 or U < 0 or L >= 1:
            raise InvalidArgumentError("constant bounds require 0 <= L < 1 and U >= 0")
        self.L = L
        self.U = U
        self.provider_id = f"constant(L={L},U={U})"

    def query(self, delta: float, rho: float) -> tuple[float, float]:
        return self.L, self.U


class TableRipProvider(RipBoundProvider):
    """Bilinear interpolation over a rectangular (delta, rho) bound table."""

    def __init__(self, deltas, rhos, L_grid, U_grid, source: str):
        self.deltas = np.asarray(deltas, dtype=float)
        self.rhos = np.asarray(rhos, dtype=float)
        self.L_grid = np.asarray(L_grid, dtype=float)
        self.U_grid = np.asarray(U_grid, dtype=float)
        self.source = source
        self.provider_id = f"table({source})"
        self._validate()

    def _validate(self):
        if np.any(np.diff(self.deltas) <= 0) or np.any(np.diff(self.rhos) <= 0):
            raise TableFormatError("table axes must be strictly increasing")
        if self.L_grid.shape != (len(self.deltas), len(self.rhos)) or self.U_grid.shape != self.L_grid.shape:
            raise TableFormatError("bound grids must be rectangular over the axes")
        if np.any(self.L_grid < 0) or np.any(self.U_grid < 0):
            raise TableFormatError("bounds must be nonnegative")
        if np.any(self.L_grid >= 1):
            raise TableFormatError("lower-constant bounds must be < 1")
        # RIP constants grow with the order, so each bound must be
        # nondecreasing along rho at fixed delta.
        for name, grid in (("L", self.L_grid), ("U", self.U_grid)):
            if np.any(np.diff(grid, axis=1) < 0):
                raise TableFormatError(f"{name} bounds must be nondecreasing in rho at fixed delta")

    @classmethod
    def from_file(cls, path: str | Path) -> "TableRipProvider":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith(TABLE_HEADER_PREFIX):
            raise TableFormatError(f"{path}:1: missing '{TABLE_HEADER_PREFIX}' header")
        source = ""
        for part in lines[0].split(";"):
            part = part.strip()
            if part.startswith("source="):
                source = part[len("source="):]
        if not source:
            raise TableFormatError(f"{path}:1: header must declare 'source=<string>'")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise TableFormatError(f"{path}:{lineno}: expected 'delta,rho,L,U', got {line!r}")
            try:
                rows.append(tuple(float(f) for f in fields))
            except ValueError as exc:
                raise TableFormatError(f"{path}:{lineno}: {exc}") from exc
        if not rows:
            raise TableFormatError(f"{path}: no data rows")
        keys = [(r[0], r[1]) for r in rows]
        if keys != sorted(keys):
            raise TableFormatError(f"{path}: rows must be sorted by (delta, rho)")
        deltas = sorted(set(r[0] for r in rows))
        rhos = sorted(set(r[1] for r in rows))
        if len(rows) != len(deltas) * len(rhos):
            raise TableFormatError(f"{path}: grid is not rectangular over (delta, rho)")
        L_grid = np.full((len(deltas), len(rhos)), np.nan)
        U_grid = np.full_like(L_grid, np.nan)
        d_index = {d: i for i, d in enumerate(deltas)}
        r_index = {r: j for j, r in enumerate(rhos)}
        for d, r, L, U in rows:
            L_grid[d_index[d], r_index[r]] = L
            U_grid[d_index[d], r_index[r]] = U
        if np.any(np.isnan(L_grid)):
            raise TableFormatError(f"{path}: grid is not rectangular over (delta, rho)")
        return cls(deltas, rhos, L_grid, U_grid, source=source)

    def _cell(self, knots: np.ndarray, value: float, axis: str) -> tuple[int, float]:
        if value < knots[0] or value > knots[-1]:
            raise NumericalDomainError(
                f"{axis}={value} outside table hull [{knots[0]}, {knots[-1]}] ({self.provider_id})"
            )
        i = int(np.searchsorted(knots, value, side="right")) - 1
        i = min(max(i, 0), len(knots) - 2)
        t = (value - knots[i]) / (knots[i + 1] - knots[i])
        return i, t

    def query(self, delta: float, rho: float) -> tuple[float, float]:
        i, t = self._cell(self.deltas, delta, "delta")
        j, u = self._cell(self.rhos, rho, "rho")
        out = []
        for grid in (self.L_grid, self.U_grid):
            block = grid[i : i + 2, j : j + 2]
            out.append(
                float(
                    (1 - t) * (1 - u) * block[0, 0]
                    + (1 - t) * u * block[0, 1]
                    + t * (1 - u) * block[1, 0]
                    + t * u * block[1, 1]
                )
            )
        return out[0], out[1]


def rip_bound_query(provider: RipBoundProvider, delta: float, rho: float) -> tuple[float, float]:
    """Interpolated (L, U) bound at (delta, rho); domain error outside the hull."""
    return provider.query(delta, rho)


def default_provider() -> TableRipProvider:
    """The table shipped with the package (Monte Carlo estimates; see its header)."""
    return TableRipProvider.from_file(DEFAULT_TABLE_PATH)
