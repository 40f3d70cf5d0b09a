"""Monte Carlo harness: distributional validation, empirical recovery
transitions and noise-bound compliance, with reproducible persistence.

Every trial draws from its own counter-based substream keyed by
``(master_seed, cell_id, trial_id)``, so results are byte-identical no
matter how many workers execute them.  Worker count is controlled only by
the ``IHTLAB_WORKERS`` environment variable.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    RngSpec,
    SupportSet,
    pseudo_inverse_apply,
    sample_gaussian_matrix,
    sample_instance,
    sample_noise,
)
from .errors import ConfigError, IhtLabError, StabilityUndefinedError
from .rip import RipBoundProvider, TableRipProvider, default_provider, rip_exact, rip_monte_carlo
from .solvers import (
    SolverConfig,
    TERMINATION_MAX_ITERS,
    VARIANT_IHT,
    VARIANT_NIHT,
    run_solver,
)
from .stablepoint import is_stable_point
from .transitions import (
    XI_NIHT_AS_PRINTED,
    rho_hat_iht,
    rho_hat_niht,
    stability_factor_iht,
    stability_factor_niht,
    stepsize_interval_iht,
)

KIND_DISTRIBUTION = "mc_distribution"
KIND_TRANSITION = "mc_transition"
KIND_ERROR_VS_XI = "mc_error_vs_xi"
KIND_RIP_SCAN = "rip_scan"
KINDS = (KIND_DISTRIBUTION, KIND_TRANSITION, KIND_ERROR_VS_XI, KIND_RIP_SCAN)

WORKERS_ENV_VAR = "IHTLAB_WORKERS"

# Empirical success threshold for noiseless recovery maps.
SUCCESS_REL_TOL = 1e-4
# Zero-noise proxy for the error bound (the bound itself degenerates to 0).
ZERO_NOISE_ERROR_TOL = 1e-6
STABLE_POINT_CHECK_TOL = 1e-6

_FIELD_SETS = {
    KIND_DISTRIBUTION: (
        {"kind", "n", "k", "overlap", "trials", "master_seed"},
        {"sigma", "output_path", "trial_csv_path"},
    ),
    KIND_TRANSITION: (
        {"kind", "n", "delta_grid", "rho_grid", "trials", "master_seed", "solver"},
        {"sigma", "coefficient_model", "output_path", "trial_csv_path"},
    ),
    KIND_ERROR_VS_XI: (
        {"kind", "n", "delta", "rho", "trials", "master_seed", "solver", "sigma"},
        {"rip_table", "xi_variant", "coefficient_model", "output_path", "trial_csv_path"},
    ),
    KIND_RIP_SCAN: (
        {"kind", "n", "N", "orders", "trials", "master_seed"},
        {"method", "mc_supports", "output_path", "trial_csv_path"},
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment; mirrors the JSON schema."""

    kind: str
    n: int
    trials: int
    master_seed: int
    sigma: float = 0.0
    k: int | None = None
    N: int | None = None
    overlap: int | None = None
    delta: float | None = None
    rho: float | None = None
    delta_grid: tuple[float, ...] | None = None
    rho_grid: tuple[float, ...] | None = None
    solver: dict | None = None
    rip_table: str | None = None
    xi_variant: str = XI_NIHT_AS_PRINTED
    coefficient_model: str = "gaussian"
    orders: tuple[int, ...] | None = None
    method: str = "exact"
    mc_supports: int = 1000
    output_path: str | None = None
    trial_csv_path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.kind == KIND_DISTRIBUTION:
            if not (self.k and self.overlap) or not 1 <= self.overlap <= self.k:
                raise ConfigError("mc_distribution needs 1 <= overlap <= k")
            if not 0 < 2 * self.k <= self.n:
                raise ConfigError("mc_distribution needs 0 < 2k <= n")
        if self.kind == KIND_TRANSITION:
            if not self.delta_grid or not self.rho_grid:
                raise ConfigError("mc_transition needs nonempty delta_grid and rho_grid")
            self._require_solver()
        if self.kind == KIND_ERROR_VS_XI:
            if self.delta is None or self.rho is None:
                raise ConfigError("mc_error_vs_xi needs delta and rho")
            self._require_solver()
        if self.kind == KIND_RIP_SCAN and not self.orders:
            raise ConfigError("rip_scan needs a nonempty list of orders")

    def _require_solver(self):
        if not isinstance(self.solver, dict) or "variant" not in self.solver:
            raise ConfigError("solver section with a 'variant' key is required")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if "kind" not in data:
            raise ConfigError("config is missing the 'kind' key")
        kind = data["kind"]
        if kind not in _FIELD_SETS:
            raise ConfigError(f"unknown experiment kind {kind!r}; choose from {KINDS}")
        required, optional = _FIELD_SETS[kind]
        unknown = set(data) - required - optional
        if unknown:
            raise ConfigError(f"unknown config keys for kind {kind!r}: {sorted(unknown)}")
        missing = required - set(data)
        if missing:
            raise ConfigError(f"missing config keys for kind {kind!r}: {sorted(missing)}")
        coerced = dict(data)
        for key in ("delta_grid", "rho_grid"):
            if key in coerced and coerced[key] is not None:
                coerced[key] = tuple(float(v) for v in coerced[key])
        if "orders" in coerced and coerced["orders"] is not None:
            coerced["orders"] = tuple(int(v) for v in coerced["orders"])
        try:
            return cls(**coerced)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must contain a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        raw = asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in raw.items()}

    def solver_config(self, alpha_override: float | None = None) -> SolverConfig:
        kwargs = dict(self.solver or {})
        unknown = set(kwargs) - {"variant", "alpha", "kappa", "c", "max_iters", "step_tol", "residual_tol"}
        if unknown:
            raise ConfigError(f"unknown solver keys: {sorted(unknown)}")
        if alpha_override is not None:
            kwargs["alpha"] = alpha_override
        try:
            return SolverConfig(**kwargs)
        except (TypeError, IhtLabError) as exc:
            raise ConfigError(f"invalid solver section: {exc}") from exc


@dataclass
class ExperimentResult:
    kind: str
    config: dict
    summary: dict
    cells: list[dict] = field(default_factory=list)
    trial_rows: list[dict] = field(default_factory=list)
    version: str = __version__

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "version": self.version,
            "config": self.config,
            "summary": self.summary,
            "cells": self.cells,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8", newline="\n")

    def save_trials_csv(self, path: str | Path) -> None:
        if not self.trial_rows:
            return
        keys = sorted(self.trial_rows[0])
        lines = [",".join(keys)]
        for row in self.trial_rows:
            lines.append(",".join(_csv_field(row[k]) for k in keys))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _csv_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


# ---------------------------------------------------------------------------
# small statistics helpers


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = len(x)
    fx = np.asarray(cdf(x), dtype=float)
    d_plus = float(np.max(np.arange(1, m + 1) / m - fx))
    d_minus = float(np.max(fx - np.arange(0, m) / m))
    return max(d_plus, d_minus)


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    data = np.concatenate([np.sort(a), np.sort(b)])
    order = np.argsort(data, kind="stable")
    cdf_steps = np.where(order < len(a), 1.0 / len(a), -1.0 / len(b))
    return float(np.max(np.abs(np.cumsum(cdf_steps))))


def ks_critical_value(m: int, alpha: float = 0.01) -> float:
    """Asymptotic critical KS distance at level alpha."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(m)


def ks_two_sample_critical(m1: int, m2: int, alpha: float = 0.01) -> float:
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((m1 + m2) / (m1 * m2))


def wilson_interval(successes: int, total: int, z: float = 2.5758) -> tuple[float, float]:
    """Wilson score interval; default z is the two-sided 99% quantile."""
    if total == 0:
        return 0.0, 1.0
    phat = successes / total
    denom = 1.0 + z**2 / total
    centre = (phat + z**2 / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z**2 / (4 * total**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


# ---------------------------------------------------------------------------
# parallel map with deterministic ordering


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _pmap(fn, tasks: list):
    """Apply ``fn`` over tasks, in parallel when IHTLAB_WORKERS > 1.

    Results come back in task order, so the output is independent of the
    worker count.
    """
    workers = _worker_count()
    if workers == 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    import multiprocessing

    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        ctx = multiprocessing.get_context()
    with ctx.Pool(workers) as pool:
        return pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers)))


# ---------------------------------------------------------------------------
# distributional validation


def _distribution_trial(task) -> dict:
    config, x_diff, trial = task
    n, k, r, sigma = config.n, config.k, config.overlap, config.sigma
    gen = RngSpec(config.master_seed, 1).substream(0, trial)
    cols = sample_gaussian_matrix(n, k + r, gen)
    A_gamma, A_diff = cols[:, :k], cols[:, k:]
    z = x_diff
    z_norm2 = float(z @ z)

    v = A_diff @ z
    y = pseudo_inverse_apply(A_gamma, v)
    f_sample = float(y @ y) / z_norm2

    Q, _ = np.linalg.qr(A_gamma)
    w = v - Q @ (Q.T @ v)
    lhs_full = float(np.linalg.norm(A_diff.T @ w)) / math.sqrt(z_norm2)
    quad = float(v @ w) / z_norm2
    viol_42 = lhs_full < quad - 1e-12 * (1.0 + abs(quad))
    r_sample = quad * n / (n - k)

    out = {
        "trial": trial,
        "f_sample": f_sample,
        "lhs_42": lhs_full,
        "quad_42": quad,
        "r_sample": r_sample,
        "viol_42": bool(viol_42),
    }
    if sigma > 0:
        e = sample_noise(n, sigma, gen)
        lhs_43 = float(np.linalg.norm(pseudo_inverse_apply(A_gamma, e)))
        g_sample = lhs_43**2 / sigma**2
        w_e = e - Q @ (Q.T @ e)
        lhs_44 = float(np.linalg.norm(A_diff.T @ w_e))
        # Reconstruct the coupled right-hand sides of the projected-noise
        # bounds from the same draw via the singular bases.
        U, _, Vt = np.linalg.svd(A_gamma, full_matrices=True)
        U1, U2 = U[:, :k], U[:, k:]
        q = Vt.T @ (U1.T @ e)
        rhs_43 = math.sqrt(float(q @ np.linalg.solve(A_gamma.T @ A_gamma, q)))
        B = U2.T @ A_diff
        f2 = U2.T @ e
        W, _, Yt = np.linalg.svd(B, full_matrices=False)
        h = Yt.T @ (W.T @ f2)
        Bh = B @ h
        rhs_44_sq = float(Bh @ Bh)
        h_norm2 = float(h @ h)
        out.update(
            {
                "g_sample": g_sample,
                "viol_43": bool(lhs_43 > rhs_43 + 1e-12 * (1.0 + rhs_43)),
                "lhs_44_sq": lhs_44**2,
                "rhs_44_sq": rhs_44_sq,
                "viol_44": bool(lhs_44**2 > rhs_44_sq + 1e-12 * (1.0 + rhs_44_sq)),
                "s_sample": (rhs_44_sq / h_norm2) * n / (n - k) if h_norm2 > 0 else 0.0,
                "t_sample": h_norm2 * n / sigma**2,
            }
        )
    return out


def _rayleigh_trial(task) -> dict:
    config, z, trial = task
    n, k = config.n, config.k
    gen = RngSpec(config.master_seed, 2).substream(0, trial)
    B = sample_gaussian_matrix(n, k, gen)
    Bz = B @ z
    z_norm2 = float(z @ z)
    r1 = float(Bz @ Bz) / z_norm2 * n
    G = B.T @ B
    r2 = z_norm2 / float(z @ np.linalg.solve(G, z)) * n
    Gz = G @ z
    r3 = float(Gz @ Gz) / z_norm2
    B2 = sample_gaussian_matrix(n, k, gen)
    G2 = B2.T @ B2
    r3_ref = float(G2[0] @ G2[0])
    return {"trial": trial, "r1": r1, "r2": r2, "r3": r3, "r3_ref": r3_ref}


def mc_distribution_check(config: ExperimentConfig) -> ExperimentResult:
    """Validate the distributional identities behind the stable-point terms.

    Per trial with fresh Gaussian columns: the squared overlap ratio is
    KS-tested against its scaled-F law; the one-sided projected bounds are
    re-checked from the same draw (violation counts must be zero); and the
    three Rayleigh-quotient laws are KS-tested.
    """
    if config.kind != KIND_DISTRIBUTION:
        raise ConfigError("mc_distribution_check requires kind=mc_distribution")
    from .asymptotics import chi2_cdf, scaled_f_cdf

    n, k, r = config.n, config.k, config.overlap
    gen0 = RngSpec(config.master_seed, 0).substream(0)
    x_diff = gen0.standard_normal(r)
    z_ray = gen0.standard_normal(k)

    rows = _pmap(_distribution_trial, [(config, x_diff, t) for t in range(config.trials)])
    ray_rows = _pmap(_rayleigh_trial, [(config, z_ray, t) for t in range(config.trials)])

    f_samples = np.array([row["f_sample"] for row in rows])
    r_samples = np.array([row["r_sample"] for row in rows])
    m = config.trials
    crit = ks_critical_value(m)
    summary = {
        "n": n,
        "k": k,
        "overlap": r,
        "trials": m,
        "ks_critical_99": crit,
        "ks_f_ratio": ks_statistic(f_samples, lambda x: scaled_f_cdf(x, k, n)),
        "f_ratio_mean": float(np.mean(f_samples)),
        "f_ratio_mean_expected": k / (n - k - 1),
        "ks_r_quadratic": ks_statistic(r_samples, lambda x: chi2_cdf(x * (n - k), n - k)),
        "violations_42": int(sum(row["viol_42"] for row in rows)),
    }
    if config.sigma > 0:
        g_samples = np.array([row["g_sample"] for row in rows])
        s_samples = np.array([row["s_sample"] for row in rows])
        t_samples = np.array([row["t_sample"] for row in rows])
        summary.update(
            {
                "ks_g_noise": ks_statistic(g_samples, lambda x: scaled_f_cdf(x, k, n)),
                "ks_s_noise": ks_statistic(s_samples, lambda x: chi2_cdf(x * (n - k), n - k)),
                "ks_t_noise": ks_statistic(t_samples, lambda x: chi2_cdf(x, r)),
                "violations_43": int(sum(row["viol_43"] for row in rows)),
                "violations_44": int(sum(row["viol_44"] for row in rows)),
            }
        )
    r1 = np.array([row["r1"] for row in ray_rows])
    r2 = np.array([row["r2"] for row in ray_rows])
    r3 = np.array([row["r3"] for row in ray_rows])
    r3_ref = np.array([row["r3_ref"] for row in ray_rows])
    summary.update(
        {
            "ks_rayleigh_full": ks_statistic(r1, lambda x: chi2_cdf(x, n)),
            "rayleigh_full_mean_normalised": float(np.mean(r1)) / n,
            "ks_rayleigh_inverse": ks_statistic(r2, lambda x: chi2_cdf(x, n - k + 1)),
            "ks_rayleigh_squared_two_sample": ks_two_sample(r3, r3_ref),
            "ks_two_sample_critical_99": ks_two_sample_critical(m, m),
        }
    )
    result = ExperimentResult(
        kind=config.kind, config=config.to_dict(), summary=summary, trial_rows=rows
    )
    _persist(result, config)
    return result


# ---------------------------------------------------------------------------
# empirical recovery transition


def _transition_trial(task) -> dict:
    config, cell_id, n, N, k, trial = task
    gen = RngSpec(config.master_seed, 3).substream(cell_id, trial)
    instance = sample_instance(n, N, k, config.sigma, gen, config.coefficient_model)
    trace = run_solver(instance, config.solver_config())
    with np.errstate(over="ignore", invalid="ignore"):
        err = float(np.linalg.norm(trace.final - instance.x_star))
    rel = err / float(np.linalg.norm(instance.x_star)) if math.isfinite(err) else math.inf
    return {
        "cell": cell_id,
        "trial": trial,
        "error": err if math.isfinite(err) else None,
        "success": bool(rel <= SUCCESS_REL_TOL),
        "iterations": trace.n_iterations,
        "termination": trace.termination_reason,
    }


def fifty_percent_contour(cells: list[dict]) -> list[dict]:
    """Interpolate the 50% success contour in rho for each delta column."""
    contour = []
    deltas = sorted(set(c["delta"] for c in cells if c.get("success_rate") is not None))
    for delta in deltas:
        column = sorted(
            (c for c in cells if c["delta"] == delta and c.get("success_rate") is not None),
            key=lambda c: c["rho"],
        )
        rho_cross = None
        for lo, hi in zip(column, column[1:]):
            if lo["success_rate"] >= 0.5 > hi["success_rate"]:
                gap = lo["success_rate"] - hi["success_rate"]
                t = (lo["success_rate"] - 0.5) / gap if gap > 0 else 0.0
                rho_cross = lo["rho"] + t * (hi["rho"] - lo["rho"])
        contour.append({"delta": delta, "rho_50": rho_cross})
    return contour


def mc_recovery_transition(config: ExperimentConfig) -> ExperimentResult:
    """Empirical success map over a (delta, rho) grid at fixed n."""
    if config.kind != KIND_TRANSITION:
        raise ConfigError("mc_recovery_transition requires kind=mc_transition")
    config.solver_config()  # fail fast on a bad solver section
    n = config.n
    cells = []
    tasks = []
    cell_meta = []
    cell_id = 0
    for delta in config.delta_grid:
        for rho in config.rho_grid:
            N = max(n, round(n / delta))
            k = max(1, round(rho * n))
            valid = 0 < 2 * k <= n <= N
            cell_meta.append({"cell": cell_id, "delta": delta, "rho": rho, "n": n, "N": N, "k": k, "valid": valid})
            if valid:
                tasks.extend((config, cell_id, n, N, k, t) for t in range(config.trials))
            cell_id += 1
    rows = _pmap(_transition_trial, tasks)
    by_cell: dict[int, list[dict]] = {}
    for row in rows:
        by_cell.setdefault(row["cell"], []).append(row)
    for meta in cell_meta:
        cell = dict(meta)
        trials = sorted(by_cell.get(meta["cell"], []), key=lambda r: r["trial"])
        if meta["valid"] and trials:
            succ = sum(r["success"] for r in trials)
            cell["success_rate"] = succ / len(trials)
            lo, hi = wilson_interval(succ, len(trials))
            cell["wilson_lo"], cell["wilson_hi"] = lo, hi
            cell["successes"] = succ
            errors = np.array([r["error"] for r in trials if r["error"] is not None])
            cell["diverged"] = sum(r["error"] is None for r in trials)
            if len(errors):
                cell["mean_error"] = float(np.mean(errors))
                cell["error_q50"] = float(np.quantile(errors, 0.5))
                cell["error_q90"] = float(np.quantile(errors, 0.9))
        else:
            cell["success_rate"] = None
        cells.append(cell)
    summary = {
        "n": n,
        "trials": config.trials,
        "contour_50": fifty_percent_contour(cells),
    }
    result = ExperimentResult(
        kind=config.kind, config=config.to_dict(), summary=summary, cells=cells, trial_rows=rows
    )
    _persist(result, config)
    return result


# ---------------------------------------------------------------------------
# noise-bound compliance


def _error_trial(task) -> dict:
    config, n, N, k, solver_config, alpha_lb, trial = task
    gen = RngSpec(config.master_seed, 4).substream(0, trial)
    instance = sample_instance(n, N, k, config.sigma, gen, config.coefficient_model)
    trace = run_solver(instance, solver_config)
    x_bar = trace.final
    converged = trace.termination_reason != TERMINATION_MAX_ITERS
    stable = False
    if converged and np.any(x_bar):
        gamma = SupportSet.support_of(x_bar)
        report = is_stable_point(
            x_bar, gamma, alpha_lb, instance.A, instance.b, tol=STABLE_POINT_CHECK_TOL
        )
        stable = report.is_stable
    elif converged:
        stable = not np.any(instance.b)
    with np.errstate(over="ignore", invalid="ignore"):
        err = float(np.linalg.norm(x_bar - instance.x_star))
    if not math.isfinite(err):
        converged = stable = False
        err = math.inf
    return {
        "trial": trial,
        "error": err,
        "converged": bool(converged),
        "stable": bool(stable),
        "iterations": trace.n_iterations,
        "termination": trace.termination_reason,
    }


def _load_provider(config: ExperimentConfig) -> RipBoundProvider:
    if config.rip_table:
        return TableRipProvider.from_file(config.rip_table)
    return default_provider()


def mc_error_vs_xi(config: ExperimentConfig) -> ExperimentResult:
    """Fraction of converged runs with error within the stability bound xi*sigma."""
    if config.kind != KIND_ERROR_VS_XI:
        raise ConfigError("mc_error_vs_xi requires kind=mc_error_vs_xi")
    provider = _load_provider(config)
    delta, rho = config.delta, config.rho
    variant = (config.solver or {}).get("variant")
    try:
        if variant == VARIANT_IHT:
            interval = stepsize_interval_iht(delta, rho, provider)
            if interval is None:
                raise StabilityUndefinedError(
                    f"empty admissible stepsize interval at delta={delta}, rho={rho}"
                )
            alpha = (config.solver or {}).get("alpha")
            if alpha is None:
                alpha = 0.5 * (interval[0] + interval[1])
            if not interval[0] < float(alpha) < interval[1]:
                raise ConfigError(
                    f"alpha={alpha} outside the admissible interval {interval} "
                    f"at delta={delta}, rho={rho}"
                )
            solver_config = config.solver_config(alpha_override=float(alpha))
            stability = stability_factor_iht(delta, rho, float(alpha), provider)
            rho_hat = rho_hat_iht(delta, provider).rho_hat
            alpha_lb = float(alpha)
        elif variant == VARIANT_NIHT:
            solver_config = config.solver_config()
            stability = stability_factor_niht(
                delta, rho, solver_config.kappa, provider, xi_variant=config.xi_variant
            )
            rho_hat = rho_hat_niht(delta, solver_config.kappa, provider).rho_hat
            _, U = provider.query(delta, 2.0 * rho)
            alpha_lb = 1.0 / (solver_config.kappa * (1.0 + U))
        else:
            raise ConfigError(f"unknown solver variant {variant!r}")
    except StabilityUndefinedError as exc:
        raise ConfigError(f"stability factor undefined for this config: {exc}") from exc

    n = config.n
    N = max(n, round(n / delta))
    k = max(1, round(rho * n))
    bound = stability.xi * config.sigma if config.sigma > 0 else ZERO_NOISE_ERROR_TOL
    tasks = [(config, n, N, k, solver_config, alpha_lb, t) for t in range(config.trials)]
    rows = _pmap(_error_trial, tasks)
    for row in rows:
        row["included"] = bool(row["converged"] and row["stable"])
        row["compliant"] = bool(row["included"] and row["error"] <= bound)
    included = [r for r in rows if r["included"]]
    compliant = sum(r["compliant"] for r in rows)
    rate = compliant / len(included) if included else 0.0
    lo, hi = wilson_interval(compliant, len(included)) if included else (0.0, 1.0)
    errors = np.array([r["error"] for r in included]) if included else np.zeros(0)
    summary = {
        "delta": delta,
        "rho": rho,
        "rho_hat": rho_hat,
        "n": n,
        "N": N,
        "k": k,
        "sigma": config.sigma,
        "xi": stability.xi,
        "error_bound": bound,
        "alpha_lb": alpha_lb,
        "provider_id": provider.provider_id,
        "trials": config.trials,
        "included": len(included),
        "compliant": compliant,
        "compliance_rate": rate,
        "wilson_lo": lo,
        "wilson_hi": hi,
        "error_q50": float(np.quantile(errors, 0.5)) if len(errors) else None,
        "error_q90": float(np.quantile(errors, 0.9)) if len(errors) else None,
        "error_max": float(np.max(errors)) if len(errors) else None,
    }
    result = ExperimentResult(
        kind=config.kind, config=config.to_dict(), summary=summary, trial_rows=rows
    )
    _persist(result, config)
    return result


# ---------------------------------------------------------------------------
# RIP scan


def _rip_scan_trial(task) -> dict:
    config, order, trial = task
    gen = RngSpec(config.master_seed, 5).substream(order, trial)
    A = sample_gaussian_matrix(config.n, config.N, gen)
    if config.method == "exact":
        constants = rip_exact(A, order)
    else:
        constants = rip_monte_carlo(A, order, config.mc_supports, gen)
    return {"order": order, "trial": trial, "L": constants.L, "U": constants.U, "method": constants.method}


def rip_scan(config: ExperimentConfig) -> ExperimentResult:
    """Sample Gaussian matrices and measure their RIP constants per order."""
    if config.kind != KIND_RIP_SCAN:
        raise ConfigError("rip_scan requires kind=rip_scan")
    if config.method not in ("exact", "monte_carlo"):
        raise ConfigError("rip_scan method must be 'exact' or 'monte_carlo'")
    tasks = [(config, s, t) for s in config.orders for t in range(config.trials)]
    rows = _pmap(_rip_scan_trial, tasks)
    cells = []
    for order in config.orders:
        sub = [r for r in rows if r["order"] == order]
        cells.append(
            {
                "order": order,
                "L_mean": float(np.mean([r["L"] for r in sub])),
                "L_max": float(np.max([r["L"] for r in sub])),
                "U_mean": float(np.mean([r["U"] for r in sub])),
                "U_max": float(np.max([r["U"] for r in sub])),
                "general_position_all": bool(all(r["L"] < 1 for r in sub)),
            }
        )
    summary = {"n": config.n, "N": config.N, "trials": config.trials, "method": config.method}
    result = ExperimentResult(
        kind=config.kind, config=config.to_dict(), summary=summary, cells=cells, trial_rows=rows
    )
    _persist(result, config)
    return result


def _persist(result: ExperimentResult, config: ExperimentConfig) -> None:
    if config.output_path:
        result.save(config.output_path)
    if config.trial_csv_path:
        result.save_trials_csv(config.trial_csv_path)


RUNNERS = {
    KIND_DISTRIBUTION: mc_distribution_check,
    KIND_TRANSITION: mc_recovery_transition,
    KIND_ERROR_VS_XI: mc_error_vs_xi,
    KIND_RIP_SCAN: rip_scan,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[config.kind](config)
