"""Empirical survival functions, model fitting and comparison statistics."""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np
from scipy import optimize

from .distcore import ModelParams, quad_profile, survival, survival_normalized
from .errors import DataError, DomainError, PowertailError

__all__ = [
    "EmpiricalSurvival",
    "FitConfig",
    "FitResult",
    "StabilityReport",
    "empirical_survival",
    "fit",
    "fit_curve",
    "ks_distance",
    "ks_to_survival",
    "stability_report",
    "count_above",
    "stratify",
    "quartile_assign",
]


def _as_values(values, what="values"):
    arr = np.asarray(values, dtype=float).ravel()
    bad = np.flatnonzero(~np.isfinite(arr) | (arr < 0.0))
    if bad.size:
        i = int(bad[0])
        raise DataError(f"{what}[{i}] = {arr[i]!r} is not a finite nonnegative number")
    return arr


@dataclass(frozen=True)
class EmpiricalSurvival:
    """Fraction of observations strictly greater than ``R``.

    ``values`` is sorted ascending. The step function is right-continuous
    and non-increasing.
    """

    values: np.ndarray

    @property
    def n(self):
        return len(self.values)

    def __call__(self, R):
        r = np.asarray(R, dtype=float)
        above = self.n - np.searchsorted(self.values, r, side="right")
        out = above / self.n
        return float(out) if out.ndim == 0 else out

    def count_above(self, R):
        """Number of observations strictly greater than ``R``."""
        return self.n - np.searchsorted(self.values, R, side="right")


def empirical_survival(values):
    """Build an :class:`EmpiricalSurvival` from nonnegative observations."""
    arr = _as_values(values)
    if arr.size == 0:
        raise DomainError("empirical survival needs at least one value")
    return EmpiricalSurvival(np.sort(arr))


@dataclass(frozen=True)
class FitConfig:
    """Settings for :func:`fit`.

    ``r_range=None`` spans the 1% to 99.9% quantiles of the positive data.
    Grid points where fewer than ``min_tail_count`` observations exceed ``R``
    are dropped. ``normalize_model`` compares the data against the survival
    function divided by its total mass, so both start at one.
    """

    grid_points: int = 40
    r_range: tuple = None
    min_tail_count: int = 5
    t_bounds: tuple = (1e-3, 20.0)
    theta_bounds: tuple = (0.05, 500.0)
    beta_fixed: float = 2.0
    fit_beta: bool = False
    beta_bounds: tuple = (1.55, 6.0)
    normalize_model: bool = True
    xatol: float = 1e-6
    fatol: float = 1e-10
    max_iter: int = 600
    initial_theta: float = 10.0
    quad: object = None

    def __post_init__(self):
        if self.grid_points < 10:
            raise DomainError("grid_points must be at least 10")
        if self.min_tail_count < 1:
            raise DomainError("min_tail_count must be at least 1")
        for name in ("t_bounds", "theta_bounds", "beta_bounds"):
            lo, hi = getattr(self, name)
            if not 0.0 < lo < hi:
                raise DomainError(f"{name} must satisfy 0 < low < high")
        if self.r_range is not None and not 0.0 < self.r_range[0] < self.r_range[1]:
            raise DomainError("r_range must satisfy 0 < low < high")


@dataclass
class FitResult:
    """Outcome of a least-squares fit of the survival function."""

    params: ModelParams
    objective: float
    residuals: np.ndarray
    grid: np.ndarray
    iterations: int
    evaluations: int
    converged: bool
    n: int = 0
    message: str = ""


def _model_curve(params, r, config):
    quad = config.quad if config.quad is not None else quad_profile()
    if config.normalize_model:
        return survival_normalized(params, r, quad)
    return survival(params, r, quad)


def fit_curve(r, f_target, config=None, n=0, start_T=None):
    """Fit the model survival function to target values on a fixed grid.

    Minimizes ``sum((ln F_model(r_i) - ln f_target_i)**2)`` by Nelder-Mead in
    log-parameter space, clipped to the configured box. The starting simplex
    is deterministic.

    Parameters
    ----------
    r, f_target : array_like
        Grid abscissae and strictly positive target survival values.
    config : FitConfig, optional
    n : int
        Sample size behind ``f_target``; recorded in the result only.
    start_T : float, optional
        Initial temperature. Defaults to the mean implied by ``f_target``.
    """
    config = FitConfig() if config is None else config
    r = np.asarray(r, dtype=float)
    f_target = np.asarray(f_target, dtype=float)
    if r.shape != f_target.shape or r.ndim != 1:
        raise DomainError("r and f_target must be 1-D arrays of equal length")
    if np.any(~(f_target > 0.0)):
        raise DataError("target survival values must be positive")
    if r.size < 10:
        raise DataError(f"insufficient data: only {r.size} usable grid points (need 10)")
    log_target = np.log(f_target)

    names = ["T", "theta"] + (["beta"] if config.fit_beta else [])
    bounds = [config.t_bounds, config.theta_bounds] + (
        [config.beta_bounds] if config.fit_beta else []
    )
    log_bounds = [(math.log(lo), math.log(hi)) for lo, hi in bounds]

    def to_params(z):
        vals = dict(zip(names, np.exp(z)))
        return ModelParams(
            T=vals["T"], theta=vals["theta"], beta=vals.get("beta", config.beta_fixed)
        )

    def residuals(z):
        model = _model_curve(to_params(z), r, config)
        return np.log(np.maximum(model, 1e-300)) - log_target

    def objective(z):
        try:
            res = residuals(z)
        except PowertailError:
            return math.inf
        return float(res @ res)

    if start_T is None:
        # mean of the target distribution, integrated from the survival curve
        start_T = float(np.trapezoid(np.concatenate([[1.0], f_target]), np.concatenate([[0.0], r])))
    z0 = _initial_point(start_T, config)
    return _minimize(objective, residuals, to_params, z0, log_bounds, r, config, n)


def _initial_point(start_T, config):
    lo, hi = config.t_bounds
    start = [min(max(start_T, lo), hi), config.initial_theta]
    if config.fit_beta:
        start.append(config.beta_fixed)
    return np.log(start)


def _minimize(objective, residuals, to_params, z0, log_bounds, r, config, n):
    dim = len(z0)
    simplex = np.vstack([z0] + [z0 + 0.25 * np.eye(dim)[i] for i in range(dim)])
    lo = np.array([b[0] for b in log_bounds])
    hi = np.array([b[1] for b in log_bounds])
    simplex = np.clip(simplex, lo, hi)
    res = optimize.minimize(
        objective,
        z0,
        method="Nelder-Mead",
        bounds=log_bounds,
        options={
            "initial_simplex": simplex,
            "xatol": config.xatol,
            "fatol": config.fatol,
            "maxiter": config.max_iter,
            "maxfev": 4 * config.max_iter,
        },
    )
    z = np.clip(res.x, lo, hi)
    return FitResult(
        params=to_params(z),
        objective=float(res.fun),
        residuals=residuals(z),
        grid=r,
        iterations=int(res.nit),
        evaluations=int(res.nfev),
        converged=bool(res.success),
        n=n,
        message=str(res.message),
    )


def fit_grid(emp, config):
    """Log-spaced fit grid for ``emp`` after the tail-count filter."""
    if config.r_range is None:
        positive = emp.values[emp.values > 0.0]
        if positive.size < 2:
            raise DataError("insufficient data: fewer than two positive values")
        lo, hi = np.quantile(positive, [0.01, 0.999])
        if not hi > lo:
            raise DataError("insufficient data: degenerate value range")
    else:
        lo, hi = config.r_range
    r = np.geomspace(lo, hi, config.grid_points)
    keep = emp.count_above(r) >= config.min_tail_count
    return r[keep]


def fit(values, config=None):
    """Fit ``(T, theta)`` (and optionally ``beta``) to observed values.

    The empirical survival function is evaluated on a log-spaced grid and
    matched to the model in log space; see :func:`fit_curve`.

    Raises
    ------
    DataError
        If fewer than 10 grid points survive the tail-count filter.
    """
    config = FitConfig() if config is None else config
    emp = empirical_survival(values)
    r = fit_grid(emp, config)
    if r.size < 10:
        raise DataError(
            f"insufficient data: only {r.size} usable grid points (need 10) for n={emp.n}"
        )
    return fit_curve(r, emp(r), config, n=emp.n, start_T=float(np.mean(emp.values)))


def ks_distance(a, b):
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_a - F_b|``.

    Exact: both empirical distribution functions are compared at every jump
    point of either sample.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_distance needs two nonempty samples")
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_to_survival(values, r, f):
    """``max_i |S_emp(r_i) - f_i|`` for a model survival ``f`` tabulated at ``r``."""
    emp = empirical_survival(values)
    return float(np.max(np.abs(emp(np.asarray(r, dtype=float)) - np.asarray(f))))


@dataclass
class StabilityReport:
    """Pairwise KS distances between labelled samples."""

    pairs: list = field(default_factory=list)
    sizes: dict = field(default_factory=dict)

    def rows(self):
        """``(label_a, label_b, ks, n_a, n_b)`` for every pair."""
        return [(a, b, ks, self.sizes[a], self.sizes[b]) for a, b, ks in self.pairs]


def stability_report(samples):
    """KS distance for every pair of labelled samples.

    ``samples`` is a mapping or a sequence of ``(label, values)`` pairs; the
    latter allows a label to be compared with itself.
    """
    items = list(samples.items()) if hasattr(samples, "items") else list(samples)
    report = StabilityReport(sizes={k: len(v) for k, v in items})
    for (a, va), (b, vb) in itertools.combinations(items, 2):
        report.pairs.append((a, b, ks_distance(va, vb)))
    return report


def count_above(values, threshold):
    """Number of values strictly greater than ``threshold``."""
    arr = np.asarray(values, dtype=float).ravel()
    return int(np.count_nonzero(arr > threshold))


def stratify(values, T, k_max):
    """Counts in strata ``[k T, (k+1) T)`` for ``k < k_max`` plus an overflow bin.

    Returns a list of ``k_max + 1`` counts summing to ``len(values)``.
    """
    if not T > 0.0:
        raise DomainError(f"T must be positive, got {T!r}")
    if k_max < 1:
        raise DomainError(f"k_max must be at least 1, got {k_max!r}")
    arr = np.asarray(values, dtype=float).ravel()
    k = np.floor(arr / T).astype(np.int64)
    k = np.clip(k, 0, k_max)
    return np.bincount(k, minlength=k_max + 1).tolist()


def quartile_assign(values):
    """Quartile labels ``"Q1"``..``"Q4"`` by descending rank.

    The top ``ceil(n/4)`` values are Q1, the next ``ceil(n/4)`` Q2, and so
    on. Equal values keep their input order.
    """
    arr = list(values)
    n = len(arr)
    if n < 4:
        raise DomainError(f"quartile_assign needs at least 4 values, got {n}")
    size = -(-n // 4)
    order = sorted(range(n), key=lambda i: -arr[i])
    labels = [None] * n
    for rank, i in enumerate(order):
        labels[i] = f"Q{rank // size + 1}"
    return labels
