"""Density and survival function of the exponential/power-law family.

The density is the Fourier-cosine inversion

    W(R) = 1/sqrt(pi T) * int_0^inf cos(x sqrt(R)) g(x) dx,
    g(x) = phi_nu(x * sqrt((beta - 3/2) T / theta)) ** theta,  nu = beta - 1/2,

with ``phi_nu`` from :func:`powertail.specfun.cf_kernel`. For ``beta = 2``
``g(x) = exp(-x sqrt(theta T / 2)) (1 + x sqrt(T / (2 theta)))**theta``.

``g`` decays exponentially, so the x-integral is truncated where ``g`` drops
below ``QuadratureSettings.kernel_floor`` and integrated with composite
Gauss-Legendre panels one oscillation period ``2 pi / sqrt(R)`` wide. Every
result is recomputed on a grid with half the panel width; the difference is
the error estimate compared against ``abs_tol``.

The survival function integrates the density over ``[R, inf)`` in closed
form under the x-integral; after an integration by parts it is again a plain
cosine transform,

    F(R) = 2/sqrt(pi T) * int_0^inf cos(x sqrt(R)) (-g'(x) / x) dx,

with a positive, smooth, exponentially decaying integrand. No cut-off in R
is involved, so the heavy tail is kept in full. :func:`normalization` takes
the other route and integrates the density itself over ``y = sqrt(R)``.

The total mass is not exactly one: it depends on ``beta`` and ``theta``
(about 0.954 at ``T = 1.5, beta = 2, theta = 30``) and tends to one as
``theta`` grows. :func:`survival_normalized` divides it out.
"""

from dataclasses import dataclass, replace
import math
import os

import numpy as np
from scipy import optimize

from .errors import AccuracyError, ConfigurationError, DomainError, RangeError
from .specfun import kernel_decay_ratio, log_cf_kernel

__all__ = [
    "ModelParams",
    "QuadratureSettings",
    "REFERENCE_PARAMS",
    "QUAD_PROFILES",
    "quad_profile",
    "kernel_power",
    "pdf",
    "pdf_beta2",
    "survival",
    "survival_normalized",
    "pdf_small_r",
    "survival_small_r",
    "normalization",
    "loglog_slope",
    "tail_slope",
]


@dataclass(frozen=True)
class ModelParams:
    """Distribution parameters.

    Attributes
    ----------
    T : float
        Effective temperature, the scale of the exponential body (impact
        factor units).
    beta : float
        Shape parameter; the density exists only for ``beta > 3/2``.
    theta : float
        Controls the transition from exponential body to power-law tail.
    """

    T: float = 1.5
    beta: float = 2.0
    theta: float = 30.0

    def __post_init__(self):
        for name in ("T", "beta", "theta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.T <= 0.0:
            raise DomainError(f"T must be positive, got {self.T}")
        if self.beta <= 1.5:
            raise DomainError(
                f"beta must exceed 3/2 for the integral to converge, got {self.beta}"
            )
        if self.theta <= 0.0:
            raise DomainError(f"theta must be positive, got {self.theta}")

    @property
    def order(self):
        """Bessel order ``nu = beta - 1/2`` of the kernel."""
        return self.beta - 0.5

    @property
    def kernel_scale(self):
        """Factor ``c`` mapping the integration variable to the kernel argument."""
        return math.sqrt((self.beta - 1.5) * self.T / self.theta)


REFERENCE_PARAMS = ModelParams(T=1.5, beta=2.0, theta=30.0)


@dataclass(frozen=True)
class QuadratureSettings:
    """Controls for the oscillatory inversion integral.

    Attributes
    ----------
    kernel_floor : float
        Truncate the x-integral where ``g(x)`` falls below this value.
    nodes_per_period : int
        Gauss-Legendre nodes per oscillation period of ``cos(x sqrt(R))``.
    max_nodes : int
        Refinement stops with :class:`AccuracyError` beyond this many nodes.
    survival_r_max : float
        Upper limit replacing infinity in :func:`normalization`.
    abs_tol : float
        Absolute tolerance on densities and survival values.
    tail_tol : float
        Largest acceptable ``W(survival_r_max) * survival_r_max``, the scale
        of mass lost by truncating :func:`normalization`.
    """

    kernel_floor: float = 1e-14
    nodes_per_period: int = 8
    max_nodes: int = 200_000
    survival_r_max: float = 1000.0
    abs_tol: float = 1e-10
    tail_tol: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.kernel_floor <= 1e-6:
            raise ConfigurationError("kernel_floor must lie in (0, 1e-6]")
        if int(self.nodes_per_period) != self.nodes_per_period or self.nodes_per_period < 8:
            raise ConfigurationError("nodes_per_period must be an integer >= 8")
        if self.max_nodes < 1000:
            raise ConfigurationError("max_nodes must be at least 1000")
        if not self.survival_r_max > 0.0:
            raise ConfigurationError("survival_r_max must be positive")
        if not self.abs_tol > 0.0:
            raise ConfigurationError("abs_tol must be positive")
        if not self.tail_tol > 0.0:
            raise ConfigurationError("tail_tol must be positive")


QUAD_PROFILES = {
    "default": QuadratureSettings(),
    "fast": QuadratureSettings(kernel_floor=1e-10, abs_tol=1e-8),
    "accurate": QuadratureSettings(kernel_floor=1e-16, nodes_per_period=16, abs_tol=1e-12),
}


def quad_profile(name=None):
    """Return preset settings by name, or from ``POWERTAIL_QUAD_PROFILE``."""
    if name is None:
        name = os.environ.get("POWERTAIL_QUAD_PROFILE", "default") or "default"
    try:
        return QUAD_PROFILES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown quadrature profile {name!r}; choose from {sorted(QUAD_PROFILES)}"
        ) from None


def _default_quad(quad):
    return quad_profile() if quad is None else quad


def kernel_power(params, x):
    """``g(x)``, the kernel raised to ``theta``, for the general-beta path."""
    t = params.kernel_scale * np.asarray(x, dtype=float)
    return np.exp(params.theta * log_cf_kernel(params.order, t))


def _beta2_log_kernel(T, theta):
    a = math.sqrt(T / (2.0 * theta))
    b = math.sqrt(theta * T / 2.0)

    def log_g(x):
        return theta * np.log1p(a * x) - b * x

    return log_g


def _general_log_kernel(params):
    def log_g(x):
        return params.theta * log_cf_kernel(params.order, params.kernel_scale * x)

    return log_g


def _cutoff(log_g, floor):
    """Smallest ``x`` with ``g(x) = floor``; ``g`` is strictly decreasing."""
    target = math.log(floor)
    hi = 1.0
    while log_g(np.array([hi]))[0] > target:
        hi *= 2.0
        if hi > 1e12:
            raise RangeError("kernel does not decay; parameters out of range")
    return optimize.brentq(lambda x: log_g(np.array([x]))[0] - target, 0.0, hi, xtol=1e-12)


_MIN_PANELS = 16
_GRADING = 0.15
_GRADED_PANELS = 20


class _InversionGrid:
    """Gauss-Legendre nodes on ``[0, x_max]`` that resolve ``cos(x y)`` up to ``y_max``.

    ``x_max`` is where ``g`` reaches the kernel floor; ``log_f`` (default
    ``log_g``) is the log-integrand evaluated at the nodes.
    """

    def __init__(self, log_g, quad, y_max, log_f=None):
        self.x_max = _cutoff(log_g, quad.kernel_floor)
        self.order = int(quad.nodes_per_period)
        self.log_f = log_g if log_f is None else log_f
        period = 2.0 * math.pi / y_max if y_max > 0.0 else math.inf
        self.panels = max(_MIN_PANELS, math.ceil(self.x_max / period))
        self.max_nodes = quad.max_nodes
        self._gl = np.polynomial.legendre.leggauss(self.order)

    def nodes(self, level):
        panels = self.panels << level
        if panels * self.order > self.max_nodes:
            return None
        ref, w = self._gl
        edges = np.linspace(0.0, self.x_max, panels + 1)
        # non-integer beta puts fractional powers of x in the integrand at
        # x = 0; geometric grading of the first panel restores fast convergence
        first = edges[1] * _GRADING ** np.arange(_GRADED_PANELS + 1)
        edges = np.concatenate([[0.0], first[::-1], edges[2:]])
        half = 0.5 * np.diff(edges)
        x = (edges[:-1, None] + half[:, None] * (ref + 1.0)).ravel()
        weights = (half[:, None] * w).ravel()
        return x, weights, self.log_f(x)


def _converged(grid, integrate, abs_tol, what):
    """Refine ``grid`` until two successive levels agree to ``abs_tol``."""
    level = 0
    err = math.inf
    previous = integrate(*grid.nodes(0))
    while True:
        level += 1
        nodes = grid.nodes(level)
        if nodes is None:
            raise AccuracyError(
                f"{what}: quadrature did not reach abs_tol={abs_tol:g} within max_nodes",
                estimate=previous,
                error=float(err),
            )
        current = integrate(*nodes)
        err = np.max(np.abs(current - previous))
        if err <= abs_tol:
            return current
        previous = current


def _as_r(R):
    r = np.asarray(R, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0.0):
        raise DomainError("R must be finite and nonnegative")
    return r


def _clip(values, abs_tol, what, upper=None):
    low = np.min(values) if values.size else 0.0
    if low < -abs_tol:
        raise AccuracyError(
            f"{what} is negative ({low:.3g}) beyond abs_tol={abs_tol:g}",
            estimate=values,
            error=-low,
        )
    out = np.maximum(values, 0.0)
    if upper is not None:
        out = np.minimum(out, upper)
    return out


def _shape_like(out, r):
    return float(out[0]) if r.ndim == 0 else out.reshape(r.shape)


def _density(log_g, T, r, quad, what):
    y = np.sqrt(np.atleast_1d(r).ravel())
    grid = _InversionGrid(log_g, quad, float(y.max()) if y.size else 0.0)

    def integrate(x, w, log_g):
        return np.cos(np.outer(y, x)) @ (w * np.exp(log_g))

    values = _converged(grid, integrate, quad.abs_tol * math.sqrt(math.pi * T), what)
    return _clip(values / math.sqrt(math.pi * T), quad.abs_tol, what)


def pdf(params, R, quad=None):
    """Probability density ``W(R)`` for general ``beta``.

    Parameters
    ----------
    params : ModelParams
    R : float or array_like
        Nonnegative impact-factor value(s).
    quad : QuadratureSettings, optional
        Defaults to the profile selected by ``POWERTAIL_QUAD_PROFILE``.

    Returns
    -------
    float or ndarray
        Density values. Negative ripple smaller than ``abs_tol`` is clipped
        to zero.

    Raises
    ------
    AccuracyError
        If the refinement cannot meet ``abs_tol`` within ``max_nodes``, or
        the result is negative by more than ``abs_tol``.
    """
    quad = _default_quad(quad)
    r = _as_r(R)
    out = _density(_general_log_kernel(params), params.T, r, quad, "pdf")
    return _shape_like(out, r)


def pdf_beta2(T, theta, R, quad=None):
    """Density for ``beta = 2`` using the elementary closed-form integrand."""
    quad = _default_quad(quad)
    ModelParams(T=T, beta=2.0, theta=theta)
    r = _as_r(R)
    out = _density(_beta2_log_kernel(float(T), float(theta)), float(T), r, quad, "pdf_beta2")
    return _shape_like(out, r)


def _survival_log_integrand(params):
    """``ln(-g'(x) / x)``, the survival integrand after integrating by parts."""
    c = params.kernel_scale
    log_g = _general_log_kernel(params)
    log_scale = math.log(params.theta * c * c)

    def log_h(x):
        return log_scale + log_g(x) + np.log(kernel_decay_ratio(params.order, c * x))

    return log_g, log_h


def survival(params, R, quad=None):
    """Survival function ``F(R) = int_R^inf W(R') dR'``.

    ``F(0)`` equals the total mass of the density, which is slightly below
    one for finite ``theta``; see :func:`survival_normalized`.

    Returns
    -------
    float or ndarray
        Values in ``[0, 1]``, non-increasing in ``R``.
    """
    quad = _default_quad(quad)
    r = _as_r(R)
    y = np.sqrt(np.atleast_1d(r).ravel())
    log_g, log_h = _survival_log_integrand(params)
    grid = _InversionGrid(log_g, quad, float(y.max()) if y.size else 0.0, log_f=log_h)
    scale = 2.0 / math.sqrt(math.pi * params.T)

    def integrate(x, w, log_f):
        return np.cos(np.outer(y, x)) @ (w * np.exp(log_f))

    values = _converged(grid, integrate, quad.abs_tol / scale, "survival")
    out = _clip(values * scale, quad.abs_tol, "survival", upper=1.0)
    return _shape_like(out, r)


def survival_normalized(params, R, quad=None):
    """Survival function divided by the total mass, so that it starts at 1."""
    quad = _default_quad(quad)
    r = _as_r(R)
    flat = np.atleast_1d(r).ravel()
    values = survival(params, np.concatenate([[0.0], flat]), quad)
    out = np.minimum(values[1:] / values[0], 1.0)
    return _shape_like(out, r)


def _check_t(T):
    T = float(T)
    if not math.isfinite(T) or T <= 0.0:
        raise DomainError(f"T must be positive, got {T!r}")
    return T


def pdf_small_r(T, R):
    """Exponential small-R approximation ``exp(-R/T) / T``."""
    T = _check_t(T)
    r = _as_r(R)
    out = np.exp(-r / T) / T
    return float(out) if out.ndim == 0 else out


def survival_small_r(T, R):
    """Exponential small-R survival approximation ``exp(-R/T)``."""
    T = _check_t(T)
    r = _as_r(R)
    out = np.exp(-r / T)
    return float(out) if out.ndim == 0 else out


def normalization(params, quad=None):
    """Total mass ``int_0^inf W(R) dR``, integrated over ``y = sqrt(R)``.

    The integrand ``2 y W(y**2)`` is smooth and decays like ``y**(1 - 2 beta)``;
    it is integrated on Gauss-Legendre panels up to ``sqrt(survival_r_max)``.

    Raises
    ------
    ConfigurationError
        If ``W(survival_r_max) * survival_r_max`` exceeds ``tail_tol``, i.e.
        the truncated tail is not negligible.
    """
    quad = _default_quad(quad)
    r_max = quad.survival_r_max
    tail = pdf(params, r_max, quad) * r_max
    if tail > quad.tail_tol:
        raise ConfigurationError(
            f"survival_r_max={r_max:g} truncates the tail: W(r_max) * r_max = {tail:.3g}"
            f" exceeds tail_tol={quad.tail_tol:g}"
        )
    y_max = math.sqrt(r_max)
    ref, w = np.polynomial.legendre.leggauss(int(quad.nodes_per_period))
    grid = _InversionGrid(_general_log_kernel(params), quad, y_max)
    # the density varies on the scale sqrt(T) in y
    y_panels = max(_MIN_PANELS, math.ceil(4.0 * y_max / math.sqrt(params.T)))

    def y_nodes(level):
        panels = y_panels << level
        edges = np.linspace(0.0, y_max, panels + 1)
        half = 0.5 * (edges[1] - edges[0])
        return (edges[:-1, None] + half * (ref + 1.0)).ravel(), np.tile(w * half, panels)

    def integrate(x, wx, log_g, level):
        y, wy = y_nodes(level)
        density = np.cos(np.outer(y, x)) @ (wx * np.exp(log_g))
        return np.sum(wy * 2.0 * y * density) / math.sqrt(math.pi * params.T)

    level = 0
    previous = integrate(*grid.nodes(0), 0)
    while True:
        level += 1
        nodes = grid.nodes(level)
        if nodes is None:
            raise AccuracyError(
                "normalization: quadrature did not converge within max_nodes",
                estimate=previous,
            )
        current = integrate(*nodes, level)
        if abs(current - previous) <= quad.abs_tol:
            return float(current)
        previous = current


def loglog_slope(r, f):
    """Least-squares slope of ``ln f`` against ``ln r``.

    Raises
    ------
    RangeError
        If any ``f`` is not strictly positive.
    """
    r = np.asarray(r, dtype=float)
    f = np.asarray(f, dtype=float)
    if r.shape != f.shape or r.size < 2:
        raise DomainError("need at least two matching (r, f) points")
    if np.any(r <= 0.0):
        raise DomainError("r must be positive")
    if np.any(~(f > 0.0)):
        raise RangeError("survival underflows to zero inside the slope range")
    slope, _ = np.polyfit(np.log(r), np.log(f), 1)
    return float(slope)


def tail_slope(params, r_lo, r_hi, quad=None, points=32):
    """Log-log slope of the survival function over ``[r_lo, r_hi]``.

    Measures the power-law exponent of the tail empirically on a log-spaced
    grid of ``points`` abscissae.
    """
    if not 0.0 < r_lo < r_hi:
        raise DomainError("need 0 < r_lo < r_hi")
    r = np.geomspace(r_lo, r_hi, points)
    return loglog_slope(r, survival(params, r, quad))


def with_overrides(quad, **changes):
    """Copy of ``quad`` with the non-None ``changes`` applied."""
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(quad, **changes) if changes else quad
