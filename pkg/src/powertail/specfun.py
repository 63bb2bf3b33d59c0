"""Special functions behind the characteristic-function kernel.

The kernel is the normalized Matern-type function

    phi_nu(t) = 2**(1 - nu) / Gamma(nu) * t**nu * K_nu(t),   phi_nu(0) = 1,

whose ``theta``-th power is Fourier-inverted in :mod:`powertail.distcore`.
For ``nu = 3/2`` it reduces to ``(1 + t) * exp(-t)``.

Note on normalization: the bracketed Bessel factor in the original general
formula tends to ``2**nu`` at the origin and has the wrong dependence on the
integration variable to reproduce the closed-form ``beta = 2`` integrand.
The form above is used instead; it equals 1 at ``t = 0``, matches the
``beta = 2`` integrand exactly and gives the exponential small-R limit for
every ``nu > 1``.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError, RangeError

__all__ = [
    "ln_gamma",
    "bessel_k",
    "log_bessel_k",
    "cf_kernel",
    "log_cf_kernel",
    "kernel_decay_ratio",
    "check_order",
]


def ln_gamma(x):
    """Natural log of the gamma function for positive ``x``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"ln_gamma requires finite x > 0, got {x!r}")
    return float(special.gammaln(x))


def _check_bessel_args(nu, x):
    nu = float(nu)
    if not math.isfinite(nu):
        raise DomainError(f"Bessel order must be finite, got {nu!r}")
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0.0):
        raise DomainError("bessel_k requires finite x > 0")
    return abs(nu), x


def log_bessel_k(nu, x):
    """``ln K_nu(x)``, evaluated through the exponentially scaled function.

    Stays finite where ``K_nu(x)`` itself would underflow (large ``x``).
    """
    nu, x = _check_bessel_args(nu, x)
    scaled = special.kve(nu, x)
    if np.any(~np.isfinite(scaled)):
        raise RangeError(f"K_{nu}(x) overflows for some x in the input")
    out = np.log(scaled) - x
    return float(out) if out.ndim == 0 else out


def bessel_k(nu, x):
    """Modified Bessel function of the second kind ``K_nu(x)``.

    Parameters
    ----------
    nu : float
        Real order. ``K`` is even in ``nu``, so negative orders are folded.
    x : float or array_like
        Positive argument.

    Returns
    -------
    float or ndarray
        ``K_nu(x) > 0``.

    Raises
    ------
    DomainError
        If ``x <= 0`` or an input is not finite.
    RangeError
        If the value overflows (tiny ``x`` with large order) or underflows
        to zero; use :func:`log_bessel_k` in that regime.
    """
    nu, x = _check_bessel_args(nu, x)
    out = special.kv(nu, x)
    if np.any(~np.isfinite(out)):
        raise RangeError(f"K_{nu}(x) overflows for some x in the input")
    if np.any(out == 0.0):
        raise RangeError(f"K_{nu}(x) underflows to zero; use log_bessel_k")
    return float(out) if out.ndim == 0 else out


def check_order(nu):
    """Validate a kernel order; the distribution exists only for ``nu > 1``."""
    nu = float(nu)
    if not math.isfinite(nu) or nu <= 1.0:
        raise DomainError(
            f"kernel order nu = beta - 1/2 must exceed 1 (beta > 3/2), got {nu!r}"
        )
    return nu


# Below this argument the leading terms of the small-t expansion are used;
# the direct formula loses relative accuracy in 1 - phi there.
_SMALL_T = 1e-6


def log_cf_kernel(nu, t):
    """``ln phi_nu(t)`` for ``t >= 0``; see :func:`cf_kernel`."""
    nu = check_order(nu)
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0):
        raise DomainError("cf_kernel requires finite t >= 0")
    out = np.empty_like(t)
    small = t < _SMALL_T
    # ln phi = -t^2 / (4 (nu - 1)) + O(t^min(4, 2 nu))
    out[small] = -t[small] ** 2 / (4.0 * (nu - 1.0))
    big = ~small
    if np.any(big):
        tb = t[big]
        out[big] = (
            (1.0 - nu) * math.log(2.0)
            - special.gammaln(nu)
            + nu * np.log(tb)
            + np.log(special.kve(nu, tb))
            - tb
        )
    # rounding can push ln phi a hair above zero just past the series cutoff
    np.minimum(out, 0.0, out=out)
    return float(out) if out.ndim == 0 else out


def cf_kernel(nu, t):
    """Normalized characteristic-function kernel ``phi_nu(t)``.

    ``phi_nu(t) = 2**(1-nu) / Gamma(nu) * t**nu * K_nu(t)`` with
    ``phi_nu(0) = 1``. Strictly decreasing on ``t >= 0`` with values in
    ``(0, 1]``. Computed in log space so large ``t`` underflows gracefully
    instead of producing ``0 * inf``.

    Parameters
    ----------
    nu : float
        Order, ``nu = beta - 1/2``; must exceed 1.
    t : float or array_like
        Nonnegative argument.

    Raises
    ------
    DomainError
        If ``nu <= 1`` or ``t`` is negative or not finite.
    """
    out = np.exp(log_cf_kernel(nu, t))
    return float(out) if np.ndim(out) == 0 else out


def kernel_decay_ratio(nu, t):
    """``-phi_nu'(t) / (t * phi_nu(t))``, equal to ``K_{nu-1}(t) / (t K_nu(t))``.

    Positive and bounded by its value ``1 / (2 (nu - 1))`` at ``t = 0``. It
    turns the survival integral into a cancellation-free cosine transform.
    """
    nu = check_order(nu)
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0):
        raise DomainError("kernel_decay_ratio requires finite t >= 0")
    out = np.full_like(t, 0.5 / (nu - 1.0))
    pos = t > 0.0
    tp = t[pos]
    out[pos] = special.kve(nu - 1.0, tp) / (tp * special.kve(nu, tp))
    return float(out) if out.ndim == 0 else out
