"""Inverse-transform sampling from a tabulated survival function.

Uniform variates come from numpy's MT19937 Mersenne Twister, a twisted
generalized feedback shift register, seeded through ``SeedSequence``. The
stream for a given seed is fixed by the algorithm, not by the platform.
"""

from dataclasses import dataclass
import math

import numpy as np

from .distcore import ModelParams, normalization, quad_profile, survival
from .errors import AccuracyError, ConfigurationError, DomainError, RangeError

__all__ = ["GridSpec", "SurvivalTable", "tabulate", "sample", "uniform_stream"]


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced abscissae ``points`` between ``r_min`` and ``r_max``."""

    r_min: float = 1e-3
    r_max: float = 500.0
    points: int = 400

    def __post_init__(self):
        if self.points < 2:
            raise ConfigurationError(f"grid needs at least 2 points, got {self.points}")
        if not 0.0 < self.r_min < self.r_max or not math.isfinite(self.r_max):
            raise ConfigurationError("grid needs 0 < r_min < r_max < inf")


@dataclass(frozen=True)
class SurvivalTable:
    """Tabulated, normalized survival function ready for inversion.

    Attributes
    ----------
    r_grid : ndarray
        Ascending abscissae; the first is 0.
    f_values : ndarray
        Survival values, ``f_values[0] == 1``, strictly decreasing.
    params : ModelParams
    mass : float
        Total mass of the un-normalized density the table was divided by.
    dropped : int
        Grid points removed because quadrature ripple broke monotonicity.
    """

    r_grid: np.ndarray
    f_values: np.ndarray
    params: ModelParams
    mass: float
    dropped: int = 0

    @property
    def r_min(self):
        return float(self.r_grid[1])

    @property
    def r_max(self):
        return float(self.r_grid[-1])


def tabulate(params, quad=None, grid=None, floor=1e-3):
    """Tabulate the normalized survival function of ``params``.

    The raw survival values are divided by the total mass ``F(0)``. That mass
    is cross-checked against :func:`powertail.distcore.normalization`, which
    integrates the density along an independent route; the two must agree
    within 1%.

    Parameters
    ----------
    params : ModelParams
    quad : QuadratureSettings, optional
    grid : GridSpec, optional
    floor : float
        The last tabulated value must fall below this.

    Raises
    ------
    RangeError
        If the survival function is still above ``floor`` at ``r_max``.
    AccuracyError
        If the two mass estimates disagree by more than 1%.
    """
    quad = quad_profile() if quad is None else quad
    grid = GridSpec() if grid is None else grid
    nodes = np.geomspace(grid.r_min, grid.r_max, grid.points)
    nodes[[0, -1]] = grid.r_min, grid.r_max
    r = np.concatenate([[0.0], nodes])
    raw = survival(params, r, quad)
    mass = float(raw[0])
    check = normalization(params, quad)
    if abs(check - mass) > 0.01:
        raise AccuracyError(
            f"mass estimates disagree: survival(0)={mass:.6f}, normalization={check:.6f}",
            estimate=mass,
            error=abs(check - mass),
        )
    f = raw / mass
    if not f[-1] < floor:
        raise RangeError(
            f"survival is {f[-1]:.3g} at r_max={grid.r_max:g}, above floor {floor:g};"
            " increase r_max"
        )
    keep = [0]
    for i in range(1, len(f)):
        if 0.0 < f[i] < f[keep[-1]]:
            keep.append(i)
    keep = np.asarray(keep)
    return SurvivalTable(
        r_grid=r[keep],
        f_values=f[keep],
        params=params,
        mass=mass,
        dropped=len(f) - len(keep),
    )


def uniform_stream(seed, n):
    """``n`` uniforms on ``(0, 1]`` from MT19937 seeded with ``seed``."""
    if int(seed) != seed or seed < 0 or seed >= 2**64:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    gen = np.random.Generator(np.random.MT19937(int(seed)))
    return 1.0 - gen.random(n)


def sample(table, n, seed):
    """Draw ``n`` variates by inverting the table at uniform levels.

    Between nodes the inverse is linear in ``(ln F, ln R)``. Levels above
    ``F(r_min)`` map to ``r_min`` and levels below the last tabulated value
    map to ``r_max``, so every value lies in ``[r_min, r_max]``.

    Returns
    -------
    ndarray
        ``n`` nonnegative values; identical for identical ``(table, n, seed)``.
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    u = uniform_stream(seed, n)
    # skip the R = 0 node: its log is -inf and it only carries mass below r_min
    log_f = np.log(table.f_values[1:])[::-1]
    log_r = np.log(table.r_grid[1:])[::-1]
    return np.exp(np.interp(np.log(u), log_f, log_r))
