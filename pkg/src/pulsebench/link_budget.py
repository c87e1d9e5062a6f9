"""Fiber vs free-space attenuation as a function of distance.

Fiber power loss is exponential in distance, i.e. linear in dB (alpha * d).
Free-space geometric loss is quadratic in distance, i.e. logarithmic in dB
(20*log10(d/d_ref) above the fixed system loss at the reference distance).
Because a line eventually beats a logarithm, fiber always loses at long
range; `crossover_distance` finds where.

Units are fixed: km in, dB out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SEARCH_MAX_KM = 1e6
TOLERANCE_KM = 1e-3  # 1 m


class LinkRangeError(ValueError):
    """Distance outside the model's validity range."""


class NoCrossover(RuntimeError):
    """No fiber/free-space crossover inside the search bracket."""


@dataclass(frozen=True)
class FiberChannel:
    alpha_db_per_km: float = 0.2

    def __post_init__(self):
        if self.alpha_db_per_km <= 0:
            raise ValueError("attenuation coefficient must be positive")


@dataclass(frozen=True)
class FreeSpaceChannel:
    d_ref_km: float = 1.0
    loss_at_ref_db: float = 0.0

    def __post_init__(self):
        if self.d_ref_km <= 0:
            raise ValueError("reference distance must be positive")
        if self.loss_at_ref_db < 0:
            raise ValueError("reference loss must be non-negative")


def fiber_loss_db(d_km: float, ch: FiberChannel) -> float:
    """alpha * d."""
    if d_km < 0:
        raise LinkRangeError("distance must be non-negative")
    return ch.alpha_db_per_km * d_km


def freespace_loss_db(d_km: float, ch: FreeSpaceChannel) -> float:
    """loss_at_ref + 20*log10(d / d_ref), valid from d_ref outward."""
    if d_km < ch.d_ref_km:
        raise LinkRangeError(
            f"distance {d_km} km below the {ch.d_ref_km} km validity floor"
        )
    return ch.loss_at_ref_db + 20.0 * math.log10(d_km / ch.d_ref_km)


def crossover_distance(
    fiber: FiberChannel,
    fs: FreeSpaceChannel,
    d_max_km: float = SEARCH_MAX_KM,
    tol_km: float = TOLERANCE_KM,
) -> float:
    """Largest distance where the two losses are equal.

    Beyond the returned distance fiber loss strictly exceeds free-space
    loss. Found by a log-spaced sign scan for the last crossing, refined by
    bisection to `tol_km`.
    """

    def excess(d: float) -> float:
        return fiber_loss_db(d, fiber) - freespace_loss_db(d, fs)

    lo_exp = math.log10(fs.d_ref_km)
    hi_exp = math.log10(d_max_km)
    n = 2048
    grid = [10 ** (lo_exp + (hi_exp - lo_exp) * i / (n - 1)) for i in range(n)]
    bracket = None
    for a, b in zip(grid, grid[1:]):
        if excess(a) <= 0.0 < excess(b):
            bracket = (a, b)  # keep the last upward crossing
    if bracket is None:
        raise NoCrossover(
            f"fiber - free-space loss has no upward zero crossing in "
            f"[{fs.d_ref_km}, {d_max_km}] km"
        )
    lo, hi = bracket
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if excess(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def loss_table(
    fiber: FiberChannel,
    fs: FreeSpaceChannel,
    d_min_km: float,
    d_max_km: float,
    points: int,
) -> list[tuple[float, float, float]]:
    """Rows of (distance, fiber loss, free-space loss) on a linear grid."""
    if points < 2:
        raise ValueError("need at least two grid points")
    if d_min_km < fs.d_ref_km:
        raise LinkRangeError(
            f"grid start {d_min_km} km below validity floor {fs.d_ref_km} km"
        )
    if d_max_km <= d_min_km:
        raise ValueError("d_max must exceed d_min")
    rows = []
    for i in range(points):
        d = d_min_km + (d_max_km - d_min_km) * i / (points - 1)
        rows.append((d, fiber_loss_db(d, fiber), freespace_loss_db(d, fs)))
    return rows
