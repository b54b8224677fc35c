"""
Desired-pattern masks and the one-sided violation integral used as fitness.

The fitness is the integral over θ in degrees of the positive part of
(pattern dB - mask dB), evaluated with the trapezoid rule on the pattern grid.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from config import DEFAULT_FLOOR_DB, DEFAULT_GRID_STEP_DEG, DEFAULT_SLL_CEILING_DB, ZERO_EXCITATION_FITNESS
from modules.array_model import cosine_terms, pattern_from_weights, theta_grid
from modules.errors import InvalidConfigError, InvalidInputError

logger = logging.getLogger(__name__)

# angles closer than this to a sector edge count as inside
EDGE_TOL = 1e-9


@dataclass(frozen=True)
class NullSector:
    center: float
    half_width: float
    depth_db: float

    @property
    def low(self):
        return self.center - self.half_width

    @property
    def high(self):
        return self.center + self.half_width


@dataclass(frozen=True, eq=False)
class PatternMask:
    theta_deg: np.ndarray
    afd_db: np.ndarray
    main_sector: tuple = None
    sll_ceiling_db: float = DEFAULT_SLL_CEILING_DB
    null_sectors: tuple = ()

    def __post_init__(self):
        if len(self.theta_deg) != len(self.afd_db):
            raise InvalidInputError("mask grid and ceiling must share one length")
        if np.any(np.asarray(self.afd_db) > 0.0):
            raise InvalidInputError("mask ceiling must be <= 0 dB everywhere")


def build_mask(grid, main_sector, sll_ceiling_db=DEFAULT_SLL_CEILING_DB, null_sectors=()):
    """
    Piecewise ceiling: 0 dB on the main sector, sll_ceiling_db elsewhere,
    lowered to each null sector's depth inside it (the deepest wins on overlap).

    Args:
        grid: theta grid in degrees (as produced by theta_grid)
        main_sector: (low, high) degrees
        sll_ceiling_db: side-lobe ceiling, <= 0
        null_sectors: iterable of NullSector or (center, half_width, depth_db)
    """
    theta = np.asarray(grid, dtype=float)
    low, high = (float(v) for v in main_sector)
    if not 0.0 <= low < high <= 180.0:
        raise InvalidConfigError(f"main_sector must satisfy 0 <= low < high <= 180, got {main_sector}", key="main_sector")
    in_main = (theta >= low - EDGE_TOL) & (theta <= high + EDGE_TOL)
    if not np.any(in_main):
        raise InvalidConfigError(f"main_sector {main_sector} contains no grid point", key="main_sector")
    if sll_ceiling_db > 0:
        raise InvalidConfigError(f"sll_ceiling_db must be <= 0, got {sll_ceiling_db}", key="sll_ceiling_db")

    sectors = tuple(s if isinstance(s, NullSector) else NullSector(*(float(v) for v in s)) for s in null_sectors)
    afd_db = np.full(theta.shape, float(sll_ceiling_db))
    for sector in sectors:
        if sector.half_width < 0:
            raise InvalidConfigError(f"null sector half_width must be >= 0, got {sector.half_width}", key="null_sectors")
        if sector.depth_db > 0:
            raise InvalidConfigError(f"null sector depth must be <= 0 dB, got {sector.depth_db}", key="null_sectors")
        if sector.low <= high and sector.high >= low:
            raise InvalidConfigError(
                f"null sector at {sector.center}° overlaps main sector {main_sector}", key="null_sectors"
            )
        inside = np.abs(theta - sector.center) <= sector.half_width + EDGE_TOL
        afd_db[inside] = np.minimum(afd_db[inside], sector.depth_db)
    afd_db[in_main] = 0.0
    return PatternMask(theta, afd_db, (low, high), float(sll_ceiling_db), sectors)


def fitness(pattern, mask):
    """Trapezoid integral of max(0, af_db - afd_db) over θ, in dB·degrees."""
    if len(pattern.theta_deg) != len(mask.theta_deg) or not np.allclose(pattern.theta_deg, mask.theta_deg):
        raise InvalidInputError("pattern and mask grids differ")
    violation = np.maximum(0.0, pattern.af_db - mask.afd_db)
    return float(trapezoid(violation, pattern.theta_deg))


def make_objective(geometry, mask, grid_step=DEFAULT_GRID_STEP_DEG, floor_db=DEFAULT_FLOOR_DB):
    """
    Objective over the amplitude box [0, 1]^M: amplitudes -> pattern -> fitness.

    Phases are held at zero. The all-zero vector maps to ZERO_EXCITATION_FITNESS.
    """
    theta = theta_grid(grid_step)
    if len(theta) != len(mask.theta_deg):
        raise InvalidInputError("mask grid does not match grid_step")
    terms = cosine_terms(geometry, theta)
    num_pairs = geometry.num_pairs

    def objective(amplitudes):
        a = np.asarray(amplitudes, dtype=float)
        if a.shape != (num_pairs,):
            raise InvalidInputError(f"expected {num_pairs} amplitudes, got shape {a.shape}")
        if not np.any(a > 0.0):
            return ZERO_EXCITATION_FITNESS
        weights = a.astype(complex)
        return fitness(pattern_from_weights(theta, terms, weights, grid_step, floor_db), mask)

    return objective
