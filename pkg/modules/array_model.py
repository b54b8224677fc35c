"""
Array factor of a symmetric 2M-element linear array and the radiation
metrics derived from it (side lobe level, null depth, main-lobe bounds).

Angles are measured from the array axis in degrees; broadside is 90°.
Element positions are distances from the array center in wavelengths.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.signal import argrelextrema

from config import DEFAULT_FLOOR_DB, DEFAULT_GRID_STEP_DEG, DEFAULT_SPACING_WAVELENGTHS
from modules.errors import InvalidInputError, NoSideLobesError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ArrayGeometry:
    """Half of a symmetric array: M element distances d(n) and the wave number β."""

    positions: tuple
    wave_number: float = TWO_PI

    def __post_init__(self):
        positions = tuple(float(p) for p in np.ravel(self.positions))
        if not positions:
            raise InvalidInputError("geometry needs at least one element pair")
        if positions[0] <= 0 or any(b <= a for a, b in zip(positions, positions[1:])):
            raise InvalidInputError(f"positions must be positive and strictly increasing, got {positions}")
        if not self.wave_number > 0:
            raise InvalidInputError(f"wave_number must be > 0, got {self.wave_number}")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "wave_number", float(self.wave_number))

    @property
    def num_pairs(self):
        return len(self.positions)

    @property
    def num_elements(self):
        return 2 * len(self.positions)


@dataclass(frozen=True)
class Excitation:
    """Amplitudes a(n) in [0, 1] and phases φ(n) in radians for the half array."""

    amplitudes: tuple
    phases: tuple = None

    def __post_init__(self):
        amplitudes = tuple(float(a) for a in np.ravel(self.amplitudes))
        if self.phases is None:
            phases = (0.0,) * len(amplitudes)
        else:
            phases = tuple(float(p) for p in np.ravel(self.phases))
        if len(phases) != len(amplitudes):
            raise InvalidInputError(
                f"{len(amplitudes)} amplitudes but {len(phases)} phases"
            )
        if any(not 0.0 <= a <= 1.0 for a in amplitudes):
            raise InvalidInputError("every amplitude must lie in [0, 1]")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def uniform(cls, num_pairs):
        return cls((1.0,) * num_pairs)

    def weights(self):
        """Complex feed coefficients a(n)·e^{jφ(n)}."""
        return np.asarray(self.amplitudes) * np.exp(1j * np.asarray(self.phases))


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    theta_deg: np.ndarray
    af_linear: np.ndarray
    af_db: np.ndarray
    peak_index: int
    floor_db: float = DEFAULT_FLOOR_DB
    grid_step: float = DEFAULT_GRID_STEP_DEG

    def __post_init__(self):
        if not (len(self.theta_deg) == len(self.af_linear) == len(self.af_db)):
            raise InvalidInputError("pattern arrays must share one length")


def uniform_geometry(num_pairs, spacing=DEFAULT_SPACING_WAVELENGTHS, wave_number=TWO_PI):
    """Evenly spaced symmetric layout, d(n) = (2n - 1)·s/2."""
    if num_pairs < 1:
        raise InvalidInputError(f"num_pairs must be >= 1, got {num_pairs}")
    if spacing <= 0:
        raise InvalidInputError(f"spacing must be > 0, got {spacing}")
    n = np.arange(1, num_pairs + 1)
    return ArrayGeometry(tuple((2 * n - 1) * spacing / 2.0), wave_number)


def theta_grid(grid_step=DEFAULT_GRID_STEP_DEG):
    """Uniform grid over [0°, 180°]; the step must divide 180 evenly."""
    if grid_step <= 0:
        raise InvalidInputError(f"grid_step must be > 0, got {grid_step}")
    intervals = 180.0 / grid_step
    count = int(round(intervals))
    if count < 2 or abs(intervals - count) > 1e-9 * max(1.0, intervals):
        raise InvalidInputError(f"grid_step {grid_step} does not divide 180 evenly")
    return np.linspace(0.0, 180.0, count + 1)


def cosine_terms(geometry, theta_deg):
    """Matrix of cos(β·d(n)·cos θ), one row per angle."""
    cos_theta = np.cos(np.radians(np.atleast_1d(np.asarray(theta_deg, dtype=float))))
    return np.cos(geometry.wave_number * np.outer(cos_theta, geometry.positions))


def _check_consistent(geometry, excitation):
    if len(excitation.amplitudes) != geometry.num_pairs:
        raise InvalidInputError(
            f"excitation has {len(excitation.amplitudes)} amplitudes, "
            f"geometry has {geometry.num_pairs} element pairs"
        )


def array_factor(geometry, excitation, theta):
    """
    AF(θ) = 2·Σ a(n)·e^{jφ(n)}·cos(β·d(n)·cos θ).

    Accepts a scalar angle (returns a complex scalar) or an array of angles.
    """
    _check_consistent(geometry, excitation)
    theta_arr = np.asarray(theta, dtype=float)
    if np.any((theta_arr < 0.0) | (theta_arr > 180.0)):
        raise InvalidInputError(f"theta must lie in [0, 180] degrees, got {theta}")
    af = 2.0 * (cosine_terms(geometry, theta_arr) @ excitation.weights())
    if theta_arr.ndim == 0:
        return complex(af[0])
    return af


def pattern_from_weights(theta_deg, terms, weights, grid_step, floor_db=DEFAULT_FLOOR_DB):
    """Normalize |2·terms·weights| into a RadiationPattern. Shared by compute_pattern and objectives."""
    af_linear = np.abs(2.0 * (terms @ weights))
    peak_index = int(np.argmax(af_linear))
    peak = af_linear[peak_index]
    if peak == 0.0:
        raise InvalidInputError("all-zero excitation: pattern normalization is undefined")
    with np.errstate(divide="ignore"):
        af_db = 20.0 * np.log10(af_linear / peak)
    af_db = np.maximum(af_db, floor_db)
    return RadiationPattern(theta_deg, af_linear, af_db, peak_index, float(floor_db), float(grid_step))


def compute_pattern(geometry, excitation, grid_step=DEFAULT_GRID_STEP_DEG, floor_db=DEFAULT_FLOOR_DB):
    """Sample |AF| over [0°, 180°] and derive the normalized dB view clamped at floor_db."""
    _check_consistent(geometry, excitation)
    if floor_db >= 0:
        raise InvalidInputError(f"floor_db must be < 0, got {floor_db}")
    theta = theta_grid(grid_step)
    return pattern_from_weights(theta, cosine_terms(geometry, theta), excitation.weights(), grid_step, floor_db)


def _main_lobe_indices(pattern):
    # walk downhill from the peak; the first point where the pattern rises again is the bound
    af_db = pattern.af_db
    lo = pattern.peak_index
    while lo > 0 and af_db[lo - 1] <= af_db[lo]:
        lo -= 1
    hi = pattern.peak_index
    last = len(af_db) - 1
    while hi < last and af_db[hi + 1] <= af_db[hi]:
        hi += 1
    return lo, hi


def main_lobe_bounds(pattern):
    """Angles of the nearest minima on either side of the peak (grid ends when there are none)."""
    lo, hi = _main_lobe_indices(pattern)
    return float(pattern.theta_deg[lo]), float(pattern.theta_deg[hi])


def local_maxima(af_db):
    """
    Indices of strict local maxima.

    The pattern is even about 0° and 180° (cos θ is), so the grid is
    extended by reflection and an endpoint counts when it exceeds its
    only neighbor.
    """
    padded = np.pad(np.asarray(af_db, dtype=float), 1, mode="reflect")
    return argrelextrema(padded, np.greater)[0] - 1


def side_lobe_level(pattern):
    """Highest local maximum outside the main lobe, in dB relative to the peak."""
    lo, hi = _main_lobe_indices(pattern)
    peaks = local_maxima(pattern.af_db)
    outside = peaks[(peaks < lo) | (peaks > hi)]
    if outside.size == 0:
        raise NoSideLobesError("no side lobes: the pattern has a single lobe")
    return float(np.max(pattern.af_db[outside]))


def null_depth(pattern, angle):
    """Normalized level at the grid point nearest to `angle` (already clamped at the floor)."""
    if not 0.0 <= angle <= 180.0:
        raise InvalidInputError(f"angle must lie in [0, 180] degrees, got {angle}")
    idx = int(np.argmin(np.abs(pattern.theta_deg - angle)))
    return float(pattern.af_db[idx])


def first_null_beamwidth(pattern):
    lo, hi = main_lobe_bounds(pattern)
    return hi - lo


def half_power_beamwidth(pattern):
    """Width between the -3 dB crossings of the main lobe, interpolated linearly between samples."""
    lo, hi = _main_lobe_indices(pattern)
    theta, af_db, peak = pattern.theta_deg, pattern.af_db, pattern.peak_index
    level = af_db[peak] - 3.0

    left = theta[lo]
    for i in range(peak, lo, -1):
        if af_db[i - 1] < level:
            left = np.interp(level, [af_db[i - 1], af_db[i]], [theta[i - 1], theta[i]])
            break
    right = theta[hi]
    for i in range(peak, hi):
        if af_db[i + 1] < level:
            right = np.interp(level, [af_db[i + 1], af_db[i]], [theta[i + 1], theta[i]])
            break
    return float(right - left)
