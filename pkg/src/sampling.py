import logging
from typing import Tuple

import numpy as np

from .diffeo import Diffeo
from .grid import Field, Grid, deriv, trig_field
from .metrics import CentralVec

logger = logging.getLogger(__name__)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    # counter-based: the same (seed, stream) always gives the same numbers
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def random_trig(grid: Grid, rng: np.random.Generator, degree: int = 4, scale: float = 1.0,
                mean: bool = False) -> Field:
    if degree < 1:
        raise ValueError(f"Degree must be positive, got {degree}")
    if degree > grid.n // 3:
        raise ValueError(f"Degree {degree} is not resolved on {grid}")
    cos_coeffs = rng.normal(size=degree) * scale
    sin_coeffs = rng.normal(size=degree) * scale
    offset = float(rng.normal() * scale) if mean else 0.0
    return trig_field(grid, cos_coeffs, sin_coeffs, offset)


def random_vec(grid: Grid, rng: np.random.Generator, degree: int = 4, central: bool = True,
               scale: float = 1.0) -> CentralVec:
    x = random_trig(grid, rng, degree, scale)
    return CentralVec(x, float(rng.normal() * scale) if central else 0.0)


def small_diffeo(grid: Grid, rng: np.random.Generator, degree: int = 3, size: float = 0.2) -> Diffeo:
    if not 0.0 < size < 1.0:
        raise ValueError(f"Slope bound must lie in (0, 1), got {size}")
    disp = random_trig(grid, rng, degree)
    steepest = deriv(disp, 1).sup()
    if steepest > 0:
        disp = disp * (size / steepest)
    return Diffeo(disp)


def small_triple(grid: Grid, rng: np.random.Generator, degree: int = 3,
                 size: float = 0.2) -> Tuple[Diffeo, Diffeo, Diffeo]:
    return (small_diffeo(grid, rng, degree, size),
            small_diffeo(grid, rng, degree, size),
            small_diffeo(grid, rng, degree, size))
