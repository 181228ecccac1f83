import logging
from enum import Enum
from math import comb
from typing import Dict, List, Tuple

import numpy as np

from .grid import Field, Grid, GridMismatchError, MultiplierSpec, deriv, quad

logger = logging.getLogger(__name__)

MAX_SOBOLEV_ORDER = 4


class Family(Enum):
    HK = "h"
    GA = "ga"


class InertiaSpec:
    """Inertia operator A = sum_i c_i (-1)^i d^{2i} of a right-invariant metric.

    HK(k) has c_0 = ... = c_k = 1, GA(A) has c_0 = 1, c_1 = A. ``central``
    selects the Virasoro algebra (brackets keep the Gelfand-Fuchs part) over
    the plain algebra of vector fields.
    """

    def __init__(self, family: Family, k: int = 0, A: float = 1.0, central: bool = False):
        if family == Family.HK:
            if int(k) != k or not 0 <= k <= MAX_SOBOLEV_ORDER:
                raise ValueError(f"Sobolev order k must be an integer in 0..{MAX_SOBOLEV_ORDER}, got {k}")
            coefficients = tuple(1.0 for _ in range(int(k) + 1))
        elif family == Family.GA:
            if not np.isfinite(A) or A < 0:
                raise ValueError(f"Parameter A must be non-negative, got {A}")
            coefficients = (1.0, float(A))
        else:
            raise ValueError(f"Unknown metric family: {family}")

        self.family = family
        self.k = int(k) if family == Family.HK else 1
        self.A = float(A) if family == Family.GA else 0.0
        self.central = bool(central)
        self._coefficients = coefficients
        self._cache: Dict[Grid, np.ndarray] = {}

    @classmethod
    def hk(cls, k: int, central: bool = False) -> 'InertiaSpec':
        return cls(Family.HK, k=k, central=central)

    @classmethod
    def ga(cls, A: float, central: bool = False) -> 'InertiaSpec':
        return cls(Family.GA, A=A, central=central)

    @classmethod
    def parse(cls, text: str, central: bool = False) -> 'InertiaSpec':
        name = text.strip().lower()
        if name.startswith("ga"):
            rest = name[2:].lstrip(":=")
            return cls.ga(float(rest) if rest else 1.0, central=central)
        if name.startswith("h") and name[1:].isdigit():
            return cls.hk(int(name[1:]), central=central)
        raise ValueError(f"Unknown metric family: {text}")

    @property
    def name(self) -> str:
        if self.family == Family.HK:
            return f"h{self.k}"
        return f"ga:{self.A:g}"

    @property
    def coefficients(self) -> Tuple[float, ...]:
        return self._coefficients

    @property
    def order(self) -> int:
        return len(self._coefficients) - 1

    def symbol(self, xi: np.ndarray) -> np.ndarray:
        xi2 = np.asarray(xi, dtype=float) ** 2
        return sum(c * xi2 ** i for i, c in enumerate(self._coefficients))

    def multiplier(self) -> MultiplierSpec:
        return MultiplierSpec(self.symbol, name=f"A[{self.name}]")

    def symbol_on(self, grid: Grid) -> np.ndarray:
        if grid not in self._cache:
            values = self.symbol(grid.wavenumbers)
            if np.any(values <= 0):
                raise ValueError(f"Inertia operator {self.name} is not positive on {grid}")
            values.setflags(write=False)
            self._cache[grid] = values
        return self._cache[grid]

    def apply(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        return np.fft.irfft(np.fft.rfft(values) * self.symbol_on(grid), n=grid.n)

    def solve(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        return np.fft.irfft(np.fft.rfft(values) / self.symbol_on(grid), n=grid.n)

    def leibniz_commutator(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        # A(u u_x) - u A(u_x), expanded term by term
        top = 2 * self.order + 1
        u_hat = np.fft.rfft(values)
        derivs: List[np.ndarray] = [values]
        for order in range(1, top + 1):
            derivs.append(np.fft.irfft(u_hat * grid.diff_symbol(order), n=grid.n))

        total = np.zeros(grid.n)
        for i, c in enumerate(self._coefficients):
            if i == 0 or c == 0.0:
                continue
            inner = np.zeros(grid.n)
            for j in range(1, 2 * i + 1):
                inner += comb(2 * i, j) * derivs[j] * derivs[2 * i - j + 1]
            total += c * (-1) ** i * inner
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InertiaSpec):
            return NotImplemented
        return (self.family, self._coefficients, self.central) == (other.family, other._coefficients, other.central)

    def __hash__(self) -> int:
        return hash((self.family, self._coefficients, self.central))

    def __repr__(self) -> str:
        suffix = ", central" if self.central else ""
        return f"InertiaSpec({self.name}{suffix})"


H0 = InertiaSpec.hk(0)
H1 = InertiaSpec.hk(1)
H2 = InertiaSpec.hk(2)


class CentralVec:

    def __init__(self, x: Field, a: float = 0.0):
        if not np.isfinite(a):
            raise ValueError(f"Central component must be finite, got {a}")
        self.x = x
        self.a = float(a)

    @classmethod
    def zero(cls, grid: Grid) -> 'CentralVec':
        return cls(grid.zeros(), 0.0)

    @property
    def grid(self) -> Grid:
        return self.x.grid

    def without_center(self) -> 'CentralVec':
        return CentralVec(self.x, 0.0)

    def __add__(self, other: 'CentralVec') -> 'CentralVec':
        return CentralVec(self.x + other.x, self.a + other.a)

    def __sub__(self, other: 'CentralVec') -> 'CentralVec':
        return CentralVec(self.x - other.x, self.a - other.a)

    def __mul__(self, scalar: float) -> 'CentralVec':
        return CentralVec(self.x * float(scalar), self.a * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> 'CentralVec':
        return CentralVec(-self.x, -self.a)

    def __repr__(self) -> str:
        return f"CentralVec(sup|x|={self.x.sup():.3e}, a={self.a:.6g})"


def _same_grid(v: CentralVec, w: CentralVec) -> Grid:
    if v.grid != w.grid:
        raise GridMismatchError(f"Vectors live on different grids: {v.grid} and {w.grid}")
    return v.grid


def inner(spec: InertiaSpec, v: CentralVec, w: CentralVec) -> float:
    grid = _same_grid(v, w)
    weighted = Field(grid, spec.apply(w.x.values, grid))
    return quad(v.x * weighted) + v.a * w.a


def norm_squared(spec: InertiaSpec, v: CentralVec) -> float:
    return inner(spec, v, v)


def gelfand_fuchs(x: Field, y: Field) -> float:
    return quad(deriv(x, 1) * deriv(y, 2))


def bracket(v: CentralVec, w: CentralVec) -> CentralVec:
    _same_grid(v, w)
    field = deriv(v.x, 1) * w.x - v.x * deriv(w.x, 1)
    return CentralVec(field, gelfand_fuchs(v.x, w.x))


def ad(spec: InertiaSpec, v: CentralVec, w: CentralVec) -> CentralVec:
    result = bracket(v, w)
    return result if spec.central else result.without_center()


def ad_transpose(spec: InertiaSpec, v: CentralVec, w: CentralVec) -> CentralVec:
    grid = _same_grid(v, w)
    X = v.x.values
    x_hat = np.fft.rfft(X)
    dX = np.fft.irfft(x_hat * grid.diff_symbol(1), n=grid.n)
    d3X = np.fft.irfft(x_hat * grid.diff_symbol(3), n=grid.n)

    az_hat = np.fft.rfft(w.x.values) * spec.symbol_on(grid)
    AZ = np.fft.irfft(az_hat, n=grid.n)
    dAZ = np.fft.irfft(az_hat * grid.diff_symbol(1), n=grid.n)

    center = w.a if spec.central else 0.0
    product = np.fft.rfft(2.0 * dX * AZ + X * dAZ + center * d3X) * grid.dealias_mask()
    field = np.fft.irfft(product / spec.symbol_on(grid), n=grid.n)
    return CentralVec(Field(grid, field), 0.0)


def alpha_op(spec: InertiaSpec, v: CentralVec, w: CentralVec) -> CentralVec:
    return ad_transpose(spec, w, v)
