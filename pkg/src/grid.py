import logging
from typing import Callable, Union, Sequence

import numpy as np

logger = logging.getLogger(__name__)

Number = Union[int, float]


class GridMismatchError(ValueError):
    pass


class Grid:

    MIN_POINTS = 8

    def __init__(self, n: int = 256, length: float = 2.0 * np.pi, origin: float = 0.0):
        if int(n) != n or n < self.MIN_POINTS or n % 2 != 0:
            raise ValueError(f"Grid size must be an even integer >= {self.MIN_POINTS}, got {n}")
        if not np.isfinite(length) or length <= 0:
            raise ValueError(f"Grid length must be positive, got {length}")

        self._n = int(n)
        self._length = float(length)
        self._origin = float(origin)

        self._nodes = self._origin + np.arange(self._n) * (self._length / self._n)
        self._nodes.setflags(write=False)
        self._modes = np.arange(self._n // 2 + 1)
        self._wavenumbers = 2.0 * np.pi * np.fft.rfftfreq(self._n, d=self._length / self._n)
        self._wavenumbers.setflags(write=False)

    @property
    def n(self) -> int:
        return self._n

    @property
    def length(self) -> float:
        return self._length

    @property
    def origin(self) -> float:
        return self._origin

    @property
    def dx(self) -> float:
        return self._length / self._n

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    @property
    def wavenumbers(self) -> np.ndarray:
        return self._wavenumbers

    def diff_symbol(self, order: int) -> np.ndarray:
        symbol = (1j * self._wavenumbers) ** order
        if order % 2 == 1:
            symbol[-1] = 0.0
        return symbol

    def dealias_mask(self, fraction: float = 2.0 / 3.0) -> np.ndarray:
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"Dealias fraction must lie in (0, 1], got {fraction}")
        return self._modes <= fraction * (self._n // 2)

    def field(self, values) -> 'Field':
        return Field(self, values)

    def zeros(self) -> 'Field':
        return Field(self, np.zeros(self._n))

    def constant(self, value: float) -> 'Field':
        return Field(self, np.full(self._n, float(value)))

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> 'Field':
        return Field(self, np.broadcast_to(fn(self._nodes), (self._n,)).astype(float))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (self._n, self._length, self._origin) == (other._n, other._length, other._origin)

    def __hash__(self) -> int:
        return hash((self._n, self._length, self._origin))

    def __repr__(self) -> str:
        return f"Grid(n={self._n}, length={self._length:.6g}, origin={self._origin:.6g})"


class Field:

    __array_priority__ = 1000

    def __init__(self, grid: Grid, values):
        data = np.array(values, dtype=float)
        if data.shape != (grid.n,):
            raise ValueError(f"Field needs {grid.n} samples, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Field values must be finite")
        data.setflags(write=False)
        self._grid = grid
        self._values = data

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    def coefficients(self) -> np.ndarray:
        return np.fft.rfft(self._values)

    def sup(self) -> float:
        return float(np.max(np.abs(self._values)))

    def _other_values(self, other) -> Union[np.ndarray, float]:
        if isinstance(other, Field):
            if other._grid != self._grid:
                raise GridMismatchError(f"Cannot combine fields on {self._grid} and {other._grid}")
            return other._values
        if np.isscalar(other):
            return float(other)
        return NotImplemented

    def __add__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return NotImplemented
        return Field(self._grid, self._values + values)

    __radd__ = __add__

    def __sub__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return NotImplemented
        return Field(self._grid, self._values - values)

    def __rsub__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return NotImplemented
        return Field(self._grid, values - self._values)

    def __mul__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return NotImplemented
        return Field(self._grid, self._values * values)

    __rmul__ = __mul__

    def __truediv__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return NotImplemented
        return Field(self._grid, self._values / values)

    def __neg__(self) -> 'Field':
        return Field(self._grid, -self._values)

    def __pow__(self, power: Number) -> 'Field':
        return Field(self._grid, self._values ** power)

    def __repr__(self) -> str:
        return f"Field({self._grid!r}, sup={self.sup():.3e})"


class MultiplierSpec:
    """Fourier multiplier given by its symbol as a function of the physical wavenumber.

    The symbol must be even in the wavenumber so the operator maps real
    fields to real fields; only non-negative wavenumbers are ever evaluated.
    """

    def __init__(self, symbol: Callable[[np.ndarray], np.ndarray], name: str = "multiplier"):
        self._symbol = symbol
        self.name = name

    def evaluate(self, grid: Grid) -> np.ndarray:
        values = np.broadcast_to(np.asarray(self._symbol(grid.wavenumbers), dtype=float),
                                 grid.wavenumbers.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Symbol of {self.name} is not finite on {grid}")
        return values

    def inverse(self) -> 'MultiplierSpec':
        def inverse_symbol(xi: np.ndarray) -> np.ndarray:
            values = np.asarray(self._symbol(xi), dtype=float)
            if np.any(values == 0.0):
                raise ValueError(f"Cannot invert {self.name}: symbol vanishes on a represented wavenumber")
            return 1.0 / values

        return MultiplierSpec(inverse_symbol, name=f"{self.name}^-1")

    def __repr__(self) -> str:
        return f"MultiplierSpec({self.name})"


def deriv(f: Field, order: int = 1) -> Field:
    if int(order) != order or order < 1:
        raise ValueError(f"Derivative order must be a positive integer, got {order}")
    grid = f.grid
    return Field(grid, np.fft.irfft(f.coefficients() * grid.diff_symbol(int(order)), n=grid.n))


def quad(f: Field) -> float:
    return float(f.grid.dx * np.sum(f.values))


def interp(f: Field, points, chunk: int = 512) -> np.ndarray:
    grid = f.grid
    x = np.atleast_1d(np.asarray(points, dtype=float))
    shifted = np.mod(x - grid.origin, grid.length)

    coeffs = f.coefficients() / grid.n
    weights = np.full(coeffs.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    coeffs = coeffs * weights
    # cos-only Nyquist term keeps the interpolant real
    nyquist = coeffs[-1].real

    out = np.empty(shifted.shape)
    k = grid.wavenumbers[:-1]
    for start in range(0, shifted.size, chunk):
        block = shifted[start:start + chunk]
        phases = np.exp(1j * np.outer(block, k))
        out[start:start + chunk] = (phases @ coeffs[:-1]).real + nyquist * np.cos(grid.wavenumbers[-1] * block)
    return out


def apply_multiplier(f: Field, m: MultiplierSpec) -> Field:
    grid = f.grid
    return Field(grid, np.fft.irfft(f.coefficients() * m.evaluate(grid), n=grid.n))


def dealias(f: Field, fraction: float = 2.0 / 3.0) -> Field:
    grid = f.grid
    return Field(grid, np.fft.irfft(f.coefficients() * grid.dealias_mask(fraction), n=grid.n))


def trig_field(grid: Grid, cos_coeffs: Sequence[float] = (), sin_coeffs: Sequence[float] = (),
               mean: float = 0.0) -> Field:
    x = (grid.nodes - grid.origin) * (2.0 * np.pi / grid.length)
    values = np.full(grid.n, float(mean))
    for m, c in enumerate(cos_coeffs, start=1):
        values += c * np.cos(m * x)
    for m, s in enumerate(sin_coeffs, start=1):
        values += s * np.sin(m * x)
    return Field(grid, values)
