import logging
from math import factorial
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .grid import Field, Grid, GridMismatchError, deriv, interp, quad
from .metrics import CentralVec

logger = logging.getLogger(__name__)


class DiffeoError(ValueError):
    pass


class InversionError(RuntimeError):

    def __init__(self, message: str, worst_node: int, residual: float):
        super().__init__(message)
        self.worst_node = worst_node
        self.residual = residual


class Diffeo:
    """Orientation-preserving map x -> x + disp(x).

    On the circle the displacement is periodic and every derivative is taken
    spectrally. Maps on a real-line box whose displacement is not periodic
    (travelling ramps) must hand in their own jacobian; such maps are only
    meant for energy evaluation and refuse composition.
    """

    def __init__(self, disp: Field, jacobian: Optional[np.ndarray] = None):
        self._disp = disp
        self._explicit = jacobian is not None
        if jacobian is None:
            jac = 1.0 + deriv(disp, 1).values
        else:
            jac = np.array(jacobian, dtype=float)
            if jac.shape != disp.values.shape:
                raise ValueError(f"Jacobian needs {disp.grid.n} samples, got shape {jac.shape}")
        if not np.all(np.isfinite(jac)):
            raise DiffeoError("Jacobian of map is not finite")
        worst = float(np.min(jac))
        if worst <= 0.0:
            raise DiffeoError(f"Map is not orientation preserving: min derivative {worst:.3e} "
                              f"at x={disp.grid.nodes[int(np.argmin(jac))]:.6f}")
        jac.setflags(write=False)
        self._jacobian = jac

    @classmethod
    def identity(cls, grid: Grid) -> 'Diffeo':
        return cls(grid.zeros())

    @classmethod
    def from_displacement(cls, grid: Grid, values) -> 'Diffeo':
        return cls(Field(grid, values))

    @property
    def grid(self) -> Grid:
        return self._disp.grid

    @property
    def disp(self) -> Field:
        return self._disp

    @property
    def jacobian(self) -> np.ndarray:
        return self._jacobian

    @property
    def explicit_jacobian(self) -> bool:
        return self._explicit

    @property
    def min_jacobian(self) -> float:
        return float(np.min(self._jacobian))

    @property
    def values(self) -> np.ndarray:
        return self.grid.nodes + self._disp.values

    def derivative_field(self) -> Field:
        return Field(self.grid, self._jacobian)

    def __call__(self, points) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        return x + interp(self._disp, x)

    def __repr__(self) -> str:
        return f"Diffeo({self.grid!r}, sup|disp|={self._disp.sup():.3e}, min phi'={self.min_jacobian:.3e})"


def _check_composable(*maps: Diffeo) -> None:
    grid = maps[0].grid
    for phi in maps:
        if phi.grid != grid:
            raise GridMismatchError(f"Maps live on different grids: {grid} and {phi.grid}")
        if phi.explicit_jacobian:
            raise ValueError("Maps with an explicit jacobian cannot be composed or inverted")


def compose(phi: Diffeo, psi: Diffeo) -> Diffeo:
    _check_composable(phi, psi)
    moved = psi.values
    return Diffeo(psi.disp + Field(phi.grid, interp(phi.disp, moved)))


def invert(phi: Diffeo, tol_margin: float = 1e-8, max_iter: int = 50, tol: float = 1e-12) -> Diffeo:
    _check_composable(phi)
    if phi.min_jacobian <= tol_margin:
        raise DiffeoError(f"Cannot invert: min derivative {phi.min_jacobian:.3e} below margin {tol_margin}")

    grid = phi.grid
    x = grid.nodes
    slope = deriv(phi.disp, 1)
    y = x - phi.disp.values

    residual = np.full(grid.n, np.inf)
    for iteration in range(max_iter):
        residual = y + interp(phi.disp, y) - x
        if np.max(np.abs(residual)) < tol:
            logger.debug(f"Newton inversion converged after {iteration} iterations")
            return Diffeo(Field(grid, y - x))
        y = y - residual / (1.0 + interp(slope, y))

    worst = int(np.argmax(np.abs(residual)))
    raise InversionError(
        f"Newton inversion did not converge in {max_iter} iterations "
        f"(worst node {worst} at x={x[worst]:.6f}, residual {abs(residual[worst]):.3e})",
        worst_node=worst,
        residual=float(abs(residual[worst]))
    )


def schwarzian(phi: Diffeo) -> Field:
    first = phi.jacobian
    second = deriv(phi.disp, 2).values
    third = deriv(phi.disp, 3).values
    ratio = second / first
    return Field(phi.grid, third / first - 1.5 * ratio ** 2)


def bott_cocycle(phi: Diffeo, psi: Diffeo) -> float:
    _check_composable(phi, psi)
    outer = interp(phi.derivative_field(), psi.values)
    log_slope = deriv(psi.disp, 2).values / psi.jacobian
    return 0.5 * quad(Field(psi.grid, np.log(outer) * log_slope))


class VirasoroElement:

    def __init__(self, phi: Diffeo, alpha: float = 0.0):
        if not np.isfinite(alpha):
            raise ValueError(f"Central coordinate must be finite, got {alpha}")
        self.phi = phi
        self.alpha = float(alpha)

    @classmethod
    def identity(cls, grid: Grid) -> 'VirasoroElement':
        return cls(Diffeo.identity(grid), 0.0)

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    def __repr__(self) -> str:
        return f"VirasoroElement({self.phi!r}, alpha={self.alpha:.6g})"


def vira_mul(a: VirasoroElement, b: VirasoroElement) -> VirasoroElement:
    return VirasoroElement(compose(a.phi, b.phi), a.alpha + b.alpha + bott_cocycle(a.phi, b.phi))


def vira_inv(a: VirasoroElement) -> VirasoroElement:
    return VirasoroElement(invert(a.phi), -a.alpha)


def vira_adjoint(g: VirasoroElement, v: CentralVec) -> CentralVec:
    phi = g.phi
    if v.x.grid != phi.grid:
        raise GridMismatchError(f"Vector on {v.x.grid} cannot be moved by a map on {phi.grid}")
    pushed = Field(phi.grid, phi.jacobian * v.x.values)
    back = invert(phi).values
    moved = Field(phi.grid, interp(pushed, back))
    return CentralVec(moved, v.a + quad(schwarzian(phi) * v.x))


def compositions(p: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (p,)
        return
    for head in range(1, p - parts + 2):
        for tail in compositions(p - head, parts - 1):
            yield (head,) + tail


def faa_di_bruno(f_derivs: Sequence[float], g_derivs: Sequence[float], p: int) -> float:
    # f_derivs[m] = f^(m)(g(x)), g_derivs[j] = g^(j)(x); index 0 holds the values
    if p < 1 or p > 10:
        raise ValueError(f"Order must lie in 1..10, got {p}")
    if len(f_derivs) < p + 1 or len(g_derivs) < p + 1:
        raise ValueError(f"Insufficient derivative data for order {p}: "
                         f"got {len(f_derivs)} f-derivatives and {len(g_derivs)} g-derivatives")

    total = 0.0
    for m in range(1, p + 1):
        inner = 0.0
        for alpha in compositions(p, m):
            weight = factorial(p) / (factorial(m) * np.prod([factorial(a) for a in alpha]))
            inner += weight * np.prod([g_derivs[a] for a in alpha])
        total += f_derivs[m] * inner
    return float(total)
