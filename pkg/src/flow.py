import logging
from typing import List, Optional, Tuple

import numpy as np

from .diffeo import Diffeo, DiffeoError, schwarzian
from .grid import Field, Grid, deriv, interp, quad
from .metrics import CentralVec, InertiaSpec, inner

logger = logging.getLogger(__name__)


class ShockError(RuntimeError):

    def __init__(self, message: str, t: float, reason: str):
        super().__init__(message)
        self.t = t
        self.reason = reason


class GeodesicState:

    def __init__(self, t: float, u: Field, a: float, lag: Diffeo, alpha: float = 0.0):
        if lag.grid != u.grid:
            raise ValueError(f"Velocity on {u.grid} but Lagrangian map on {lag.grid}")
        self.t = float(t)
        self.u = u
        self.a = float(a)
        self.lag = lag
        self.alpha = float(alpha)

    @classmethod
    def initial(cls, u0: Field, a: float = 0.0) -> 'GeodesicState':
        return cls(0.0, u0, a, Diffeo.identity(u0.grid), 0.0)

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def velocity(self) -> CentralVec:
        return CentralVec(self.u, self.a)

    def __repr__(self) -> str:
        return f"GeodesicState(t={self.t:.6g}, sup|u|={self.u.sup():.3e}, a={self.a:.6g})"


def _nonlinear_hat(spec: InertiaSpec, grid: Grid, u_hat: np.ndarray, mask: np.ndarray) -> np.ndarray:
    u = np.fft.irfft(u_hat, n=grid.n)
    ux = np.fft.irfft(u_hat * grid.diff_symbol(1), n=grid.n)
    advective = np.fft.rfft(-u * ux) * mask
    if spec.order == 0:
        # A = 1: the commutator vanishes and the smoothing term is 2 u u_x
        smoothing = np.fft.rfft(2.0 * ux * u) * mask
    else:
        Au = np.fft.irfft(u_hat * spec.symbol_on(grid), n=grid.n)
        smoothing = np.fft.rfft(2.0 * ux * Au - spec.leibniz_commutator(u, grid)) * mask
    return advective - smoothing / spec.symbol_on(grid)


def _linear_symbol(spec: InertiaSpec, grid: Grid, a: float) -> np.ndarray:
    return -a * grid.diff_symbol(3) / spec.symbol_on(grid)


def rhs(spec: InertiaSpec, u: Field, a: float = 0.0) -> Field:
    grid = u.grid
    u_hat = u.coefficients()
    total = _nonlinear_hat(spec, grid, u_hat, grid.dealias_mask()) + _linear_symbol(spec, grid, a) * u_hat
    return Field(grid, np.fft.irfft(total, n=grid.n))


def kinetic_energy(spec: InertiaSpec, u: Field, a: float = 0.0) -> float:
    v = CentralVec(u, a)
    return inner(spec, v, v)


class GeodesicIntegrator:
    """Fourth-order Runge-Kutta for the coupled system (u, g, alpha).

    The dispersive term -a A^{-1} u_xxx is propagated exactly in Fourier
    space (integrating factor); with a = 0 the scheme is classical RK4.
    """

    def __init__(
        self,
        spec: InertiaSpec,
        grid: Grid,
        a: float,
        dt: float,
        shock_margin: float = 1e-3,
        tail_tolerance: float = 1e-8
    ):
        if not dt > 0:
            raise ValueError(f"Time step must be positive, got {dt}")
        self.spec = spec
        self.grid = grid
        self.a = float(a)
        self.dt = float(dt)
        self.shock_margin = shock_margin
        self.tail_tolerance = tail_tolerance

        self._mask = grid.dealias_mask()
        linear = _linear_symbol(spec, grid, self.a)
        self._half = np.exp(linear * (0.5 * self.dt))
        self._full = np.exp(linear * self.dt)

        retained = grid.modes[self._mask]
        cutoff = retained[-1]
        self._tail = (grid.modes > 2 * cutoff // 3) & self._mask

    @property
    def tag(self) -> str:
        return "if-rk4" if self.a != 0.0 else "rk4"

    def _derivatives(self, u_hat: np.ndarray, disp: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
        grid = self.grid
        u = Field(grid, np.fft.irfft(u_hat, n=grid.n))
        velocity = interp(u, grid.nodes + disp)

        disp_hat = np.fft.rfft(disp)
        g_x = 1.0 + np.fft.irfft(disp_hat * grid.diff_symbol(1), n=grid.n)
        g_xx = np.fft.irfft(disp_hat * grid.diff_symbol(2), n=grid.n)
        g_tx = np.fft.irfft(np.fft.rfft(velocity) * grid.diff_symbol(1), n=grid.n)
        alpha_rate = self.a + grid.dx * float(np.sum(g_tx * g_xx / (2.0 * g_x ** 2)))

        return _nonlinear_hat(self.spec, grid, u_hat, self._mask), velocity, alpha_rate

    def _check(self, t: float, u_hat: np.ndarray, disp: np.ndarray) -> None:
        if not (np.all(np.isfinite(u_hat)) and np.all(np.isfinite(disp))):
            raise ShockError(f"Non-finite values at t={t:.6g}", t, "blowup")
        power = np.abs(u_hat) ** 2
        total = float(np.sum(power))
        if total > 0.0:
            tail = float(np.sum(power[self._tail])) / total
            if tail > self.tail_tolerance:
                raise ShockError(f"Gradient no longer resolved at t={t:.6g} (tail energy {tail:.3e})",
                                 t, "unresolved gradient")

    def step(self, state: GeodesicState) -> GeodesicState:
        dt = self.dt
        E, Eh = self._full, self._half
        u0 = state.u.coefficients()
        g0 = state.lag.disp.values

        k1u, k1g, k1a = self._derivatives(u0, g0)
        u2 = Eh * (u0 + 0.5 * dt * k1u)
        k2u, k2g, k2a = self._derivatives(u2, g0 + 0.5 * dt * k1g)
        u3 = Eh * u0 + 0.5 * dt * k2u
        k3u, k3g, k3a = self._derivatives(u3, g0 + 0.5 * dt * k2g)
        u4 = E * u0 + dt * Eh * k3u
        k4u, k4g, k4a = self._derivatives(u4, g0 + dt * k3g)

        u1 = E * u0 + dt / 6.0 * (E * k1u + 2.0 * Eh * (k2u + k3u) + k4u)
        g1 = g0 + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        alpha1 = state.alpha + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)

        t1 = state.t + dt
        self._check(t1, u1, g1)
        try:
            lag = Diffeo(Field(self.grid, g1))
        except DiffeoError as e:
            raise ShockError(f"Lagrangian map folded at t={t1:.6g}: {e}", t1, "lost monotonicity")
        if lag.min_jacobian <= self.shock_margin:
            raise ShockError(f"Lagrangian map nearly folded at t={t1:.6g} "
                             f"(min g_x {lag.min_jacobian:.3e})", t1, "lost monotonicity")

        return GeodesicState(t1, Field(self.grid, np.fft.irfft(u1, n=self.grid.n)), self.a, lag, alpha1)


def step(spec: InertiaSpec, state: GeodesicState, dt: float) -> GeodesicState:
    return GeodesicIntegrator(spec, state.grid, state.a, dt).step(state)


class Trajectory:

    def __init__(self, spec: InertiaSpec, states: List[GeodesicState], dt: float, integrator: str):
        self.spec = spec
        self.states = states
        self.dt = float(dt)
        self.integrator = integrator
        self.exit_reason = "completed"
        self.shock: Optional[ShockError] = None

    @property
    def truncated(self) -> bool:
        return self.shock is not None

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def a(self) -> float:
        return self.states[0].a

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def final(self) -> GeodesicState:
        return self.states[-1]

    def u_matrix(self) -> np.ndarray:
        return np.array([s.u.values for s in self.states])

    def momentum_drift(self) -> float:
        reference = momentum(self.spec, self.states[0])
        scale = max(reference.x.sup(), abs(reference.a))
        worst = 0.0
        for state in self.states[1:]:
            current = momentum(self.spec, state)
            worst = max(worst, (current.x - reference.x).sup(), abs(current.a - reference.a))
        return worst / scale if scale > 0 else worst

    def energy_drift(self) -> float:
        energies = np.array([kinetic_energy(self.spec, s.u, s.a) for s in self.states])
        worst = float(np.max(np.abs(energies - energies[0])))
        return worst / energies[0] if energies[0] > 0 else worst

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self) -> str:
        return (f"Trajectory({self.spec.name}, a={self.a:g}, steps={len(self.states) - 1}, "
                f"dt={self.dt:g}, {self.exit_reason})")


def solve(
    spec: InertiaSpec,
    u0: Field,
    a: float = 0.0,
    T: float = 1.0,
    dt: float = 1e-3,
    store_every: int = 1,
    shock_margin: float = 1e-3,
    tail_tolerance: float = 1e-8
) -> Trajectory:
    if T < 0:
        raise ValueError(f"Horizon must be non-negative, got {T}")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"Horizon {T} is not a whole number of steps of size {dt}")
    if store_every < 1:
        raise ValueError(f"store_every must be positive, got {store_every}")

    integrator = GeodesicIntegrator(spec, u0.grid, a, dt, shock_margin, tail_tolerance)
    state = GeodesicState.initial(u0, a)
    trajectory = Trajectory(spec, [state], dt * store_every, integrator.tag)

    logger.info(f"Solving {spec.name} geodesic: a={a:g}, n={u0.grid.n}, dt={dt:g}, T={T:g}")
    for i in range(1, n_steps + 1):
        try:
            state = integrator.step(state)
        except ShockError as e:
            logger.warning(f"Horizon truncated: {e}")
            trajectory.shock = e
            trajectory.exit_reason = f"shock at t≈{e.t:.4g} ({e.reason})"
            break
        if i % store_every == 0:
            trajectory.states.append(state)

    return trajectory


def momentum(spec: InertiaSpec, state: GeodesicState) -> CentralVec:
    grid = state.grid
    lag = state.lag
    weighted = Field(grid, spec.apply(state.u.values, grid))
    field = Field(grid, lag.jacobian ** 2 * interp(weighted, lag.values))
    if state.a != 0.0:
        field = field + state.a * schwarzian(lag)
    return CentralVec(field, state.a)


def shock_time(u0: Field) -> float:
    slope = float(np.min(deriv(u0, 1).values))
    if slope >= -1e-12 * max(1.0, u0.sup()):
        return float("inf")
    return 1.0 / (3.0 * abs(slope))


def characteristics(u0: Field, t: float, targets, max_iter: int = 50, tol: float = 1e-13) -> np.ndarray:
    """Burgers solution at time t from the characteristic lines x = z + 3 t u0(z)."""
    if t < 0:
        raise ValueError(f"Time must be non-negative, got {t}")
    if t >= shock_time(u0):
        raise ValueError(f"Characteristics cross at t={shock_time(u0):.6g}, requested t={t:.6g}")

    grid = u0.grid
    x = np.atleast_1d(np.asarray(targets, dtype=float))
    if t == 0:
        return interp(u0, x)

    z_nodes = grid.nodes
    feet = z_nodes + 3.0 * t * u0.values
    # label minus foot is periodic in the foot position, so interpolate it with period
    z = x + np.interp(x, feet, z_nodes - feet, period=grid.length)

    slope = deriv(u0, 1)
    for _ in range(max_iter):
        residual = z + 3.0 * t * interp(u0, z) - x
        if np.max(np.abs(residual)) < tol:
            break
        z = z - residual / (1.0 + 3.0 * t * interp(slope, z))
    return interp(u0, z)
