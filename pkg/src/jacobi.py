import logging
from typing import List, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .grid import Field, Grid, GridMismatchError, deriv, quad
from .metrics import CentralVec, InertiaSpec, ad, ad_transpose, alpha_op, gelfand_fuchs, inner
from .curvature import covariant_dt, curvature_operator
from .flow import Trajectory, rhs

logger = logging.getLogger(__name__)


class JacobiState:

    def __init__(self, t: float, y: Field, yt: Field, b: float = 0.0, bt: float = 0.0, B1: float = 0.0):
        if y.grid != yt.grid:
            raise GridMismatchError(f"Jacobi field on {y.grid} but its velocity on {yt.grid}")
        self.t = float(t)
        self.y = y
        self.yt = yt
        self.b = float(b)
        self.bt = float(bt)
        self.B1 = float(B1)

    @property
    def position(self) -> CentralVec:
        return CentralVec(self.y, self.b)

    @property
    def velocity(self) -> CentralVec:
        return CentralVec(self.yt, self.bt)

    def __repr__(self) -> str:
        return f"JacobiState(t={self.t:.6g}, sup|y|={self.y.sup():.3e}, b={self.b:.6g}, B1={self.B1:.6g})"


def jacobi_rhs_burgers(u: Field, y: Field, yt: Field) -> Field:
    return -3.0 * u * u * deriv(y, 2) - 4.0 * u * deriv(yt, 1) - 2.0 * deriv(u, 1) * yt


def jacobi_rhs_kdv(u: Field, a: float, y: Field, yt: Field, B1: float) -> Field:
    y1, y2, y3, y4 = (deriv(y, order) for order in (1, 2, 3, 4))
    return (
        -u * (4.0 * deriv(yt, 1) + 3.0 * u * y2 + a * y4)
        - deriv(u, 1) * (2.0 * yt + 2.0 * a * y3)
        - deriv(u, 3) * (B1 - 3.0 * a * y1)
        - a * deriv(yt, 3)
    )


def jacobi_rhs_generic(spec: InertiaSpec, u: CentralVec, y: CentralVec, yt: CentralVec) -> CentralVec:
    def lifted(z: CentralVec) -> CentralVec:
        return ad_transpose(spec, y, z) + ad(spec, y, z)

    twisted = lifted(ad_transpose(spec, u, u)) - ad_transpose(spec, u, lifted(u))
    return (
        twisted
        - ad_transpose(spec, u, yt)
        - alpha_op(spec, u, yt)
        + ad(spec, u, yt)
    )


def symplectic_pairing(u: Field, a: float, j1: JacobiState, j2: JacobiState) -> float:
    y, yt, z, zt = j1.y, j1.yt, j2.y, j2.yt
    field = y * zt - yt * z + 2.0 * u * (y * deriv(z, 1) - deriv(y, 1) * z)
    return quad(field) + j1.b * j2.B1 - j2.b * j1.B1 - a * gelfand_fuchs(y, z)


def symplectic_pairing_generic(spec: InertiaSpec, u: CentralVec, j1: JacobiState, j2: JacobiState) -> float:
    y, yt = j1.position, j1.velocity
    z, zt = j2.position, j2.velocity
    return (
        inner(spec, y, zt)
        - inner(spec, yt, z)
        + inner(spec, ad(spec, u, y), z)
        - inner(spec, y, ad(spec, u, z))
        - inner(spec, ad(spec, y, z), u)
    )


class JacobiIntegrator:
    """Jacobi fields as y_t = [u, y] + w with w solving the linearised geodesic equation.

    w_t = -ad(w)^T u - ad(u)^T w; its dispersive part -a A^{-1} w_xxx is
    propagated exactly like the geodesic's. The central part of w is the
    conserved B1.
    """

    def __init__(self, traj: Trajectory):
        if len(traj) < 2:
            raise ValueError("Trajectory too coarse in time: need at least two stored states")
        self.traj = traj
        self.spec = traj.spec
        self.grid: Grid = traj.grid
        self.a = traj.a
        self.dt = traj.dt
        self.track_center = self.spec.central or self.a != 0.0

        times = traj.times
        velocities = traj.u_matrix()
        rates = np.array([rhs(self.spec, s.u, self.a).values for s in traj.states])
        self._dense = CubicHermiteSpline(times, velocities, rates, axis=0)

        umax = float(np.max(np.abs(velocities)))
        kmax = float(self.grid.wavenumbers[self.grid.dealias_mask()][-1])
        if self.dt * umax * kmax > 2.5:
            raise ValueError(f"Trajectory too coarse in time for Jacobi integration: "
                             f"dt={self.dt:g}, max|u|={umax:.3g}, k_max={kmax:.0f}")

        self._mask = self.grid.dealias_mask()
        self._symbol = self.spec.symbol_on(self.grid)
        linear = -self.a * self.grid.diff_symbol(3) / self._symbol
        self._half = np.exp(linear * (0.5 * self.dt))
        self._full = np.exp(linear * self.dt)

    def _d(self, hat: np.ndarray, order: int) -> np.ndarray:
        return np.fft.irfft(hat * self.grid.diff_symbol(order), n=self.grid.n)

    def _bracket_u(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        u_hat, y_hat = np.fft.rfft(u), np.fft.rfft(y)
        return self._d(u_hat, 1) * y - u * self._d(y_hat, 1)

    def _derivatives(self, t: float, y: np.ndarray, w_hat: np.ndarray, beta: float) -> Tuple[np.ndarray, np.ndarray, float]:
        n = self.grid.n
        u = self._dense(t)
        u_hat = np.fft.rfft(u)
        w = np.fft.irfft(w_hat, n=n)

        Au_hat = u_hat * self._symbol
        Aw_hat = w_hat * self._symbol
        Au, Aw = np.fft.irfft(Au_hat, n=n), np.fft.irfft(Aw_hat, n=n)

        mixed = (2.0 * self._d(w_hat, 1) * Au + w * self._d(Au_hat, 1)
                 + 2.0 * self._d(u_hat, 1) * Aw + u * self._d(Aw_hat, 1)
                 + beta * self._d(u_hat, 3))
        w_rate = -np.fft.rfft(mixed) * self._mask / self._symbol

        y_rate = np.fft.irfft(np.fft.rfft(self._bracket_u(u, y)) * self._mask, n=n) + w
        b_rate = 0.0
        if self.track_center:
            y_hat = np.fft.rfft(y)
            b_rate = beta + self.grid.dx * float(np.sum(self._d(u_hat, 1) * self._d(y_hat, 2)))
        return y_rate, w_rate, b_rate

    def _state(self, t: float, y: np.ndarray, w_hat: np.ndarray, b: float, beta: float) -> JacobiState:
        grid = self.grid
        u = self._dense(t)
        yt = self._bracket_u(u, y) + np.fft.irfft(w_hat, n=grid.n)
        bt = 0.0
        if self.track_center:
            bt = beta + gelfand_fuchs(Field(grid, u), Field(grid, y))
        return JacobiState(t, Field(grid, y), Field(grid, yt), b, bt, beta)

    def run(self, y0: Field, yt0: Field, b0: float = 0.0, bt0: float = 0.0) -> List[JacobiState]:
        if y0.grid != self.grid or yt0.grid != self.grid:
            raise ValueError(f"Resolution mismatch: Jacobi data on {y0.grid}, geodesic on {self.grid}")

        u0 = self.traj.states[0].u.values
        y = y0.values.copy()
        w_hat = np.fft.rfft(yt0.values - self._bracket_u(u0, y))
        b = b0 if self.track_center else 0.0
        beta = 0.0
        if self.track_center:
            # B1 = b_t + omega(y, u)
            beta = bt0 + gelfand_fuchs(y0, self.traj.states[0].u)

        dt = self.dt
        E, Eh = self._full, self._half
        states = [self._state(self.traj.states[0].t, y, w_hat, b, beta)]
        for previous in self.traj.states[:-1]:
            t = previous.t
            k1y, k1w, k1b = self._derivatives(t, y, w_hat, beta)
            k2y, k2w, k2b = self._derivatives(t + 0.5 * dt, y + 0.5 * dt * k1y, Eh * (w_hat + 0.5 * dt * k1w), beta)
            k3y, k3w, k3b = self._derivatives(t + 0.5 * dt, y + 0.5 * dt * k2y, Eh * w_hat + 0.5 * dt * k2w, beta)
            k4y, k4w, k4b = self._derivatives(t + dt, y + dt * k3y, E * w_hat + dt * Eh * k3w, beta)

            y = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            w_hat = E * w_hat + dt / 6.0 * (E * k1w + 2.0 * Eh * (k2w + k3w) + k4w)
            b = b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            if not np.all(np.isfinite(y)):
                raise RuntimeError(f"Jacobi field blew up at t={t + dt:.6g}")
            states.append(self._state(t + dt, y, w_hat, b, beta))

        logger.debug(f"Integrated Jacobi field over {len(states) - 1} steps")
        return states


def solve_jacobi(traj: Trajectory, y0: Field, yt0: Field, b0: float = 0.0, bt0: float = 0.0) -> List[JacobiState]:
    return JacobiIntegrator(traj).run(y0, yt0, b0, bt0)


def pairing_series(traj: Trajectory, first: List[JacobiState], second: List[JacobiState]) -> np.ndarray:
    return np.array([
        symplectic_pairing(state.u, state.a, j1, j2)
        for state, j1, j2 in zip(traj.states, first, second)
    ])


def b1_residuals(traj: Trajectory, states: List[JacobiState]) -> np.ndarray:
    if not (traj.spec.central or traj.a != 0.0):
        return np.zeros(len(states))
    return np.array([
        abs(j.bt + quad(deriv(j.y, 3) * s.u) - j.B1)
        for s, j in zip(traj.states, states)
    ])


def jacobi_residual(traj: Trajectory, states: List[JacobiState]) -> float:
    spec = traj.spec
    grid = traj.grid
    u_vecs = [s.velocity for s in traj.states]
    firsts = [covariant_dt(spec, u, j.position, j.velocity) for u, j in zip(u_vecs, states)]
    fields = np.array([v.x.values for v in firsts])
    centers = np.array([v.a for v in firsts])
    field_rates = np.gradient(fields, traj.dt, axis=0, edge_order=2)
    center_rates = np.gradient(centers, traj.dt, edge_order=2)

    worst = 0.0
    for i in range(1, len(states) - 1):
        u = u_vecs[i]
        rate = CentralVec(Field(grid, field_rates[i]), float(center_rates[i]))
        second = covariant_dt(spec, u, firsts[i], rate)
        total = second + curvature_operator(spec, states[i].position, u, u)
        worst = max(worst, total.x.sup(), abs(total.a))
    return worst
