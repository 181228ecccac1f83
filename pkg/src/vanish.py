import logging
from collections import OrderedDict
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicHermiteSpline, RegularGridInterpolator
from scipy.ndimage import convolve1d

from .diffeo import Diffeo
from .grid import Field, Grid, quad
from .metrics import Family, InertiaSpec

logger = logging.getLogger(__name__)

MAX_EPS = 0.3
MIN_SAMPLES_PER_EPS = 16
SURFACE_SAMPLES_PER_EPS = 32
SPACE_SAMPLES_PER_EPS = 16
TIME_SAMPLES_PER_EPS = 16
MIN_TIME_SAMPLES_PER_UNIT = 64


class ResolutionError(ValueError):
    pass


def _check_eps(eps: float) -> float:
    if not 0.0 < eps <= MAX_EPS:
        raise ValueError(f"Mollification width must lie in (0, {MAX_EPS}], got {eps}")
    return float(eps)


def _even(count: float) -> int:
    n = int(np.ceil(count))
    return n + (n % 2)


def bump_kernel(eps: float, spacing: float) -> np.ndarray:
    """Discrete weights of exp(-1/(1-(s/eps)^2)) on [-eps, eps], summing to one."""
    half = int(np.floor(eps / spacing))
    s = spacing * np.arange(-half, half + 1) / eps
    weights = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    weights[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return weights / np.sum(weights)


class RampProfile:
    """The clamp ramp max(0, min(1, z)) mollified at width eps."""

    def __init__(self, eps: float, z: np.ndarray, values: np.ndarray, slope: np.ndarray, kernel: np.ndarray):
        self.eps = eps
        self.z = z
        self.values = values
        self.slope = slope
        self._spacing = z[1] - z[0]
        self._kernel = kernel
        # f'' = G(z) - G(z - 1) with the same discrete kernel
        curvature = np.zeros_like(z)
        half = len(kernel) // 2
        start = int(round(-z[0] / self._spacing))
        stop = int(round((1.0 - z[0]) / self._spacing))
        curvature[start - half:start + half + 1] += kernel / self._spacing
        curvature[stop - half:stop + half + 1] -= kernel / self._spacing
        self._value_spline = CubicHermiteSpline(z, values, slope)
        self._slope_spline = CubicHermiteSpline(z, slope, curvature)

    @property
    def support(self) -> Tuple[float, float]:
        return -self.eps, 1.0 + self.eps

    @property
    def max_slope(self) -> float:
        return float(np.max(self.slope))

    def _clip(self, points) -> np.ndarray:
        return np.clip(np.asarray(points, dtype=float), self.z[0], self.z[-1])

    def __call__(self, points) -> np.ndarray:
        return self._value_spline(self._clip(points))

    def derivative(self, points) -> np.ndarray:
        return self._slope_spline(self._clip(points))

    def __repr__(self) -> str:
        return f"RampProfile(eps={self.eps:g}, samples={len(self.z)})"


def mollified_ramp(eps: float, resolution: Optional[int] = None) -> RampProfile:
    eps = _check_eps(eps)
    if resolution is None:
        resolution = int(np.ceil(4 * MIN_SAMPLES_PER_EPS / eps))
    if resolution * eps < MIN_SAMPLES_PER_EPS:
        raise ResolutionError(f"Profile resolution {resolution} gives {resolution * eps:.1f} samples across "
                              f"eps={eps:g}, need at least {MIN_SAMPLES_PER_EPS}")

    spacing = 1.0 / resolution
    pad = int(np.ceil(2.0 * eps * resolution)) + 1
    z = spacing * np.arange(-pad, resolution + pad + 1)
    kernel = bump_kernel(eps, spacing)

    ramp = np.clip(z, 0.0, 1.0)
    indicator = ((z >= 0.0) & (z <= 1.0)).astype(float)
    # half weight at the corners keeps the discrete slope integral exactly one
    indicator[[pad, pad + resolution]] = 0.5

    values = convolve1d(ramp, kernel, mode="nearest")
    slope = convolve1d(indicator, kernel, mode="constant")
    logger.debug(f"Built ramp profile: eps={eps:g}, {len(z)} samples, kernel width {len(kernel)}")
    return RampProfile(eps, z, values, slope, kernel)


class WaveSpec:

    def __init__(
        self,
        eps: float,
        lam: Optional[float] = None,
        box: Optional[float] = None,
        resolution: Optional[int] = None,
        duration: float = 1.0
    ):
        self.eps = _check_eps(eps)
        self.lam = 1.0 - self.eps if lam is None else float(lam)
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"Wave slope must lie in (0, 1], got {self.lam}")
        if duration <= 0:
            raise ValueError(f"Wave duration must be positive, got {duration}")
        self.duration = float(duration)

        # the wave occupies (t - 1 - eps)/lam <= x <= (t + eps)/lam while t runs over [0, duration]
        extent = (1.0 + 2.0 * self.eps + self.duration) / self.lam
        self.box = 8.0 * extent if box is None else float(box)
        if self.box < extent:
            raise ValueError(f"Box of length {self.box:g} cannot hold a wave sweeping {extent:g}")
        self.resolution = _even(SPACE_SAMPLES_PER_EPS * self.box / self.eps) if resolution is None else int(resolution)
        self._profile: Optional[RampProfile] = None

    @property
    def profile(self) -> RampProfile:
        if self._profile is None:
            self._profile = mollified_ramp(self.eps)
        return self._profile

    @property
    def grid(self) -> Grid:
        centre = 0.5 * (self.duration - 1.0) / self.lam
        return Grid(self.resolution, self.box, centre - 0.5 * self.box)

    def energy_bound(self, t0: float = 0.0, t1: Optional[float] = None) -> float:
        t1 = self.duration if t1 is None else t1
        return (t1 - t0) * 3.0 * self.eps / (1.0 - self.eps)

    def __repr__(self) -> str:
        return f"WaveSpec(eps={self.eps:g}, lam={self.lam:g}, box={self.box:g}, n={self.resolution})"


class PathSample:
    """A path of maps t -> phi(t, .) sampled at uniformly spaced times.

    Maps are produced on demand by ``map_at`` and a few are kept, which is
    all the centred differences in ``path_energy`` need.
    """

    CACHE_SIZE = 4

    def __init__(self, times: Sequence[float], map_at: Callable[[float], Diffeo]):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or len(times) < 3:
            raise ResolutionError(f"A path needs at least 3 time samples, got {len(times)}")
        steps = np.diff(times)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, float(np.max(np.abs(times)))):
            raise ValueError("Path times must be strictly increasing and uniformly spaced")
        times.setflags(write=False)
        self._times = times
        self._map_at = map_at
        self._cache: 'OrderedDict[int, Diffeo]' = OrderedDict()

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def step(self) -> float:
        return float(self._times[1] - self._times[0])

    @property
    def duration(self) -> float:
        return float(self._times[-1] - self._times[0])

    @property
    def maps(self) -> List[Diffeo]:
        return [self[i] for i in range(len(self))]

    @property
    def grid(self) -> Grid:
        return self[0].grid

    def __len__(self) -> int:
        return len(self._times)

    def __getitem__(self, index: int) -> Diffeo:
        index = range(len(self))[index]
        if index in self._cache:
            self._cache.move_to_end(index)
        else:
            self._cache[index] = self._map_at(float(self._times[index]))
            if len(self._cache) > self.CACHE_SIZE:
                self._cache.popitem(last=False)
        return self._cache[index]

    def __repr__(self) -> str:
        return f"PathSample({len(self)} samples over [{self._times[0]:.4g}, {self._times[-1]:.4g}])"


def _time_rate(path: PathSample, index: int, pick: Callable[[Diffeo], np.ndarray]) -> np.ndarray:
    h = path.step
    last = len(path) - 1
    if index == 0:
        return (-3.0 * pick(path[0]) + 4.0 * pick(path[1]) - pick(path[2])) / (2.0 * h)
    if index == last:
        return (3.0 * pick(path[last]) - 4.0 * pick(path[last - 1]) + pick(path[last - 2])) / (2.0 * h)
    return (pick(path[index + 1]) - pick(path[index - 1])) / (2.0 * h)


def _energy_densities(path: PathSample, spec: Optional[InertiaSpec]) -> np.ndarray:
    weight = 0.0
    if spec is not None:
        if spec.family == Family.GA:
            weight = spec.A
        elif spec.order != 0:
            raise ValueError(f"Path energy is available for the H0 and G^A metrics, not {spec.name}")

    grid = path.grid
    densities = np.empty(len(path))
    for i in range(len(path)):
        phi = path[i]
        speed = _time_rate(path, i, lambda m: m.disp.values)
        integrand = speed ** 2 * phi.jacobian
        if weight > 0.0:
            stretch = _time_rate(path, i, lambda m: m.jacobian)
            integrand = integrand + weight * stretch ** 2 / phi.jacobian
        densities[i] = quad(Field(grid, integrand))
    return densities


def path_energy(path: PathSample, spec: Optional[InertiaSpec] = None) -> float:
    return float(trapezoid(_energy_densities(path, spec), path.times))


def path_length(path: PathSample, spec: Optional[InertiaSpec] = None) -> float:
    densities = np.maximum(_energy_densities(path, spec), 0.0)
    return float(trapezoid(np.sqrt(densities), path.times))


def path_measures(path: PathSample, spec: Optional[InertiaSpec] = None) -> Tuple[float, float]:
    densities = _energy_densities(path, spec)
    energy = float(trapezoid(densities, path.times))
    length = float(trapezoid(np.sqrt(np.maximum(densities, 0.0)), path.times))
    return energy, length


def _time_samples(duration: float, eps: float) -> int:
    per_unit = max(MIN_TIME_SAMPLES_PER_UNIT, TIME_SAMPLES_PER_EPS / eps)
    return max(3, int(np.ceil(duration * per_unit)) + 1)


def basic_wave(spec: WaveSpec, t: float, grid: Optional[Grid] = None) -> Diffeo:
    grid = spec.grid if grid is None else grid
    z = t - spec.lam * grid.nodes
    profile = spec.profile
    return Diffeo(Field(grid, profile(z)), jacobian=1.0 - spec.lam * profile.derivative(z))


def basic_wave_path(spec: WaveSpec, t0: float = 0.0, t1: Optional[float] = None,
                    samples: Optional[int] = None) -> PathSample:
    t1 = spec.duration if t1 is None else t1
    if samples is None:
        samples = _time_samples(t1 - t0, spec.eps)
    grid = spec.grid
    return PathSample(np.linspace(t0, t1, samples), lambda t: basic_wave(spec, t, grid))


def linear_path(target: Field, samples: int = 65, t0: float = 0.0, t1: float = 1.0) -> PathSample:
    def map_at(t: float) -> Diffeo:
        return Diffeo(target * ((t - t0) / (t1 - t0)))

    return PathSample(np.linspace(t0, t1, samples), map_at)


class BumpDisplacement:
    """Unimodal smooth displacement g(x) = height * exp(1 - 1/(1 - ((x - centre)/width)^2))."""

    def __init__(self, height: float, width: float = 1.0, centre: float = 0.0):
        if height < 0 or not np.isfinite(height):
            raise ValueError(f"Bump height must be non-negative, got {height}")
        if width <= 0:
            raise ValueError(f"Bump width must be positive, got {width}")
        self.height = float(height)
        self.width = float(width)
        self.centre = float(centre)

        nodes = np.linspace(self.centre - self.width, self.centre + self.width, 4001)
        steepest = float(np.min(self.derivative(nodes)))
        if steepest <= -1.0:
            raise ValueError(f"Bump falls too steeply for a wave to stop it (min g' = {steepest:.3f})")

    def _scaled(self, x) -> Tuple[np.ndarray, np.ndarray]:
        s = (np.asarray(x, dtype=float) - self.centre) / self.width
        return s, np.abs(s) < 1.0

    def __call__(self, x) -> np.ndarray:
        s, inside = self._scaled(x)
        out = np.zeros_like(s)
        out[inside] = self.height * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    def derivative(self, x) -> np.ndarray:
        s, inside = self._scaled(x)
        out = np.zeros_like(s)
        si = s[inside]
        out[inside] = (self.height * np.exp(1.0 - 1.0 / (1.0 - si ** 2))
                       * (-2.0 * si / (1.0 - si ** 2) ** 2) / self.width)
        return out

    @property
    def peak(self) -> float:
        return self.height

    @property
    def support(self) -> Tuple[float, float]:
        return self.centre - self.width, self.centre + self.width

    def field(self, grid: Grid) -> Field:
        return grid.sample(self)

    def __repr__(self) -> str:
        return f"BumpDisplacement(height={self.height:g}, width={self.width:g}, centre={self.centre:g})"


def support_grid(target: BumpDisplacement, eps: float, resolution: Optional[int] = None) -> Grid:
    left, right = target.support
    width = right - left
    n = _even(SPACE_SAMPLES_PER_EPS * 2.0 * width / eps) if resolution is None else resolution
    return Grid(n, 2.0 * width, left - 0.5 * width)


@lru_cache(maxsize=8)
def _mollified_clamp(eps: float, peak: float) -> Tuple[RegularGridInterpolator, float, float]:
    # odd extension in the height: c(z, a) = sign(a) clamp(z, 0, |a|) keeps f(z, 0) = 0 exactly
    h = eps / SURFACE_SAMPLES_PER_EPS
    z = h * np.arange(-int(np.ceil(2.0 * eps / h)), int(np.ceil((peak + 2.0 * eps) / h)) + 1)
    span = int(np.ceil((peak + 2.0 * eps) / h))
    a = h * np.arange(-span, span + 1)

    Z, A = np.meshgrid(z, a, indexing="ij")
    clamp = np.sign(A) * np.clip(Z, 0.0, np.abs(A))

    kernel = bump_kernel(eps, h)
    surface = convolve1d(convolve1d(clamp, kernel, axis=0, mode="nearest"), kernel, axis=1, mode="nearest")
    f_z, f_a = np.gradient(surface, h, h, edge_order=2)

    stacked = np.stack([surface, f_z, f_a], axis=-1)
    logger.debug(f"Mollified clamp surface: eps={eps:g}, peak={peak:g}, shape {surface.shape}")
    return RegularGridInterpolator((z, a), stacked), float(z[0]), float(z[-1])


class StartStopWave:
    """A compression wave that starts and stops a bump-shaped displacement.

    Where the target rises the starting wave x + f(t - lam x, g(x)) is used;
    where it falls the ending wave, delayed by (1 - lam)(b - g(x)), takes
    over. After the wave has passed each point sits at x + g(x).
    """

    def __init__(self, eps: float, target: BumpDisplacement, lam: Optional[float] = None,
                 resolution: Optional[int] = None):
        self.eps = _check_eps(eps)
        self.target = target
        self.lam = 1.0 - self.eps if lam is None else float(lam)
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"Wave slope must lie in (0, 1], got {self.lam}")

        left, right = target.support
        self.grid = support_grid(target, self.eps, resolution)
        b = target.peak
        self.t_start = self.lam * left - 2.0 * self.eps
        self.t_end = self.lam * right + (2.0 - self.lam) * b + 3.0 * self.eps

        x = self.grid.nodes
        self._g = target(x)
        self._slope = target.derivative(x)
        self._rising = self._slope >= 0.0
        self._delay = np.where(self._rising, 0.0, (1.0 - self.lam) * (b - self._g))
        self._surface, self._z_min, self._z_max = _mollified_clamp(self.eps, b)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def at(self, t: float) -> Diffeo:
        z = t - self.lam * self.grid.nodes - self._delay
        points = np.column_stack([np.clip(z, self._z_min, self._z_max), self._g])
        f, f_z, f_a = self._surface(points).T
        inside = (z > self._z_min) & (z < self._z_max)
        f_z = np.where(inside, f_z, 0.0)

        lam, g_x = self.lam, self._slope
        jacobian = np.where(
            self._rising,
            1.0 - lam * f_z + f_a * g_x,
            1.0 - lam * f_z + g_x * ((1.0 - lam) * f_z + f_a)
        )
        return Diffeo(Field(self.grid, f), jacobian=jacobian)

    def path(self, samples: Optional[int] = None) -> PathSample:
        if samples is None:
            samples = _time_samples(self.duration, self.eps)
        return PathSample(np.linspace(self.t_start, self.t_end, samples), self.at)

    def __repr__(self) -> str:
        return f"StartStopWave(eps={self.eps:g}, {self.target!r}, t in [{self.t_start:.4g}, {self.t_end:.4g}])"


def start_stop_wave(eps: float, target: BumpDisplacement, t: float) -> Diffeo:
    return StartStopWave(eps, target).at(t)


def vanish_row(target: BumpDisplacement, eps: float) -> Dict[str, float]:
    wave = StartStopWave(eps, target)
    path = wave.path()
    energy, length = path_measures(path)
    terminal = wave.at(wave.t_end)
    endpoint_error = float(np.max(np.abs(terminal.disp.values - target(wave.grid.nodes))))
    row = {
        "eps": float(eps),
        "energy": energy,
        "length": length,
        "length_bound": float(np.sqrt(max(energy, 0.0) * path.duration)),
        "duration": path.duration,
        "endpoint_error": endpoint_error,
    }
    logger.info(f"eps={eps:g}: energy {energy:.4e}, length bound {row['length_bound']:.4e}")
    return row


def linear_row(target: BumpDisplacement, eps: float, samples: int = 65) -> Dict[str, float]:
    path = linear_path(target.field(support_grid(target, eps)), samples)
    energy, length = path_measures(path)
    return {
        "eps": float(eps),
        "energy": energy,
        "length": length,
        "length_bound": float(np.sqrt(energy * path.duration)),
        "duration": path.duration,
        "endpoint_error": 0.0,
    }


def vanishing_demo(target: BumpDisplacement, eps_list: Sequence[float]) -> List[Dict[str, float]]:
    rows = [vanish_row(target, eps) for eps in sorted(eps_list, reverse=True)]
    bounds = [row["length_bound"] for row in rows]
    if target.peak > 0 and any(later >= earlier for earlier, later in zip(bounds, bounds[1:])):
        logger.warning(f"Length bounds did not decrease with eps: {bounds}")
    return rows
