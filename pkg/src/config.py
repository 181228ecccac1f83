import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .grid import Field, Grid
from .metrics import Family, InertiaSpec
from .sampling import make_rng, random_trig

logger = logging.getLogger(__name__)

OUTPUT_ENV = "GEOFLOW_OUT"
DEFAULT_OUTPUT_ROOT = "runs"

COMMANDS = ("solve", "jacobi", "curvature", "vanish", "verify")
CURVATURE_CASES = ("burgers-sincos", "virasoro-sincos", "random", "emb")
SUITES = ("algebra", "cocycles", "curvature", "conservation", "jacobi", "vanish", "convergence")


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"Not a boolean: {value}")


def _parse_floats(value: Any) -> List[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    return [float(part) for part in text.split(",") if part.strip()]


def _parse_optional_str(value: Any) -> Optional[str]:
    if value is None:
        return None
    text = str(value).strip()
    return text or None


FIELD_TYPES: Dict[str, Callable[[Any], Any]] = {
    "family": str,
    "A": float,
    "a": float,
    "central": _parse_bool,
    "n": int,
    "dt": float,
    "T": float,
    "store_every": int,
    "ic": str,
    "seed": int,
    "out": _parse_optional_str,
    "sweep_a": _parse_floats,
    "eps": _parse_floats,
    "height": float,
    "width": float,
    "case": str,
    "a1": float,
    "a2": float,
    "samples": int,
    "suite": str,
}


class RunConfig:

    DEFAULTS: Dict[str, Any] = {
        "family": "h0",
        "A": 1.0,
        "a": 0.0,
        "central": False,
        "n": 256,
        "dt": 1e-3,
        "T": 1.0,
        "store_every": 1,
        "ic": "sine:0.2:1",
        "seed": 0,
        "out": None,
        "sweep_a": [],
        "eps": [0.2, 0.1, 0.05],
        "height": 0.4,
        "width": 1.0,
        "case": "burgers-sincos",
        "a1": 0.0,
        "a2": 0.0,
        "samples": 20,
        "suite": "algebra",
    }

    def __init__(self, command: str, **values: Any):
        if command not in COMMANDS:
            raise ValueError(f"Unknown command: {command}")
        self.command = command
        unknown = sorted(set(values) - set(self.DEFAULTS))
        if unknown:
            raise ValueError(f"Unknown config field: {unknown[0]}")
        for key, default in self.DEFAULTS.items():
            raw = values.get(key, default)
            try:
                setattr(self, key, FIELD_TYPES[key](raw) if raw is not None else None)
            except (TypeError, ValueError):
                raise ValueError(f"Invalid value for {key}: {raw!r}")
        self._fold_family_parameter()
        self.validate()

    def _fold_family_parameter(self) -> None:
        # "ga:2" carries A in the family name; keep a single source for it
        name = self.family.strip().lower()
        if name.startswith(Family.GA.value) and name != Family.GA.value:
            self.A = InertiaSpec.parse(name).A
            self.family = Family.GA.value

    def validate(self) -> None:
        self.inertia()
        if self.n < Grid.MIN_POINTS or self.n % 2 != 0:
            raise ValueError(f"Invalid value for n: must be even and >= {Grid.MIN_POINTS}, got {self.n}")
        if not self.dt > 0:
            raise ValueError(f"Invalid value for dt: must be positive, got {self.dt}")
        if self.T < 0:
            raise ValueError(f"Invalid value for T: must be non-negative, got {self.T}")
        if self.store_every < 1:
            raise ValueError(f"Invalid value for store_every: must be positive, got {self.store_every}")
        if not self.eps or any(not 0.0 < e <= 0.3 for e in self.eps):
            raise ValueError(f"Invalid value for eps: every entry must lie in (0, 0.3], got {self.eps}")
        if self.case not in CURVATURE_CASES:
            raise ValueError(f"Invalid value for case: expected one of {', '.join(CURVATURE_CASES)}")
        if self.suite not in SUITES:
            raise ValueError(f"Invalid value for suite: expected one of {', '.join(SUITES)}")
        if self.samples < 1:
            raise ValueError(f"Invalid value for samples: must be positive, got {self.samples}")
        parse_initial_condition(self.ic)

    def inertia(self) -> InertiaSpec:
        name = self.family.strip().lower()
        if name == Family.GA.value:
            return InertiaSpec.ga(self.A, central=self.central)
        return InertiaSpec.parse(name, central=self.central)

    def grid(self) -> Grid:
        return Grid(self.n)

    def tag(self) -> str:
        if self.command == "verify":
            return f"{self.suite}-seed{self.seed}"
        if self.command == "curvature":
            return f"{self.case}"
        if self.command == "vanish":
            return f"h{self.height:g}-w{self.width:g}"
        return f"{self.inertia().name.replace(':', '')}-a{self.a:g}-n{self.n}"

    def output_dir(self) -> Path:
        root = self.out or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT_ROOT
        return Path(root) / f"{self.command}-{self.tag()}"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"command": self.command}
        for key in self.DEFAULTS:
            value = getattr(self, key)
            data[key] = list(value) if isinstance(value, list) else value
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        if "command" not in data:
            raise ValueError("Missing required field: command")
        values = {k: v for k, v in data.items() if k != "command"}
        return cls(data["command"], **values)

    @classmethod
    def from_json(cls, json_str: str) -> 'RunConfig':
        try:
            data = json.loads(json_str)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON: {e}")
        if not isinstance(data, dict):
            raise ValueError("Config JSON must be an object")
        return cls.from_dict(data)

    def to_text(self) -> str:
        lines = [f"command = {self.command}"]
        for key in self.DEFAULTS:
            value = getattr(self, key)
            if value is None:
                text = ""
            elif isinstance(value, list):
                text = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> 'RunConfig':
        return cls.from_dict(parse_text(text))

    def with_overrides(self, overrides: Dict[str, Any]) -> 'RunConfig':
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"RunConfig({self.command}, family={self.family}, n={self.n}, dt={self.dt:g}, T={self.T:g})"


def parse_text(text: str) -> Dict[str, str]:
    data: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"Line {number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"Line {number}: missing key")
        data[key] = value
    return data


def load_config(path: str) -> Dict[str, str]:
    content = Path(path).read_text(encoding="utf-8")
    if content.lstrip().startswith("{"):
        data = json.loads(content)
        return {k: v for k, v in data.items()}
    return parse_text(content)


def create_solve_config(family: str = "h0", a: float = 0.0, ic: str = "sine:0.2:1", **values: Any) -> RunConfig:
    return RunConfig("solve", family=family, a=a, ic=ic, **values)


def create_jacobi_config(family: str = "h0", a: float = 0.0, ic: str = "sine:0.2:1", **values: Any) -> RunConfig:
    return RunConfig("jacobi", family=family, a=a, ic=ic, **values)


def create_curvature_config(case: str = "burgers-sincos", a1: float = 0.0, a2: float = 0.0,
                            **values: Any) -> RunConfig:
    return RunConfig("curvature", case=case, a1=a1, a2=a2, **values)


def create_vanish_config(eps: Optional[List[float]] = None, **values: Any) -> RunConfig:
    return RunConfig("vanish", eps=eps if eps is not None else [0.2, 0.1, 0.05], **values)


def create_verify_config(suite: str = "algebra", seed: int = 0, **values: Any) -> RunConfig:
    return RunConfig("verify", suite=suite, seed=seed, **values)


def parse_initial_condition(descriptor: str) -> List[Any]:
    parts = [p.strip() for p in descriptor.strip().lower().split(":")]
    kind, args = parts[0], parts[1:]
    expected = {"zero": 0, "sine": 2, "cosine": 2, "bump": 2, "random": 2}
    if kind not in expected:
        raise ValueError(f"Unknown initial condition: {descriptor}")
    if len(args) != expected[kind]:
        raise ValueError(f"Initial condition {kind} takes {expected[kind]} parameters, got {len(args)}")
    try:
        values = [float(args[0]), float(args[1])] if args else []
    except ValueError:
        raise ValueError(f"Invalid initial condition parameters: {descriptor}")
    if kind in ("sine", "cosine", "random") and (values[1] != int(values[1]) or values[1] < 1):
        raise ValueError(f"Wavenumber or degree must be a positive integer: {descriptor}")
    if kind == "bump" and values[1] <= 0:
        raise ValueError(f"Bump width must be positive: {descriptor}")
    return [kind] + values


def build_initial_condition(descriptor: str, grid: Grid, seed: int = 0) -> Field:
    kind, *values = parse_initial_condition(descriptor)
    if kind == "zero":
        return grid.zeros()

    amp, param = values
    x = (grid.nodes - grid.origin) * (2.0 * np.pi / grid.length)
    if kind == "sine":
        return Field(grid, amp * np.sin(int(param) * x))
    if kind == "cosine":
        return Field(grid, amp * np.cos(int(param) * x))
    if kind == "bump":
        centre = grid.origin + 0.5 * grid.length
        s = (grid.nodes - centre) / param
        inside = np.abs(s) < 1.0
        profile = np.zeros(grid.n)
        profile[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return Field(grid, profile)

    field = random_trig(grid, make_rng(seed, stream=1), int(param))
    peak = field.sup()
    return field * (amp / peak) if peak > 0 else field
