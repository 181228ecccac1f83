import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from .flow import Trajectory, shock_time

logger = logging.getLogger(__name__)

SUMMARY_FIELDS = ["spec", "n", "dt", "T", "a", "momentum_drift", "energy_drift", "shock_time", "exit_reason"]


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no literal for inf or nan
        return value if math.isfinite(value) else repr(value)
    return value


def dumps(data: Dict[str, Any]) -> str:
    return json.dumps(jsonable(data), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, data: Dict[str, Any]) -> bool:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(data), encoding="utf-8")
        logger.info(f"Wrote {path}")
        return True
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Could not write {path}: {e}")
        return False


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bool:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        logger.info(f"Wrote {path}")
        return True
    except (OSError, csv.Error) as e:
        logger.error(f"Could not write {path}: {e}")
        return False


def write_table(path: Path, rows: List[Dict[str, Any]], header: Sequence[str]) -> bool:
    return write_csv(path, header, ([row.get(key, "") for key in header] for row in rows))


def trajectory_header(traj: Trajectory, column: str = "u") -> List[str]:
    return ["t"] + [f"{column}_{i}" for i in range(traj.grid.n)]


def trajectory_rows(traj: Trajectory, column: str = "u") -> Iterable[List[float]]:
    """One row per stored time: t followed by the velocity (or displacement g) at every node."""
    for state in traj.states:
        values = state.u.values if column == "u" else state.lag.disp.values
        yield [state.t] + values.tolist()


def trajectory_summary(traj: Trajectory, T: float) -> Dict[str, Any]:
    first = traj.states[0]
    return {
        "spec": traj.spec.name,
        "central": traj.spec.central,
        "n": traj.grid.n,
        "dt": traj.dt,
        "T": T,
        "a": traj.a,
        "integrator": traj.integrator,
        "steps": len(traj) - 1,
        "t_final": traj.final.t,
        "momentum_drift": traj.momentum_drift(),
        "energy_drift": traj.energy_drift(),
        "shock_time": shock_time(first.u),
        "exit_reason": traj.exit_reason,
    }


def write_trajectory(directory: Path, traj: Trajectory, T: float) -> bool:
    summary = trajectory_summary(traj, T)
    ok = write_csv(directory / "trajectory.csv", trajectory_header(traj), trajectory_rows(traj))
    ok = write_csv(directory / "lagrangian.csv", trajectory_header(traj, "g"), trajectory_rows(traj, "g")) and ok
    return write_json(directory / "summary.json", summary) and ok
