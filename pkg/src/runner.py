import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .artifacts import dumps, trajectory_summary, write_json, write_table, write_trajectory
from .cli import EXIT_ERROR, EXIT_OK, EXIT_SHOCK, CommandType, GeoflowCLI
from .config import RunConfig, build_initial_condition
from .curvature import (curvature_emb, curvature_quadruple, emb_christoffel_expansion, sectional, sincos_reference,
                        virasoro_curvature_form)
from .flow import Trajectory, solve
from .grid import Field
from .jacobi import b1_residuals, pairing_series, solve_jacobi
from .metrics import H0, CentralVec, InertiaSpec
from .sampling import make_rng, random_trig, random_vec, small_diffeo
from .sweep import SweepManager
from .vanish import BumpDisplacement, linear_row, vanish_row
from .verify import run_suite

logging.basicConfig(
    level=logging.WARNING,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

CURVATURE_HEADER = ["case", "input", "generic", "closed_form", "reference", "discrepancy"]
JACOBI_HEADER = ["t", "pairing", "pairing_drift", "b1_residual", "y_sup"]
VANISH_HEADER = ["path", "eps", "energy", "length", "length_bound", "duration", "endpoint_error"]


class ExperimentRunner:

    def __init__(self, config: RunConfig, cli: Optional[GeoflowCLI] = None, max_workers: int = 4):
        self.config = config
        self.cli = cli or GeoflowCLI(use_color=False)
        self.max_workers = max_workers
        self._setup_handlers()

    def _setup_handlers(self) -> None:
        self.cli.register_handler(CommandType.SOLVE, self._handle_solve)
        self.cli.register_handler(CommandType.JACOBI, self._handle_jacobi)
        self.cli.register_handler(CommandType.CURVATURE, self._handle_curvature)
        self.cli.register_handler(CommandType.VANISH, self._handle_vanish)
        self.cli.register_handler(CommandType.VERIFY, self._handle_verify)

    @property
    def output_dir(self) -> Path:
        return self.config.output_dir()

    def start(self) -> int:
        logger.info(f"Starting {self.config!r} -> {self.output_dir}")
        directory = self.output_dir
        try:
            directory.mkdir(parents=True, exist_ok=True)
            (directory / "config.txt").write_text(self.config.to_text(), encoding="utf-8")
        except OSError as e:
            self.cli.print_error(f"Cannot prepare output directory {directory}: {e}")
            return EXIT_ERROR
        return self.cli.dispatch(CommandType(self.config.command), self.config)

    def _geodesic(self, config: RunConfig, a: Optional[float] = None) -> Trajectory:
        grid = config.grid()
        u0 = build_initial_condition(config.ic, grid, config.seed)
        return solve(config.inertia(), u0, a=config.a if a is None else a, T=config.T, dt=config.dt,
                     store_every=config.store_every)

    def _solve_into(self, config: RunConfig, a: float, directory: Path) -> Tuple[Trajectory, bool]:
        traj = self._geodesic(config, a)
        return traj, write_trajectory(directory, traj, config.T)

    def _report_trajectory(self, traj: Trajectory, written: bool, directory: Path) -> int:
        if not written:
            self.cli.print_error(f"Could not write trajectory artifacts to {directory}")
            return EXIT_ERROR
        summary = trajectory_summary(traj, self.config.T)
        self.cli.print_result(
            ["spec", "a", "t_final", "momentum_drift", "energy_drift", "exit_reason"],
            [[summary["spec"], summary["a"], summary["t_final"], summary["momentum_drift"],
              summary["energy_drift"], summary["exit_reason"]]]
        )
        if traj.truncated:
            self.cli.print_error(f"Horizon truncated: {traj.exit_reason}")
            return EXIT_SHOCK
        return EXIT_OK

    def _handle_solve(self, config: RunConfig) -> int:
        if not config.sweep_a:
            traj, written = self._solve_into(config, config.a, self.output_dir)
            return self._report_trajectory(traj, written, self.output_dir)

        sweep = SweepManager(self.max_workers)
        sweep.set_result_callback(lambda key, result: self.cli.print_system(f"{key}: {result[0].exit_reason}"))
        sweep.set_error_callback(lambda key, e: self.cli.print_error(f"{key}: {e}"))
        for a in config.sweep_a:
            sweep.add_task(f"a={a:g}", lambda directory, a=a: self._solve_into(config, a, directory),
                           self.output_dir / f"a{a:g}")
        results = sweep.run()

        codes = [EXIT_ERROR] if sweep.errors else []
        for a in config.sweep_a:
            key = f"a={a:g}"
            if key in results:
                codes.append(self._report_trajectory(*results[key], self.output_dir / f"a{a:g}"))
        return max(codes) if codes else EXIT_ERROR

    def _handle_jacobi(self, config: RunConfig) -> int:
        traj = self._geodesic(config)
        grid = traj.grid
        rng = make_rng(config.seed, stream=2)
        data = [(random_trig(grid, rng, 3, 0.05), random_trig(grid, rng, 3, 0.05), float(rng.normal() * 0.05))
                for _ in range(2)]
        first, second = (solve_jacobi(traj, y0, yt0, 0.0, bt0) for y0, yt0, bt0 in data)

        series = pairing_series(traj, first, second)
        residuals = b1_residuals(traj, first)
        rows = [
            [s.t, p, abs(p - series[0]), r, j.y.sup()]
            for s, p, r, j in zip(traj.states, series, residuals, first)
        ]
        summary = {
            "spec": traj.spec.name,
            "n": grid.n,
            "dt": traj.dt,
            "T": config.T,
            "a": traj.a,
            "pairing_drift": float(np.max(np.abs(series - series[0]))),
            "b1_residual": float(np.max(residuals)),
            "exit_reason": traj.exit_reason,
        }
        ok = write_table(self.output_dir / "jacobi.csv", [dict(zip(JACOBI_HEADER, r)) for r in rows], JACOBI_HEADER)
        ok = write_json(self.output_dir / "summary.json", summary) and ok
        self.cli.print_result(["pairing_drift", "b1_residual", "exit_reason"],
                              [[summary["pairing_drift"], summary["b1_residual"], summary["exit_reason"]]])
        if not ok:
            return EXIT_ERROR
        return EXIT_SHOCK if traj.truncated else EXIT_OK

    def _curvature_rows(self, config: RunConfig) -> List[Dict[str, Any]]:
        grid = config.grid()
        sin = Field(grid, np.sin(grid.nodes))
        cos = Field(grid, np.cos(grid.nodes))

        if config.case == "burgers-sincos":
            k = sectional(H0, CentralVec(sin), CentralVec(cos))
            return [{"case": config.case, "input": "sin,cos", "generic": k, "closed_form": 2.0 / np.pi,
                     "reference": 2.0 / np.pi, "discrepancy": abs(k - 2.0 / np.pi)}]

        virasoro = InertiaSpec.hk(0, central=True)
        if config.case == "virasoro-sincos":
            X, Y = CentralVec(sin, config.a1), CentralVec(cos, config.a2)
            raw = curvature_quadruple(virasoro, X, Y, X, Y)
            form = virasoro_curvature_form(sin, config.a1, cos, config.a2)
            normalized = sectional(virasoro, X, Y)
            reference = sincos_reference(config.a1, config.a2)
            return [
                {"case": config.case, "input": f"raw a1={config.a1:g} a2={config.a2:g}", "generic": raw,
                 "closed_form": form, "reference": reference, "discrepancy": abs(raw - form)},
                {"case": config.case, "input": f"normalized a1={config.a1:g} a2={config.a2:g}",
                 "generic": normalized, "closed_form": "", "reference": reference,
                 "discrepancy": abs(normalized - reference)},
            ]

        rng = make_rng(config.seed, stream=3)
        rows = []
        for index in range(config.samples):
            if config.case == "random":
                X, Y = random_vec(grid, rng, degree=3), random_vec(grid, rng, degree=3)
                generic = curvature_quadruple(virasoro, X, Y, X, Y)
                form = virasoro_curvature_form(X.x, X.a, Y.x, Y.a)
                rows.append({"case": config.case, "input": index, "generic": generic, "closed_form": form,
                             "reference": "", "discrepancy": abs(generic - form)})
            else:
                f = small_diffeo(grid, rng, size=0.3)
                h, k, l = (random_trig(grid, rng, 3, 0.3) for _ in range(3))
                closed = curvature_emb(f, h, k, l)
                expanded = emb_christoffel_expansion(f, h, k, l)
                rows.append({"case": config.case, "input": index, "generic": expanded.sup(),
                             "closed_form": closed.sup(), "reference": "",
                             "discrepancy": (closed - expanded).sup()})
        return rows

    def _handle_curvature(self, config: RunConfig) -> int:
        rows = self._curvature_rows(config)
        ok = write_table(self.output_dir / "curvature.csv", rows, CURVATURE_HEADER)
        self.cli.print_result(CURVATURE_HEADER, [[row[key] for key in CURVATURE_HEADER] for row in rows[:10]])
        return EXIT_OK if ok else EXIT_ERROR

    def _handle_vanish(self, config: RunConfig) -> int:
        target = BumpDisplacement(config.height, config.width)
        sweep = SweepManager(self.max_workers)
        sweep.set_error_callback(lambda key, e: self.cli.print_error(f"{key}: {e}"))
        ordered = sorted(config.eps, reverse=True)
        for eps in ordered:
            sweep.add_task(f"eps={eps:g}", lambda directory, eps=eps: vanish_row(target, eps))
        results = sweep.run()
        if sweep.errors:
            return EXIT_ERROR

        rows = [dict(results[f"eps={eps:g}"], path="wave") for eps in ordered]
        rows.append(dict(linear_row(target, ordered[-1]), path="linear"))
        bounds = [row["length_bound"] for row in rows if row["path"] == "wave"]
        decreasing = all(later < earlier for earlier, later in zip(bounds, bounds[1:]))

        ok = write_table(self.output_dir / "vanish.csv", rows, VANISH_HEADER)
        ok = write_json(self.output_dir / "summary.json", {
            "target": {"height": config.height, "width": config.width},
            "rows": rows,
            "length_bounds_decreasing": decreasing,
        }) and ok
        self.cli.print_result(VANISH_HEADER, [[row[key] for key in VANISH_HEADER] for row in rows])
        if target.peak > 0 and not decreasing:
            self.cli.print_error("Length bounds did not decrease with eps")
        return EXIT_OK if ok else EXIT_ERROR

    def _handle_verify(self, config: RunConfig) -> int:
        report = run_suite(config.suite, config.seed)
        path = self.output_dir / "report.json"
        try:
            path.write_text(dumps(report.to_dict()), encoding="utf-8")
        except OSError as e:
            logger.error(f"Could not write {path}: {e}")
            return EXIT_ERROR

        rows = [[e["property"], e.get("residual", e.get("value")), e.get("tolerance", ""),
                 "pass" if e.get("passed", True) else "FAIL"] for e in report.entries]
        self.cli.print_result(["property", "measured", "tolerance", "status"], rows)
        if report.passed:
            self.cli.print_success(f"Suite {config.suite} passed ({path})")
            return EXIT_OK
        self.cli.print_error(f"Suite {config.suite} has failing properties ({path})")
        return EXIT_ERROR
