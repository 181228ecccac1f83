import argparse
import logging
import sys
import threading
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import __version__


class Color:
    RESET = "\033[0m"
    BOLD = "\033[1m"

    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"
    BLUE = "\033[34m"
    MAGENTA = "\033[35m"
    CYAN = "\033[36m"
    WHITE = "\033[37m"

    @classmethod
    def colorize(cls, text: str, color: str) -> str:
        return f"{color}{text}{cls.RESET}"


class CommandType(Enum):
    SOLVE = "solve"
    JACOBI = "jacobi"
    CURVATURE = "curvature"
    VANISH = "vanish"
    VERIFY = "verify"


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SHOCK = 2


class GeoflowCLI:

    def __init__(self, use_color: bool = True):
        self.use_color = use_color
        self._print_lock = threading.Lock()
        self._handlers: Dict[CommandType, Callable[[Any], int]] = {}

    def register_handler(self, cmd_type: CommandType, handler: Callable[[Any], int]) -> None:
        self._handlers[cmd_type] = handler

    def _tag(self, label: str, color: str) -> str:
        return Color.colorize(label, color) if self.use_color else label

    def print_banner(self, command: CommandType) -> None:
        with self._print_lock:
            print(f"{self._tag('geoflow', Color.CYAN)} {__version__} :: {command.value}")

    def print_system(self, message: str) -> None:
        with self._print_lock:
            print(f"{self._tag('[System]', Color.YELLOW)} {message}")

    def print_error(self, message: str) -> None:
        with self._print_lock:
            print(f"{self._tag('[Error]', Color.RED)} {message}", file=sys.stderr)

    def print_success(self, message: str) -> None:
        with self._print_lock:
            print(f"{self._tag('[OK]', Color.GREEN)} {message}")

    def print_result(self, header: Sequence[str], rows: List[Sequence[Any]]) -> None:
        cells = [[_format_cell(v) for v in row] for row in rows]
        widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
        with self._print_lock:
            print(self._tag("  ".join(h.ljust(w) for h, w in zip(header, widths)), Color.BOLD))
            for row in cells:
                print("  ".join(c.ljust(w) for c, w in zip(row, widths)))

    def dispatch(self, cmd_type: CommandType, config: Any) -> int:
        if cmd_type not in self._handlers:
            self.print_error(f"No handler for command: {cmd_type.value}")
            return EXIT_ERROR
        self.print_banner(cmd_type)
        return self._handlers[cmd_type](config)


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument('--config', '-c', type=str, help='Run configuration file (key = value or JSON)')
    common.add_argument('--out', '-o', type=str, help='Output root directory (default: $GEOFLOW_OUT or ./runs)')
    common.add_argument('--seed', type=int, help='Seed for randomized inputs')
    common.add_argument('--verbose', '-v', action='store_true', help='Log progress messages')
    common.add_argument('--debug', action='store_true', help='Log per-step diagnostics')
    common.add_argument('--no-color', action='store_true', help='Plain console output')
    return common


def _add_geodesic_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--family', type=str, help='Metric: h0..h4, ga or ga:A (default: h0)')
    parser.add_argument('--A', dest='A', type=float, help='Parameter of the ga metric (default: 1)')
    parser.add_argument('--a', dest='a', type=float, help='Central velocity; nonzero gives KdV-type flows')
    parser.add_argument('--central', action='store_const', const=True, help='Use the Virasoro bracket')
    parser.add_argument('--n', type=int, help='Grid size, even (default: 256)')
    parser.add_argument('--dt', type=float, help='Time step (default: 1e-3)')
    parser.add_argument('--T', dest='T', type=float,
                        help='Horizon (default: 1); a steepening front stops the run early, sooner on coarser grids')
    parser.add_argument('--ic', type=str, help='Initial velocity: zero, sine:AMP:K, cosine:AMP:K, '
                                               'bump:AMP:WIDTH, random:AMP:DEGREE')
    parser.add_argument('--store-every', dest='store_every', type=int, help='Keep every k-th state')


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="geoflow",
        description="Geodesic flows on the diffeomorphism group of the circle and the Virasoro-Bott group",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        allow_abbrev=False
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser('solve', parents=[common], allow_abbrev=False, help='Integrate a geodesic')
    _add_geodesic_options(solve)
    solve.add_argument('--sweep-a', dest='sweep_a', type=str, help='Comma-separated central values to sweep')

    jacobi = commands.add_parser('jacobi', parents=[common], allow_abbrev=False,
                                 help='Jacobi fields along a geodesic')
    _add_geodesic_options(jacobi)

    curvature = commands.add_parser('curvature', parents=[common], allow_abbrev=False,
                                    help='Curvature tables')
    curvature.add_argument('--case', type=str, help='burgers-sincos, virasoro-sincos, random or emb')
    curvature.add_argument('--a1', type=float, help='Central part of the first vector')
    curvature.add_argument('--a2', type=float, help='Central part of the second vector')
    curvature.add_argument('--samples', type=int, help='Number of random inputs')
    curvature.add_argument('--n', type=int, help='Grid size, even (default: 256)')

    vanish = commands.add_parser('vanish', parents=[common], allow_abbrev=False,
                                 help='Compression-wave paths with vanishing energy')
    vanish.add_argument('--eps', type=str, help='Comma-separated mollification widths')
    vanish.add_argument('--height', type=float, help='Height of the target bump (default: 0.4)')
    vanish.add_argument('--width', type=float, help='Half-width of the target bump (default: 1)')

    verify = commands.add_parser('verify', parents=[common], allow_abbrev=False, help='Run a property suite')
    verify.add_argument('suite_name', nargs='?', help='algebra, cocycles, curvature, conservation, '
                                                      'jacobi, vanish or convergence')
    verify.add_argument('--suite', type=str, help='Same as the positional suite name')

    return parser.parse_args(argv)


OVERRIDE_KEYS = ("family", "A", "a", "central", "n", "dt", "T", "ic", "store_every", "seed", "out",
                 "sweep_a", "eps", "height", "width", "case", "a1", "a2", "samples", "suite")


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {key: getattr(args, key) for key in OVERRIDE_KEYS if getattr(args, key, None) is not None}
    if getattr(args, "suite_name", None):
        overrides["suite"] = args.suite_name
    return overrides


def configure_logging(args: argparse.Namespace) -> None:
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.verbose:
        logging.getLogger().setLevel(logging.INFO)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_arguments(argv)

    try:
        from .config import RunConfig, load_config
        from .runner import ExperimentRunner

        configure_logging(args)

        values: Dict[str, Any] = {}
        if args.config:
            values.update(load_config(args.config))
        values.update(overrides_from_args(args))
        values["command"] = args.command
        config = RunConfig.from_dict(values)

        runner = ExperimentRunner(config, GeoflowCLI(use_color=not args.no_color and sys.stdout.isatty()))
        return runner.start()

    except KeyboardInterrupt:
        print("\nInterrupted.")
        return EXIT_ERROR
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
