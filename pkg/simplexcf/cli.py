"""The ``simplexcf`` command.

Exit codes: 0 success, 2 data degeneracy, 64 usage, 65 config or schema,
70 internal error.
"""
import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from . import __version__
from .config import RunConfig
from .exceptions import SimplexCFError, UsageError
from .models import CounterfactualMode, Direction, PlotKind, TransformKind
from .runner import Runner

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DEGENERATE = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70

COMMANDS = ("encode", "transport", "pipeline", "plot", "fit-dirichlet", "verify")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--dataset", help="input CSV (overrides the config)")
    common.add_argument("--out", dest="output", help="output directory")
    common.add_argument("--seed", type=int, help="root seed of all randomness")
    common.add_argument("--workers", type=int, help="worker threads")
    common.add_argument("--method", choices=["gaussian", "matching"])
    common.add_argument("--transform", choices=[k.value for k in TransformKind])
    common.add_argument("--mode", choices=[m.value for m in CounterfactualMode])
    common.add_argument("--direction", choices=[d.value for d in Direction])
    common.add_argument("--epsilon", type=float, help="zero floor of closure")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )

    parser = _Parser(
        prog="simplexcf",
        description="Counterfactuals of categorical variables on the simplex.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    commands.add_parser("encode", parents=[common], help="encode categorical columns")
    commands.add_parser("transport", parents=[common], help="transport compositions")
    commands.add_parser("pipeline", parents=[common], help="sequential counterfactuals")
    plot = commands.add_parser("plot", parents=[common], help="ternary SVG diagrams")
    plot.add_argument("--what", choices=[k.value for k in PlotKind])
    plot.add_argument("--column", help="the three-category column to draw")
    commands.add_parser("fit-dirichlet", parents=[common], help="Dirichlet fits")
    commands.add_parser("verify", parents=[common], help="check coupling plans")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """The defaults, overlaid by the config file, overlaid by the flags.

    Raises:
        ConfigError: The resolved configuration is invalid.
    """
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    flags = {
        name: getattr(args, name, None)
        for name in (
            "dataset",
            "output",
            "seed",
            "workers",
            "method",
            "transform",
            "mode",
            "direction",
            "epsilon",
            "what",
            "column",
        )
    }
    config.override(**flags)
    config.validate(args.command)
    return config


async def run_command(command: str, config: RunConfig) -> int:
    async with Runner(config) as runner:
        if command == "encode":
            await runner.encode()
        elif command == "transport":
            await runner.transport()
        elif command == "pipeline":
            await runner.pipeline()
        elif command == "plot":
            await runner.plot()
        elif command == "fit-dirichlet":
            await runner.fit_dirichlet()
        elif command == "verify":
            results = await runner.verify()
            return EXIT_OK if all(results.values()) else EXIT_DEGENERATE
        else:
            raise UsageError(f"Unknown command {command!r}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format=LOG_FORMAT)
    try:
        config = load_config(args)
        return asyncio.run(run_command(args.command, config))
    except SimplexCFError as e:
        print(f"simplexcf: {e}", file=sys.stderr)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
