# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Command line interface: ``desqn train|trace|sweep-g|sweep-lr <task> ...``.

Exit codes: 0 on success, 2 if training reached the episode cap, 1 on usage or
configuration errors.
"""

import argparse
import logging
import sys

from desqn import __version__
from desqn.config import read_overrides
from desqn.exc import InvalidConfigError, UnknownTaskError
from desqn.experiments import (
    DESK_SEEDS,
    FULL_SEEDS,
    G_VALUES,
    LR_EXPONENTS,
    SweepSpec,
    cmd_sweep_g,
    cmd_sweep_lr,
    cmd_trace,
    cmd_train,
    summary_line,
)
from desqn.types import OPTIMIZER_KINDS, READOUT_KINDS, TASK_NAMES

# typing ----------------------------------------------------------------

from typing import Any, Callable, Dict, NoReturn, Optional, Sequence, Tuple, TypeVar

T = TypeVar("T")

# ------------------------------------------------------------------------

_logger = logging.getLogger("desqn")

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_CAP_REACHED = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _csv_list(cast: Callable[[str], T]) -> Callable[[str], Tuple[T, ...]]:
    def parse(text: str) -> Tuple[T, ...]:
        try:
            return tuple(cast(item.strip()) for item in text.split(",") if item.strip())
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e

    return parse


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("task", help="one of %s" % ", ".join(TASK_NAMES))
    p.add_argument("--readout", choices=READOUT_KINDS, default=None)
    p.add_argument("--config", metavar="FILE", help="key = value file overriding any configuration field")
    p.add_argument("--seed", type=int, default=0, help="master seed (default: %(default)s)")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: %(default)s)")


def _add_sweep_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seeds", type=int, default=DESK_SEEDS, help="seeds per cell (default: %(default)s)")
    p.add_argument("--full", action="store_true", help="use %i seeds per cell" % FULL_SEEDS)
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: %(default)s)")


def make_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="desqn", description="Deep echo state Q-network experiments.")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for every episode")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    for name, help_text in (
        ("train", "train one agent, write episodes.csv"),
        ("trace", "train one agent, then record a greedy episode to trace.csv"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_run_options(p)
        p.add_argument("--g", type=float, help="reservoir gain")
        p.add_argument("--lr", type=float, help="learning rate")
        p.add_argument("--optimizer", choices=OPTIMIZER_KINDS)
    # END for each single-run command

    p = sub.add_parser("sweep-g", help="success rate over reservoir gains")
    _add_run_options(p)
    _add_sweep_options(p)
    p.add_argument("--g-values", type=_csv_list(float), default=G_VALUES, help="comma separated gains")

    p = sub.add_parser("sweep-lr", help="success rate over optimizers and learning rates 0.000005 * 2**n")
    _add_run_options(p)
    _add_sweep_options(p)
    p.add_argument("--optimizers", type=_csv_list(str), default=OPTIMIZER_KINDS, help="comma separated subset")
    p.add_argument("--n", type=_csv_list(int), default=LR_EXPONENTS, help="comma separated exponents")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Configuration file first, command line flags on top."""
    out: Dict[str, Any] = read_overrides(args.config) if args.config else {}
    flags = {
        "readout": args.readout,
        "reservoir.g": getattr(args, "g", None),
        "optim.lr": getattr(args, "lr", None),
        "optimizer": getattr(args, "optimizer", None),
    }
    out.update((k, v) for k, v in flags.items() if v is not None)
    return out


def _sweep_readout(overrides: Dict[str, Any]) -> Any:
    """Take the readout kind out of `overrides`; a sweep carries it on its spec.

    A plain ``readout`` key wins over ``agent.readout``.
    """
    dotted = overrides.pop("agent.readout", None)
    if "readout" in overrides:
        return overrides.pop("readout")
    if dotted is not None:
        return dotted
    return "mlp"


def _run(args: argparse.Namespace) -> int:
    overrides = _overrides(args)
    if args.command in ("train", "trace"):
        if args.command == "train":
            report = cmd_train(args.task, overrides, args.seed, args.out)
        else:
            report, _ = cmd_trace(args.task, overrides, args.seed, args.out)
        print(summary_line(args.task, report))
        return EXIT_SUCCESS if report.success else EXIT_CAP_REACHED

    spec = SweepSpec(
        task=args.task,
        readout=_sweep_readout(overrides),
        g_values=getattr(args, "g_values", G_VALUES),
        seeds=FULL_SEEDS if args.full else args.seeds,
        optimizers=getattr(args, "optimizers", OPTIMIZER_KINDS),
        lr_exponents=getattr(args, "n", LR_EXPONENTS),
        master_seed=args.seed,
        overrides=overrides,
        workers=args.workers,
    )
    result = cmd_sweep_g(spec, args.out) if args.command == "sweep-g" else cmd_sweep_lr(spec, args.out)
    for key, rate in sorted(result.success_rates().items()):
        print("%s %s: %s" % (args.task, " ".join(str(k) for k in key), rate))
    return EXIT_SUCCESS


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return _run(args)
    except (InvalidConfigError, UnknownTaskError, OSError) as e:
        _logger.error("%s failed: %s", args.command, e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
