# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Training runs, gain and learning-rate sweeps, and their CSV output.

Every run derives all of its randomness from one seed. Sweep cells get their seed from
:func:`desqn.numerics.stable_seed` over (master seed, task, readout, cell coordinates,
seed index), so a cell's result depends neither on the worker count nor on which
other cells run.
"""

__all__ = [
    "DESK_SEEDS",
    "EPISODE_FIELDS",
    "FULL_SEEDS",
    "G_VALUES",
    "LR_BASE",
    "LR_EXPONENTS",
    "CellResult",
    "SweepCell",
    "SweepResult",
    "SweepSpec",
    "cmd_sweep_g",
    "cmd_sweep_lr",
    "cmd_trace",
    "cmd_train",
    "emit_csv",
    "episode_rows",
    "g_cells",
    "grid_lr",
    "lr_cells",
    "run_cells",
    "summary_line",
    "train_run",
]

import csv
from dataclasses import dataclass, field
import logging
import math
import os.path as osp
import time

from joblib import Parallel, delayed

from desqn.agent import Agent
from desqn.config import resolve_config
from desqn.envs import TASKS, make_env
from desqn.exc import InvalidConfigError, UnknownTaskError
from desqn.numerics import rng_streams, stable_seed
from desqn.types import OPTIMIZER_KINDS, READOUT_KINDS
from desqn.util import assure_directory_exists, format_float, value_to_string

# typing ----------------------------------------------------------------

from typing import Any, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from desqn.agent import AgentConfig, EpisodeReport, EpisodeTrace, RunReport
from desqn.types import OptimizerKind, PathLike, ReadoutKind

Row = Mapping[str, Any]

# ------------------------------------------------------------------------

_logger = logging.getLogger(__name__)

EPISODE_FIELDS = ("episode", "steps", "total_reward", "epsilon", "loss_mean", "completed")

G_VALUES: Tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(21))
"""Gains 0.0, 0.1, ..., 2.0."""

LR_BASE = 0.000005
LR_EXPONENTS: Tuple[int, ...] = tuple(range(20))

DESK_SEEDS = 10
FULL_SEEDS = 100

_G_RUN_FIELDS = ("task", "readout", "g", "seed", "success", "success_episode")
_LR_RUN_FIELDS = ("task", "readout", "optimizer", "n", "lr", "seed", "success")


def grid_lr(n: int) -> float:
    """:return: ``0.000005 * 2**n``, exact in binary floating point"""
    return math.ldexp(LR_BASE, n)


# { CSV


def _cell_text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, int, str)):
        return value_to_string(value)
    return format_float(float(value))


def emit_csv(path: PathLike, rows: Iterable[Row], fieldnames: Sequence[str], sort_by: Sequence[str] = ()) -> None:
    """Write `rows` to `path` as UTF-8 CSV with a header row.

    Floats carry :data:`desqn.util.FLOAT_DIGITS` significant digits, booleans are
    written as ``true`` and ``false``, and ``None`` as an empty field. Rows are sorted
    by the `sort_by` columns, so equal inputs always produce equal bytes.

    :raise OSError:
        If the file cannot be written.
    """
    rows = list(rows)
    if sort_by:
        rows.sort(key=lambda row: tuple(row[k] for k in sort_by))
    assure_directory_exists(path, is_file=True)
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.DictWriter(fp, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell_text(row[k]) for k in fieldnames})
    # END with file
    _logger.debug("Wrote %i rows to %s", len(rows), path)


def episode_rows(reports: Iterable[EpisodeReport]) -> List[Row]:
    return [r._asdict() for r in reports]


# } END csv

# { Runs


def train_run(task: str, cfg: AgentConfig, seed: int) -> Tuple[Agent, RunReport]:
    """Train a fresh agent on a fresh `task` environment, all randomness from `seed`."""
    env = make_env(task, cfg.env)
    streams = rng_streams(seed)
    agent = Agent(cfg, env.n_actions, streams)
    _logger.info("Training %s with the %s readout, g=%s, seed %i", task, cfg.readout, cfg.reservoir.g, seed)
    return agent, agent.run_training(env, streams)


def summary_line(task: str, report: RunReport) -> str:
    if report.success:
        return "%s: in episode %i the agent completed the task %i times in a row" % (
            task,
            report.success_episode,
            _streak_length(report),
        )
    if report.diverged:
        return "%s: training diverged after %i episodes" % (task, len(report.episodes))
    return "%s: no success within %i episodes" % (task, len(report.episodes))


def _streak_length(report: RunReport) -> int:
    streak = 0
    for episode in reversed(report.episodes):
        if not episode.completed:
            break
        streak += 1
    return streak


def cmd_train(task: str, overrides: Mapping[str, Any], seed: int, out: PathLike) -> RunReport:
    """Run one full training and write ``episodes.csv`` and ``summary.txt`` to `out`.

    :raise UnknownTaskError:
        If `task` is not a known task.

    :raise InvalidConfigError:
        If `overrides` do not form a valid configuration.
    """
    cfg = resolve_config(task, overrides)
    _, report = train_run(task, cfg, seed)
    emit_csv(osp.join(out, "episodes.csv"), episode_rows(report.episodes), EPISODE_FIELDS, sort_by=("episode",))
    line = summary_line(task, report)
    with open(osp.join(out, "summary.txt"), "w", encoding="utf-8") as fp:
        fp.write(line + "\n")
    _logger.info("%s", line)
    return report


def cmd_trace(
    task: str, overrides: Mapping[str, Any], seed: int, out: PathLike
) -> Tuple[RunReport, EpisodeTrace]:
    """Train like :func:`cmd_train`, then play one greedy episode and write its
    per-step record to ``trace.csv``.

    Each trace row holds the hidden state and observation an action was chosen in, the
    action and the reward it earned.
    """
    cfg = resolve_config(task, overrides)
    agent, report = train_run(task, cfg, seed)
    emit_csv(osp.join(out, "episodes.csv"), episode_rows(report.episodes), EPISODE_FIELDS, sort_by=("episode",))

    env = make_env(task, cfg.env)
    # A separate stream, so the trace does not depend on how long training took.
    trace = agent.greedy_episode(env, rng_streams(stable_seed(seed, task, "trace")))
    obs_names = ["obs_%i" % i for i in range(trace.observations.shape[1])]
    rows = []
    for step, (action, reward) in enumerate(zip(trace.actions, trace.rewards)):
        row: Dict[str, Any] = {"step": step, "action": action, "reward": reward}
        row.update(zip(env.state_names, trace.states[step].variables))
        row.update(zip(obs_names, trace.observations[step]))
        rows.append(row)
    # END for each step
    emit_csv(osp.join(out, "trace.csv"), rows, ["step", "action", "reward", *env.state_names, *obs_names])
    return report, trace


# } END runs

# { Sweeps


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a task and readout, the cells to visit and the seeds per cell.

    :param overrides:
        Configuration overrides applied to every run, below the cell's own settings.

    :param workers:
        Number of worker processes; 1 runs every cell inline.
    """

    task: str
    readout: ReadoutKind = "mlp"
    g_values: Tuple[float, ...] = G_VALUES
    seeds: int = FULL_SEEDS
    optimizers: Tuple[OptimizerKind, ...] = OPTIMIZER_KINDS
    lr_exponents: Tuple[int, ...] = LR_EXPONENTS
    master_seed: int = 0
    overrides: Mapping[str, Any] = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise UnknownTaskError(self.task, list(TASKS))
        if self.readout not in READOUT_KINDS:
            raise InvalidConfigError("Unknown readout %r, expected one of %s" % (self.readout, READOUT_KINDS))
        if any(not g >= 0.0 for g in self.g_values):
            raise InvalidConfigError("Gains must be non-negative, got %s" % (self.g_values,))
        if self.seeds < 1 or self.workers < 1:
            raise InvalidConfigError("seeds and workers must be at least 1, got %r, %r" % (self.seeds, self.workers))
        unknown = [k for k in self.optimizers if k not in OPTIMIZER_KINDS]
        if unknown:
            raise InvalidConfigError("Unknown optimizers %s, expected some of %s" % (unknown, OPTIMIZER_KINDS))
        if any(n < 0 for n in self.lr_exponents):
            raise InvalidConfigError("Learning rate exponents must be non-negative, got %s" % (self.lr_exponents,))


class SweepCell(NamedTuple):
    """One run of a sweep. Learning-rate cells carry optimizer, exponent and rate; gain
    cells leave them ``None``."""

    task: str
    readout: ReadoutKind
    g: Optional[float]
    optimizer: Optional[OptimizerKind]
    n: Optional[int]
    lr: Optional[float]
    seed_index: int
    seed: int

    @property
    def key(self) -> Tuple[Any, ...]:
        """Coordinates of the cell, without the seed."""
        if self.optimizer is None:
            return (self.g,)
        return (self.optimizer, self.n)

    def overrides(self, base: Mapping[str, Any]) -> Dict[str, Any]:
        out = dict(base)
        out["readout"] = self.readout
        if self.g is not None:
            out["reservoir.g"] = self.g
        if self.optimizer is not None:
            out["optimizer"] = self.optimizer
            out["optim.lr"] = self.lr
        return out


class CellResult(NamedTuple):
    cell: SweepCell
    report: RunReport
    wall_seconds: float


@dataclass
class SweepResult:
    spec: SweepSpec
    runs: List[CellResult]

    def success_rates(self) -> Dict[Tuple[Any, ...], float]:
        """:return: Mapping of cell coordinates to successes / seeds"""
        successes: Dict[Tuple[Any, ...], int] = {}
        for run in self.runs:
            key = run.cell.key
            successes[key] = successes.get(key, 0) + int(run.report.success)
        # END for each run
        return {key: count / self.spec.seeds for key, count in successes.items()}

    def successes(self, key: Tuple[Any, ...]) -> int:
        return sum(int(r.report.success) for r in self.runs if r.cell.key == key)


def g_cells(spec: SweepSpec) -> List[SweepCell]:
    return [
        SweepCell(
            spec.task,
            spec.readout,
            g,
            None,
            None,
            None,
            i,
            stable_seed(spec.master_seed, spec.task, spec.readout, "g", format_float(g), i),
        )
        for g in spec.g_values
        for i in range(spec.seeds)
    ]


def lr_cells(spec: SweepSpec) -> List[SweepCell]:
    return [
        SweepCell(
            spec.task,
            spec.readout,
            None,
            kind,
            n,
            grid_lr(n),
            i,
            stable_seed(spec.master_seed, spec.task, spec.readout, kind, n, i),
        )
        for kind in spec.optimizers
        for n in spec.lr_exponents
        for i in range(spec.seeds)
    ]


def _run_cell(cell: SweepCell, cfg: AgentConfig) -> CellResult:
    start = time.perf_counter()
    _, report = train_run(cell.task, cfg, cell.seed)
    return CellResult(cell, report, time.perf_counter() - start)


def run_cells(cells: Sequence[SweepCell], base_overrides: Mapping[str, Any], workers: int = 1) -> List[CellResult]:
    """Run every cell, in a pool of `workers` processes when more than one.

    :return:
        One result per cell, in the order of `cells`.
    """
    configs = [resolve_config(cell.task, cell.overrides(base_overrides)) for cell in cells]
    _logger.info("Running %i sweep cells on %i worker(s)", len(cells), workers)
    results: List[CellResult] = Parallel(n_jobs=workers)(
        delayed(_run_cell)(cell, cfg) for cell, cfg in zip(cells, configs)
    )
    for result in results:
        _logger.info(
            "Cell %s seed %i: success=%s in %.1fs",
            result.cell.key,
            result.cell.seed_index,
            result.report.success,
            result.wall_seconds,
        )
    # END for each result
    return results


def cmd_sweep_g(spec: SweepSpec, out: PathLike) -> SweepResult:
    """Success rate over gains; writes ``sweep_g_runs.csv`` and ``sweep_g.csv``."""
    result = SweepResult(spec, run_cells(g_cells(spec), spec.overrides, spec.workers))
    runs = [
        {
            "task": r.cell.task,
            "readout": r.cell.readout,
            "g": r.cell.g,
            "seed": r.cell.seed_index,
            "success": r.report.success,
            "success_episode": r.report.success_episode,
        }
        for r in result.runs
    ]
    emit_csv(osp.join(out, "sweep_g_runs.csv"), runs, _G_RUN_FIELDS, ("g", "seed"))
    cells = [
        {"task": spec.task, "readout": spec.readout, "g": key[0], "success_rate": rate}
        for key, rate in result.success_rates().items()
    ]
    emit_csv(osp.join(out, "sweep_g.csv"), cells, ("task", "readout", "g", "success_rate"), ("g",))
    return result


def cmd_sweep_lr(spec: SweepSpec, out: PathLike) -> SweepResult:
    """Success rate over optimizers and learning rates ``0.000005 * 2**n``; writes
    ``sweep_lr_runs.csv`` and ``sweep_lr.csv``."""
    result = SweepResult(spec, run_cells(lr_cells(spec), spec.overrides, spec.workers))
    runs = [
        {
            "task": r.cell.task,
            "readout": r.cell.readout,
            "optimizer": r.cell.optimizer,
            "n": r.cell.n,
            "lr": r.cell.lr,
            "seed": r.cell.seed_index,
            "success": r.report.success,
        }
        for r in result.runs
    ]
    emit_csv(osp.join(out, "sweep_lr_runs.csv"), runs, _LR_RUN_FIELDS, ("optimizer", "n", "seed"))
    cells = [
        {
            "task": spec.task,
            "readout": spec.readout,
            "optimizer": key[0],
            "n": key[1],
            "lr": grid_lr(key[1]),
            "success_rate": rate,
        }
        for key, rate in result.success_rates().items()
    ]
    emit_csv(
        osp.join(out, "sweep_lr.csv"),
        cells,
        ("task", "readout", "optimizer", "n", "lr", "success_rate"),
        ("optimizer", "n"),
    )
    return result


# } END sweeps
