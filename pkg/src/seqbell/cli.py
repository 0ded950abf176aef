"""Command-line front end.

    seqbell table  [--mu LIST | --adaptive-fraction F] [--depth N]
    seqbell tree   ...
    seqbell run    --seed N ...
    seqbell cost   ...
    seqbell memory ... [--slots M] [--temperature K]

Common flags: ``--format {text,csv}`` (text is JSON lines), ``--out PATH``,
``--workers N``, ``--backend {auto,cython,numpy}``. Noise values accept
rational multiples of pi (``pi/40``, ``3pi/8``, ``2*pi/9``) or decimals.

Exit status: 0 success; 2 invalid configuration; 3 numerical or degenerate
input; 4 schedule violation (margin report on stderr); 5 a computed ledger
flags a broken invariant.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import export
from .config import DEFAULT_TEMPERATURE, MAX_DEPTH
from .cost import comm_ledger, finite_memory_simulate, telescoping_margins
from .errors import ConfigError, InvariantViolation, ScheduleViolationError, SeqBellError
from .protocol import (MuSchedule, distinct_bob_states, enumerate_tree, sample_trajectory,
                       validate_schedule)

COMMANDS = ("table", "tree", "run", "cost", "memory")
DEFAULT_MU = "pi/9,pi/12,pi/40,pi/500"
DEFAULT_SLOTS = 2

_PI_FORM = re.compile(r"^(?:(\d+)\s*\*?\s*)?pi(?:\s*/\s*(\d+))?$")


def parse_angle(text: str) -> float:
    """``"pi/40"`` -> ``pi * 1/40``; the rational factor is exact before the one conversion."""
    s = text.strip().lower().replace(" ", "")
    m = _PI_FORM.match(s)
    if m:
        num = int(m.group(1) or 1)
        den = int(m.group(2) or 1)
        if den == 0:
            raise ConfigError(f"zero denominator in {text!r}")
        frac = Fraction(num, den)
        return math.pi * frac.numerator / frac.denominator
    try:
        value = float(s)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"angle must be finite, got {text!r}")
    return value


def parse_angle_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigError("empty noise list")
    return [parse_angle(t) for t in items]


@dataclass(frozen=True)
class RunConfig:
    command: str
    depth: int
    schedule: MuSchedule
    seed: int | None = None
    memory_slots: int = DEFAULT_SLOTS
    temperature: float = DEFAULT_TEMPERATURE
    output_format: str = "text"
    output_path: str | None = None
    workers: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.depth < 0 or self.depth > MAX_DEPTH:
            raise ConfigError(f"depth must lie in [0, {MAX_DEPTH}], got {self.depth}")
        if not self.schedule.supports(self.depth):
            raise ConfigError(f"noise list has {len(self.schedule.explicit_list)} entries "
                              f"but depth is {self.depth}")
        if self.command == "run" and self.seed is None:
            raise ConfigError("run needs --seed")
        if self.command == "table" and self.schedule.mode != "EXPLICIT":
            raise ConfigError("table needs an explicit --mu list")
        if self.memory_slots < 1:
            raise ConfigError(f"--slots must be positive, got {self.memory_slots}")
        if not self.temperature > 0:
            raise ConfigError(f"--temperature must be positive, got {self.temperature}")
        if self.output_format not in ("text", "csv"):
            raise ConfigError(f"unknown format {self.output_format!r}")
        if self.workers < 1:
            raise ConfigError(f"--workers must be positive, got {self.workers}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqbell", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--depth", type=int, default=4)
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--mu", help=f"comma-separated noise list (default {DEFAULT_MU})")
    group.add_argument("--adaptive-fraction", type=float,
                       help="use mu_k = F * fraction on every branch")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--slots", type=int, default=DEFAULT_SLOTS)
    parser.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    parser.add_argument("--format", choices=("text", "csv"), default="text")
    parser.add_argument("--out")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--backend", choices=("auto", "cython", "numpy"), default="auto")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.adaptive_fraction is not None:
        schedule = MuSchedule.adaptive(args.adaptive_fraction)
    else:
        schedule = MuSchedule.explicit(parse_angle_list(args.mu or DEFAULT_MU))
    return RunConfig(
        command=args.command,
        depth=args.depth,
        schedule=schedule,
        seed=args.seed,
        memory_slots=args.slots,
        temperature=args.temperature,
        output_format=args.format,
        output_path=args.out,
        workers=args.workers,
        backend=None if args.backend == "auto" else args.backend,
    )


def _require_valid(config: RunConfig) -> None:
    report = validate_schedule(config.schedule, config.depth)
    if not report.valid:
        bad = report.first_violation()
        raise ScheduleViolationError(
            f"step {bad.level}: mu={bad.mu:.6g} is not inside (0, {bad.min_bound:.6g})",
            report=report)


def _tree(config: RunConfig):
    return enumerate_tree(config.schedule, config.depth, workers=config.workers,
                          backend=config.backend)


def cmd_table(config: RunConfig) -> str:
    _require_valid(config)
    return export.render(export.table_records(_tree(config)), export.TABLE_FIELDS,
                         config.output_format)


def cmd_tree(config: RunConfig) -> str:
    _require_valid(config)
    return export.render(export.tree_records(_tree(config)), export.TREE_FIELDS,
                         config.output_format)


def cmd_run(config: RunConfig) -> str:
    steps = sample_trajectory(config.seed, config.schedule, config.depth)
    return export.render(export.run_records(steps), export.RUN_FIELDS, config.output_format)


MEMORY_MODEL = "model-dependent: m-slot greedy quantizer over trace-distance classes"


def _render_ledger(config, records, fields, summary) -> str:
    if config.output_format == "text":
        return export.to_jsonl([*records, {"summary": summary}])
    return export.to_csv(records, fields)


def cmd_cost(config: RunConfig) -> tuple[str, list[str]]:
    _require_valid(config)
    levels = _tree(config)
    comm = comm_ledger(levels)
    flags = []
    if comm.violation:
        flags.append("comm-bound-violated")
    if config.depth and not comm.strictly_increasing:
        flags.append("partial-sums-not-increasing")
    margins = []
    for parent, children in zip(levels[:-1], levels[1:]):
        margin, holds = telescoping_margins(parent, children)
        margins.append(float(margin.min()))
        if not np.all(holds):
            flags.append(f"telescoping-failed-level-{children.depth}")
    distinct = [distinct_bob_states(level) for level in levels[1:]]
    records = list(export.cost_records(comm, margins, distinct))
    summary = {
        "command": "cost",
        "comm_bound": comm.bound,
        "comm_total": comm.total,
        "strictly_increasing": comm.strictly_increasing,
        "min_telescoping_margin": min(margins, default=None),
        "flags": flags,
    }
    return _render_ledger(config, records, export.COST_FIELDS, summary), flags


def cmd_memory(config: RunConfig) -> tuple[str, list[str]]:
    _require_valid(config)
    levels = _tree(config)
    erasure = finite_memory_simulate(levels[1:], config.memory_slots, config.temperature)
    flags = []
    for row in erasure.per_level:
        if row.bits_erased < 0 or (row.memory_slots >= row.distinct_states and row.bits_erased):
            flags.append(f"erasure-inconsistent-level-{row.level}")
    summary = {
        "command": "memory",
        "memory_slots": config.memory_slots,
        "temperature": erasure.temperature,
        "total_bits_erased": sum(r.bits_erased for r in erasure.per_level),
        "total_heat_joules": sum(r.heat_joules for r in erasure.per_level),
        "memory_model": MEMORY_MODEL,
        "flags": flags,
    }
    records = list(export.memory_records(erasure))
    return _render_ledger(config, records, export.MEMORY_FIELDS, summary), flags


def execute(config: RunConfig) -> str:
    """Run one command and return its output; raises on invariant flags."""
    handler = {"table": cmd_table, "tree": cmd_tree, "run": cmd_run,
               "cost": cmd_cost, "memory": cmd_memory}[config.command]
    result = handler(config)
    if isinstance(result, tuple):
        text, flags = result
        if flags:
            err = InvariantViolation(", ".join(flags))
            err.output = text
            raise err
        return text
    return result


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error_payload(err: SeqBellError) -> dict:
    payload = {"error": err.code, "message": str(err)}
    report = getattr(err, "report", None)
    if report is not None:
        payload["margins"] = [
            {"level": m.level, "mu": m.mu, "min_bound": m.min_bound, "margin": m.margin,
             "valid": m.valid}
            for m in report.levels
        ]
    history = getattr(err, "history", None)
    if history is not None:
        payload["history"] = history
    return payload


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        _write(execute(config), config.output_path)
    except InvariantViolation as err:
        _write(err.output, args.out)
        sys.stderr.write(json.dumps(_error_payload(err)) + "\n")
        return err.exit_status
    except SeqBellError as err:
        sys.stderr.write(json.dumps(_error_payload(err)) + "\n")
        return err.exit_status
    return 0


if __name__ == "__main__":
    sys.exit(main())
