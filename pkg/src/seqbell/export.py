"""Record builders and writers for the JSON-lines and CSV exports.

Machine exports carry full float precision (shortest round-trip repr);
report tables are rounded to 6 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

from .cost import CommLedger, ErasureLedger, shannon_entropy
from .protocol import DistinctStates, Level, TrajectoryStep, distinct_bob_states

TREE_FIELDS = ("history", "probability", "theta", "negativity", "s_noisy", "s_max",
               "bob_bloch_vector")
TABLE_FIELDS = ("time", "mu", "raw_states", "distinct_states", "min_negativity",
                "max_negativity", "min_s_chsh", "max_s_chsh")
RUN_FIELDS = ("step", "choice", "outcome", "mu", "outcome_probability", "theta",
              "negativity", "s_noisy", "history")
COST_FIELDS = ("k", "c_k", "partial_sum", "min_telescoping_margin", "distinct_states",
               "entropy_bits")
MEMORY_FIELDS = ("k", "raw_states", "distinct_states", "entropy_bits", "memory_slots",
                 "bits_erased", "heat_joules", "distortion")


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def sig6(x):
    x = _num(x)
    return None if x is None else float(f"{x:.6g}")


def tree_records(levels: Sequence[Level]) -> Iterable[dict]:
    for level in levels:
        bloch = level.bob_bloch
        for i in range(len(level)):
            yield {
                "history": level.history(i),
                "probability": _num(level.probability[i]),
                "theta": _num(level.theta[i]),
                "negativity": _num(level.negativity[i]),
                "s_noisy": _num(level.s_noisy[i]),
                "s_max": _num(level.s_max[i]),
                "bob_bloch_vector": [_num(c) for c in bloch[i]],
            }


def table_records(levels: Sequence[Level], tol: float = 1e-9) -> Iterable[dict]:
    """One row per time step, rounded to 6 significant digits.

    The S columns range over the step's parents, i.e. the states on which the
    step's measurement was made; they are empty at ``t0``.
    """
    for level in levels:
        k = level.depth
        s = level.s_noisy
        yield {
            "time": f"t{k}",
            "mu": None if k == 0 else sig6(level.mu.max()),
            "raw_states": len(level),
            "distinct_states": distinct_bob_states(level, tol).distinct_count,
            "min_negativity": sig6(level.negativity.min()),
            "max_negativity": sig6(level.negativity.max()),
            "min_s_chsh": None if k == 0 else sig6(s.min()),
            "max_s_chsh": None if k == 0 else sig6(s.max()),
        }


def run_records(steps: Sequence[TrajectoryStep]) -> Iterable[dict]:
    for s in steps:
        yield {
            "step": s.step,
            "choice": "x" if s.choice.value == "A" else "xbar",
            "outcome": s.outcome,
            "mu": _num(s.mu),
            "outcome_probability": _num(s.outcome_probability),
            "theta": _num(s.theta),
            "negativity": _num(s.negativity),
            "s_noisy": _num(s.s_noisy),
            "history": s.history,
        }


def cost_records(comm: CommLedger, margins: Sequence[float],
                 distinct: Sequence[DistinctStates]) -> Iterable[dict]:
    """One row per step; ``margins`` and ``distinct`` are indexed like the rows."""
    for row, margin, d in zip(comm.per_level, margins, distinct):
        yield {
            "k": row.level,
            "c_k": row.c_k,
            "partial_sum": row.partial_sum,
            "min_telescoping_margin": _num(margin),
            "distinct_states": d.distinct_count,
            "entropy_bits": shannon_entropy(d.probability),
        }


def memory_records(erasure: ErasureLedger) -> Iterable[dict]:
    for e in erasure.per_level:
        yield {
            "k": e.level,
            "raw_states": e.raw_states,
            "distinct_states": e.distinct_states,
            "entropy_bits": e.entropy_bits,
            "memory_slots": e.memory_slots,
            "bits_erased": e.bits_erased,
            "heat_joules": e.heat_joules,
            "distortion": _num(e.distortion),
        }


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def to_csv(records: Iterable[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = []
    for f in fields:
        header.extend([f"{f}_x", f"{f}_y", f"{f}_z"] if f == "bob_bloch_vector" else [f])
    writer.writerow(header)
    for r in records:
        row = []
        for f in fields:
            v = r[f]
            if isinstance(v, list):
                row.extend(_csv_cell(c) for c in v)
            else:
                row.append(_csv_cell(v))
        writer.writerow(row)
    return buf.getvalue()


def render(records: Iterable[dict], fields: Sequence[str], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(records, fields)
    if fmt == "text":
        return to_jsonl(records)
    raise ValueError(f"unknown format {fmt!r}")
