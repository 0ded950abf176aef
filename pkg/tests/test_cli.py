import json
import math
from pathlib import Path

import pytest

from seqbell.cli import main, parse_angle, parse_angle_list
from seqbell.errors import ConfigError

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(text):
    return [json.loads(line) for line in text.splitlines()]


@pytest.mark.parametrize("text, expected", [
    ("pi/9", math.pi / 9), ("pi", math.pi), ("2*pi/3", 2 * math.pi / 3), ("3 pi / 500", 3 * math.pi / 500),
    ("0.25", 0.25), ("1e-3", 1e-3),
])
def test_parse_angle(text, expected):
    assert parse_angle(text) == pytest.approx(expected, rel=1e-15)


def test_parse_angle_list():
    assert parse_angle_list("pi/9, pi/12") == [math.pi / 9, math.pi / 12]
    with pytest.raises(ConfigError):
        parse_angle("tau/2")


def test_table_golden(capsys):
    code, out, _ = run(capsys, "table", "--depth", "4")
    assert code == 0
    assert out == (GOLDEN / "table_I.jsonl").read_text()


def test_table_depth_zero(capsys):
    code, out, _ = run(capsys, "table", "--depth", "0")
    rows = records(out)
    assert code == 0 and len(rows) == 1
    assert rows[0]["min_negativity"] == 0.5 and rows[0]["min_s_chsh"] is None


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--depth", "1", "--format", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "time,mu,raw_states,distinct_states,min_negativity,max_negativity,min_s_chsh,max_s_chsh"
    assert lines[2].startswith("t1,0.349066,4,4,0.321394")


def test_boundary_schedule_exits_4(capsys):
    code, out, err = run(capsys, "table", "--mu", "pi/8", "--depth", "1")
    assert code == 4 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "schedule-violation"
    assert payload["margins"][0]["margin"] == 0.0


def test_depth_cap_exits_2(capsys):
    code, _, err = run(capsys, "tree", "--adaptive-fraction", "0.5", "--depth", "11")
    assert code == 2
    assert json.loads(err)["error"] == "invalid-config"


def test_short_schedule_exits_2(capsys):
    code, _, _ = run(capsys, "table", "--mu", "pi/9", "--depth", "2")
    assert code == 2


def test_run_requires_seed(capsys):
    assert run(capsys, "run", "--depth", "2")[0] == 2


def test_tree_records(capsys):
    code, out, _ = run(capsys, "tree", "--depth", "2")
    rows = records(out)
    assert code == 0
    leaves = [r for r in rows if len(r["history"]) == 4]
    assert len(rows) == 1 + 4 + 16 and len(leaves) == 16
    assert [r["history"] for r in leaves] == sorted(r["history"] for r in leaves)
    assert sum(r["probability"] for r in leaves) == pytest.approx(1, abs=1e-12)
    assert len(leaves[0]["bob_bloch_vector"]) == 3


def test_run_replay_and_seed_dependence(capsys):
    first = run(capsys, "run", "--adaptive-fraction", "0.5", "--depth", "8", "--seed", "7")[1]
    again = run(capsys, "run", "--adaptive-fraction", "0.5", "--depth", "8", "--seed", "7")[1]
    assert first == again
    histories = {records(run(capsys, "run", "--adaptive-fraction", "0.5", "--depth", "8", "--seed",
                                 str(s))[1])[-1]["history"] for s in range(64)}
    assert len(histories) > 1


def test_cost_summary(capsys):
    code, out, _ = run(capsys, "cost", "--depth", "4")
    rows = records(out)
    assert code == 0
    summary = rows[-1]["summary"]
    assert summary["flags"] == [] and summary["strictly_increasing"]
    assert summary["comm_total"] < summary["comm_bound"]
    assert rows[0]["c_k"] == pytest.approx(0.08335, abs=5e-5)


def test_memory_with_full_slots(capsys):
    code, out, _ = run(capsys, "memory", "--depth", "3", "--slots", "64")
    assert code == 0
    assert all(r["bits_erased"] == 0 for r in records(out)[:-1])


def test_out_file(capsys, tmp_path):
    target = tmp_path / "table.csv"
    code, out, _ = run(capsys, "table", "--depth", "2", "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    text = target.read_text()
    assert text.endswith("\n") and len(text.splitlines()) == 4


@pytest.mark.parametrize("backend", ["auto", "numpy"])
def test_workers_identical(capsys, backend):
    outputs = {run(capsys, "tree", "--adaptive-fraction", "0.5", "--depth", "5", "--workers", w,
                   "--backend", backend)[1] for w in ("1", "3")}
    assert len(outputs) == 1
