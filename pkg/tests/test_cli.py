import json
import math
import subprocess
import sys

import numpy as np
import pytest
from click.testing import CliRunner

from hytet.cli import main, run
from samples import random_lengths

ONES = "1,1,1,1,1,1"
GOLDEN_UNIT = 0.09059792537536435
EUCLID = ",".join([repr(math.acos(1 / 3))] * 6)


@pytest.fixture
def cli():
    runner = CliRunner()

    def invoke(*args, **kw):
        return runner.invoke(main, list(args), catch_exceptions=False, **kw)
    return invoke


def test_vol_plain(cli):
    r = cli("vol", "--lengths", ONES)
    assert r.exit_code == 0
    lines = r.stdout.strip().splitlines()
    assert len(lines) == 1
    assert float(lines[0]) == pytest.approx(GOLDEN_UNIT, abs=1e-11)
    assert lines[0] == "0.090597925378"


def test_vol_json_schema(cli):
    r = cli("vol", "--lengths", ONES, "--json")
    out = json.loads(r.stdout)
    assert set(out) == {"volume", "shape", "method", "z_minus", "z_plus", "residues", "partials", "diagnostics"}
    assert out["shape"] == "Hyperbolic"
    assert out["method"] == "lengths"
    assert len(out["z_minus"]) == 2 and len(out["partials"]) == 6
    assert out["z_minus"][0] == out["z_plus"][0] and out["z_minus"][1] == -out["z_plus"][1]
    assert all(isinstance(k, int) for k in out["residues"])
    assert out["volume"] == pytest.approx(GOLDEN_UNIT, abs=1e-11)


def test_vol_angles_euclidean(cli):
    r = cli("vol", "--angles", EUCLID, "--json")
    out = json.loads(r.stdout)
    assert out["shape"] == "Euclidean"
    assert out["volume"] == 0.0
    assert out["partials"] is None
    assert cli("vol", "--angles", EUCLID).stdout.strip() == "0.000000000000"


def test_vol_rounded_euclidean_angles(cli):
    # 1.2309594 sits 2e-8 inside the hyperbolic side, outside the flatness tolerance
    out = json.loads(cli("vol", "--angles", ",".join(["1.2309594"] * 6), "--json").stdout)
    assert out["shape"] == "Hyperbolic"
    assert 0 < out["volume"] < 1e-10


def test_convert(cli):
    r = cli("convert", "--lengths", ONES)
    vals = [float(x) for x in r.stdout.strip().split(",")]
    assert vals == pytest.approx([math.acos(math.cosh(1) / (2 * math.cosh(1) + 1))] * 6, abs=1e-12)
    back = cli("convert", "--angles", r.stdout.strip(), "--json")
    out = json.loads(back.stdout)
    assert out["kind"] == "lengths"
    assert out["values"] == pytest.approx([1.0] * 6, abs=1e-9)


@pytest.mark.parametrize("args", [
    ("vol", "--lengths", "1,1,1"),
    ("vol", "--lengths", "1,1,1,1,1,x"),
    ("vol", "--lengths", "1,1,1,1,1,nan"),
    ("vol",),
    ("vol", "--lengths", ONES, "--angles", ONES),
    ("frobnicate",),
])
def test_malformed_input_exit_2(cli, args):
    r = cli(*args)
    assert r.exit_code == 2
    assert r.stdout == ""


@pytest.mark.parametrize("args", [
    ("vol", "--lengths", "1,1,1,1,1,9"),
    ("vol", "--angles", "0.3,0.3,0.3,0.3,0.3,0.3"),
    ("vol", "--lengths", "1,1,1,1,1,-1"),
    ("convert", "--angles", "1.5708,1.5708,1.5708,1.5708,1.5708,1.5708"),
])
def test_unrealizable_exit_3(cli, args):
    r = cli(*args)
    assert r.exit_code == 3
    assert r.stdout == ""
    assert r.stderr.strip()


def test_numerical_failure_exit_4(cli):
    # so close to ideal that a Li2 argument rounds onto the branch point
    r = cli("vol", "--angles", ",".join([repr(math.pi / 3 + 1e-6)] * 6))
    assert r.exit_code == 4
    assert r.stdout == ""
    assert "EvaluationError" in r.stderr


def test_oracle_command(cli):
    r = cli("oracle", "--lengths", ONES, "--rel-tol", "1e-9", "--json")
    out = json.loads(r.stdout)
    assert out["volume"] == pytest.approx(GOLDEN_UNIT, abs=1e-9)
    assert out["cells"] > 1
    assert cli("oracle", "--lengths", ONES, "--rel-tol", "1e-20").exit_code == 2


def test_check_passes(cli):
    r = cli("check", "--lengths", "1,1.2,0.9,1.1,1,1.3")
    assert r.exit_code == 0
    rows = r.stdout.strip().splitlines()
    assert len(rows) == 10
    assert all(row.endswith("PASS") for row in rows)


def test_check_honors_env_tolerance(cli):
    r = cli("check", "--lengths", ONES, env={"HYTET_TOL": "1e-14"})
    assert r.exit_code == 4
    failing = [row for row in r.stdout.splitlines() if row.endswith("FAIL")]
    assert [row.split()[0] for row in failing] == ["oracle"]


# --- batch -----------------------------------------------------------------------


def write_csv(path, rows):
    path.write_text("kind,v1,v2,v3,v4,v5,v6\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))


def test_batch_empty(cli, tmp_path):
    f = tmp_path / "empty.jsonl"
    f.write_text("")
    r = cli("batch", "--input", str(f), "--format", "jsonl")
    assert r.exit_code == 0 and r.stdout == ""


def test_batch_unreadable(cli, tmp_path):
    r = cli("batch", "--input", str(tmp_path / "missing.csv"), "--format", "csv")
    assert r.exit_code == 2 and r.stdout == ""


def test_batch_bad_header(cli, tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("a,b\n1,2\n")
    assert cli("batch", "--input", str(f), "--format", "csv").exit_code == 2


def test_batch_isolates_bad_rows(cli, tmp_path):
    rows = [["lengths", *l] for l in random_lengths(9, seed=1)]
    rows.insert(4, ["lengths", 1, 1, "oops", 1, 1, 1])
    f = tmp_path / "in.csv"
    write_csv(f, rows)
    r = cli("batch", "--input", str(f), "--format", "csv")
    assert r.exit_code == 0
    lines = r.stdout.strip().splitlines()
    assert lines[0] == "index,kind,volume,shape,error"
    body = [line.split(",", 4) for line in lines[1:]]
    assert [int(b[0]) for b in body] == list(range(10))
    assert [b[4] == "" for b in body] == [i != 4 for i in range(10)]


def test_batch_jsonl_errors_embedded(cli, tmp_path):
    recs = [
        {"kind": "lengths", "values": [1] * 6},
        {"kind": "angles", "values": [math.pi / 2] * 6},
        {"kind": "lengths", "values": [1, 1, 1, 1, 1, 9]},
        {"kind": "volume", "values": [1] * 6},
    ]
    f = tmp_path / "in.jsonl"
    f.write_text("\n".join(json.dumps(r) for r in recs) + "\nnot json\n")
    out = [json.loads(line) for line in cli("batch", "--input", str(f), "--format", "jsonl").stdout.splitlines()]
    assert len(out) == 5
    assert out[0]["volume"] == pytest.approx(GOLDEN_UNIT, abs=1e-11)
    assert out[1]["shape"] == "Spherical"
    assert out[2]["error"]["type"] == "RealizabilityError" and out[2]["error"]["exit_code"] == 3
    assert out[3]["error"]["exit_code"] == 2
    assert out[4]["error"]["type"] == "ValueError"


def test_batch_thousand_rows_deterministic_and_ordered(cli, tmp_path):
    rng = np.random.default_rng(0)
    rows = [["lengths", *map(repr, rng.uniform(0.3, 2.5, 6))] for _ in range(1000)]
    f = tmp_path / "big.csv"
    write_csv(f, rows)
    first = cli("batch", "--input", str(f), "--format", "csv").stdout
    second = cli("batch", "--input", str(f), "--format", "csv").stdout
    parallel = cli("batch", "--input", str(f), "--format", "csv", "--jobs", "4").stdout
    assert first == second == parallel
    assert len(first.strip().splitlines()) == 1001


def test_run_helper_and_entry_point():
    assert run(["vol", "--lengths", ONES]) == 0
    assert run(["vol", "--lengths", "1,2"]) == 2
    done = subprocess.run([sys.executable, "-m", "hytet", "vol", "--lengths", ONES],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0
    assert done.stdout.strip() == "0.090597925378"
