import csv
import json
import math
import os

import pytest

import tml.cli as cli
from tml.gluing import InvariantReport


def run(tmp_path, *argv, base=None):
    """Invoke the CLI into tmp_path; returns (exit code, rows, manifest)."""
    code = cli.main([*argv, "--output-dir", str(tmp_path)])
    name = base or argv[0]
    rows = None
    table = tmp_path / f"{name}.csv"
    if table.exists():
        with open(table, newline="") as fh:
            rows = list(csv.DictReader(fh))
    manifest = None
    mpath = tmp_path / f"{name}.manifest.json"
    if mpath.exists():
        manifest = json.loads(mpath.read_text())
    return code, rows, manifest


def test_trace_exact_small(tmp_path):
    code, rows, manifest = run(
        tmp_path, "trace-exact", "--dist", "skew12", "--n", "3", "--s", "2"
    )
    assert code == 0
    assert len(rows) == 1
    row = rows[0]
    assert row["route"] == "full"
    assert float(row["value"]) == pytest.approx(22.0, rel=1e-12)
    assert float(row["even_part"]) == pytest.approx(22.0, rel=1e-12)
    assert float(row["odd_part"]) == 0.0
    assert manifest["subcommand"] == "trace-exact"
    assert manifest["rng"] == "numpy-PCG64"
    assert manifest["output_files"] == ["trace-exact.csv"]
    assert manifest["build_id"]
    assert manifest["started"] <= manifest["finished"]


def test_trace_exact_patterns_route(tmp_path):
    code, rows, _ = run(
        tmp_path, "trace-exact", "--dist", "skew12", "--n", "200", "--s", "2"
    )
    assert code == 0
    assert rows[0]["route"] == "patterns"
    assert float(rows[0]["value"]) == pytest.approx(1598.0, rel=1e-12)


def test_trace_mc(tmp_path):
    code, rows, manifest = run(
        tmp_path,
        "trace-mc",
        "--dist", "skew12", "--n", "3", "--s", "2",
        "--trials", "400", "--seed", "5", "--threads", "2",
    )
    assert code == 0
    row = rows[0]
    mean, stderr = float(row["mean"]), float(row["stderr"])
    assert abs(mean - 22.0) <= 5 * stderr
    assert float(row["prediction"]) == pytest.approx(3 * 2 * 4.0)
    assert manifest["seed"] == 5
    assert manifest["parameters"]["trials"] == "400"


def test_spectrum(tmp_path):
    code, rows, _ = run(
        tmp_path, "spectrum", "--dist", "rademacher", "--n", "12", "--trials", "2"
    )
    assert code == 0
    assert len(rows) == 2
    for i, row in enumerate(rows):
        assert int(row["trial"]) == i
        assert float(row["lambda_max"]) <= float(row["spectral_norm"]) + 1e-9


def test_edge_exceed(tmp_path, capsys):
    code, rows, _ = run(
        tmp_path,
        "edge-exceed",
        "--dist", "rademacher", "--n", "40",
        "--trials", "3", "--epsilon", "0.05", "--seed", "2",
    )
    assert code == 0
    assert len(rows) == 3
    assert all(row["exceeded"] in ("0", "1") for row in rows)
    assert "exceed_fraction=" in capsys.readouterr().out


def test_concentration(tmp_path):
    code, rows, _ = run(
        tmp_path,
        "concentration",
        "--dist", "rademacher", "--n", "30", "--trials", "8",
        "--t-values", "1,3", "--seed", "3",
    )
    assert code == 0
    assert [float(r["t"]) for r in rows] == [1.0, 3.0]
    for row in rows:
        assert 0.0 <= float(row["empirical_fraction"]) <= 1.0
        assert float(row["bound"]) == pytest.approx(
            min(1.0, 4.0 * math.exp(-float(row["t"]) ** 2 / 32.0))
        )


def test_verify_gluing(tmp_path, capsys):
    code, rows, _ = run(tmp_path, "verify-gluing", "--n", "2", "--s", "2")
    assert code == 0
    assert "0 violations" in capsys.readouterr().out
    assert sum(int(r["count"]) for r in rows) == 16
    assert set(rows[0]) == {
        "odd_pairs", "run_count", "walk_count", "cycle_count", "outcome", "count"
    }


def test_verify_gluing_failure_exits_2(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        return InvariantReport(
            walks_checked=1,
            violations=((("length-bookkeeping"), (1, 1)),),
            histogram={(0, 0, 1, 0, "single-even"): 1},
        )

    monkeypatch.setattr(cli, "run_invariant_suite", broken)
    code, _, _ = run(tmp_path, "verify-gluing", "--n", "2", "--s", "1")
    assert code == 2


def test_dyck_stats_exact_values(tmp_path):
    code, rows, _ = run(tmp_path, "dyck-stats", "--s", "1")
    assert code == 0
    assert rows[0]["functional"] == "windows"
    assert float(rows[0]["value"]) == 3.0


def test_dyck_stats_out_name(tmp_path):
    code, rows, _ = run(
        tmp_path,
        "dyck-stats", "--s", "4", "--functional", "stay", "--out", "stay",
        base="stay",
    )
    assert code == 0
    assert float(rows[0]["value"]) == pytest.approx(36.0 / 14.0, rel=1e-12)


def test_dyck_stats_beta(tmp_path):
    code, rows, _ = run(
        tmp_path, "dyck-stats", "--s", "1", "--functional", "beta",
        "--tensor-order", "1",
    )
    assert code == 0
    assert float(rows[0]["value"]) == pytest.approx(math.pi, abs=1e-12)


def test_dyck_stats_maxlevel(tmp_path):
    code, rows, _ = run(
        tmp_path, "dyck-stats", "--s", "6", "--functional", "maxlevel",
        "--trials", "300",
    )
    assert code == 0
    plain = [r for r in rows if r["parameter"] not in ("fit_c1", "fit_c2")]
    assert sum(float(r["value"]) for r in plain) == pytest.approx(1.0, abs=1e-9)


def test_bounds_table(tmp_path):
    code, rows, _ = run(tmp_path, "bounds-table", "--s", "12", "--n", "100000")
    assert code == 0
    families = {r["family"] for r in rows}
    assert {
        "single-walk", "multi-walk", "single-walk-excess-ratio",
        "multi-walk-excess-ratio", "cycle-refined-sum", "mixed-trivial-ratio",
        "mixed-refined-ratio", "typed-vertex-log", "distance-two-log",
        "catalan-convolution-ratio", "power-sum-ratio",
        "catalan-convolution-verified",
    } <= families
    verified = [r for r in rows if r["family"] == "catalan-convolution-verified"]
    assert verified[0]["value"] == "1"


def test_json_format(tmp_path):
    code = cli.main([
        "trace-exact", "--dist", "rademacher", "--n", "2", "--s", "2",
        "--format", "json", "--output-dir", str(tmp_path),
    ])
    assert code == 0
    payload = json.loads((tmp_path / "trace-exact.json").read_text())
    assert isinstance(payload, list) and len(payload) == 1
    assert payload[0]["n"] == 2
    # 12 even closed paths of length 4 on 2 vertices, over n^2 = 4
    assert payload[0]["value"] == pytest.approx(3.0)
    manifest = json.loads((tmp_path / "trace-exact.manifest.json").read_text())
    assert manifest["output_files"] == ["trace-exact.json"]


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("TML_OUTPUT_DIR", str(tmp_path / "env_out"))
    code = cli.main(["dyck-stats", "--s", "2"])
    assert code == 0
    assert (tmp_path / "env_out" / "dyck-stats.csv").exists()


def test_usage_errors_exit_1(tmp_path):
    assert cli.main([]) == 1                          # no subcommand
    assert cli.main(["no-such-command"]) == 1
    assert cli.main(["trace-exact", "--dist", "rademacher"]) == 1  # missing args
    code = cli.main([
        "trace-exact", "--dist", "not-a-law", "--n", "2", "--s", "1",
        "--output-dir", str(tmp_path),
    ])
    assert code == 1
    code = cli.main([
        "trace-exact", "--dist", "rademacher", "--n", "30", "--s", "9",
        "--route", "full", "--output-dir", str(tmp_path),
    ])
    assert code == 1  # enumeration guard trips inside the handler


def test_rerun_is_byte_identical(tmp_path):
    args = ["dyck-stats", "--s", "5", "--functional", "windows"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert cli.main([*args, "--output-dir", str(a)]) == 0
    assert cli.main([*args, "--output-dir", str(b)]) == 0
    assert (a / "dyck-stats.csv").read_bytes() == (b / "dyck-stats.csv").read_bytes()


def test_csv_float_format_round_trips(tmp_path):
    code, rows, _ = run(
        tmp_path, "trace-exact", "--dist", "skew12", "--n", "3", "--s", "3"
    )
    assert code == 0
    # %.17g keeps doubles exactly
    assert float(rows[0]["value"]) == 102.44444444444444
