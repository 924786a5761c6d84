import csv
import io
from types import SimpleNamespace

import pytest

from parcma.cli import (
    CONVERGENCE_HEADER,
    RUN_HEADER,
    SWEEP_HEADER,
    main,
)
from parcma.errors import DegenerateCovariance


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# ----------------------------------------------------------------------- run


def test_run_writes_generation_log(capsys):
    assert main(["run", "--dim", "3", "--max-evals", "140", "--seed", "1"]) == 0
    out, err = capsys.readouterr()
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(RUN_HEADER)
    rows = read_csv(out)
    assert len(rows) == 20  # popsize 7 at dim 3 -> 20 full generations
    gens = [int(r["generation"]) for r in rows]
    assert gens == list(range(1, 21))
    evals = [int(r["evals"]) for r in rows]
    assert all(b > a for a, b in zip(evals, evals[1:]))
    best = [float(r["best_f_so_far"]) for r in rows]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert "final f=" in err and "sphere dim=3" in err


def test_run_cells_round_trip_through_repr(capsys):
    main(["run", "--dim", "2", "--max-evals", "60", "--seed", "0"])
    out, _ = capsys.readouterr()
    for row in read_csv(out):
        for key in ("best_f_gen", "best_f_so_far", "sigma", "cond_C", "wall_ms"):
            assert repr(float(row[key])) == row[key]


def test_run_output_file_keeps_stdout_clean(tmp_path, capsys):
    target = tmp_path / "log.csv"
    assert main(
        ["run", "--dim", "2", "--max-evals", "60", "--output", str(target)]
    ) == 0
    out, err = capsys.readouterr()
    assert out == ""
    assert err != ""
    assert target.read_text().splitlines()[0] == ",".join(RUN_HEADER)


def strip_wall_column(text):
    return [line.rsplit(",", 1)[0] for line in text.strip().splitlines()]


def test_run_is_reproducible_apart_from_wall_clock(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "--dim", "4", "--max-evals", "200", "--seed", "5"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert strip_wall_column(a.read_text()) == strip_wall_column(b.read_text())


def test_run_target_f_stops_early(capsys):
    main(["run", "--dim", "3", "--max-evals", "5000", "--target-f", "1e10"])
    out, _ = capsys.readouterr()
    assert len(read_csv(out)) == 1


def test_run_explicit_x0_and_sigma0(capsys):
    rc = main(
        ["run", "--dim", "2", "--max-evals", "60", "--x0", "3.0,-2.0", "--sigma0", "0.5"]
    )
    assert rc == 0


def test_step_size_rule_flag_changes_the_log(capsys):
    main(["run", "--dim", "3", "--max-evals", "140", "--seed", "2"])
    clamped, _ = capsys.readouterr()
    main(
        [
            "run",
            "--dim",
            "3",
            "--max-evals",
            "140",
            "--seed",
            "2",
            "--step-size-rule",
            "expected-norm",
        ]
    )
    norm, _ = capsys.readouterr()
    sig_a = [r["sigma"] for r in read_csv(clamped)]
    sig_b = [r["sigma"] for r in read_csv(norm)]
    assert sig_a != sig_b


# ----------------------------------------------------------------- exit codes


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["run", "--problem", "unheard-of"],
        ["run", "--sigma0", "-2"],
        ["run", "--sigma0", "soon"],
        ["run", "--step-size-rule", "bogus"],
        ["convergence", "--seeds", "a,b"],
    ],
)
def test_flag_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 1


def test_budget_below_one_population_is_usage_error(capsys):
    assert main(["run", "--dim", "10", "--max-evals", "5"]) == 1
    assert "error" in capsys.readouterr().err


def test_bad_dimension_is_usage_error(capsys):
    assert main(["run", "--dim", "0", "--max-evals", "100"]) == 1


def test_x0_dimension_mismatch_is_usage_error(capsys):
    assert main(["run", "--dim", "3", "--max-evals", "100", "--x0", "1,2"]) == 1


def test_zero_workers_is_usage_error(capsys):
    assert main(["run", "--dim", "2", "--max-evals", "60", "--workers", "0"]) == 1


def test_runtime_failures_exit_2(monkeypatch, capsys):
    def explode(*args, **kwargs):
        raise DegenerateCovariance("covariance fell apart")

    monkeypatch.setattr("parcma.cli.run", explode)
    assert main(["run", "--dim", "2", "--max-evals", "60"]) == 2
    assert "covariance fell apart" in capsys.readouterr().err


# ------------------------------------------------------------------- workers


def test_workers_env_default(monkeypatch, capsys):
    monkeypatch.setenv("PARCMA_WORKERS", "2")
    assert main(["run", "--dim", "2", "--max-evals", "60"]) == 0
    capsys.readouterr()
    monkeypatch.setenv("PARCMA_WORKERS", "0")
    assert main(["run", "--dim", "2", "--max-evals", "60"]) == 1
    monkeypatch.setenv("PARCMA_WORKERS", "money")
    assert main(["run", "--dim", "2", "--max-evals", "60"]) == 1


def test_worker_count_leaves_csv_unchanged(tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
    base = ["run", "--dim", "3", "--max-evals", "140", "--seed", "3"]
    assert main(base + ["--workers", "1", "--output", str(a)]) == 0
    assert main(base + ["--workers", "2", "--output", str(b)]) == 0
    assert strip_wall_column(a.read_text()) == strip_wall_column(b.read_text())


# --------------------------------------------------------------- convergence


def test_convergence_summary_rows(capsys):
    rc = main(
        ["convergence", "--dim", "2", "--max-evals", "60", "--seeds", "1,2,3"]
    )
    assert rc == 0
    out, _ = capsys.readouterr()
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(CONVERGENCE_HEADER)
    rows = read_csv(out)
    assert [r["seed"] for r in rows] == ["1", "2", "3", "median", "min", "max"]
    per_seed = [float(r["best_f"]) for r in rows[:3]]
    labeled = {r["seed"]: float(r["best_f"]) for r in rows[3:]}
    assert labeled["min"] == min(per_seed)
    assert labeled["max"] == max(per_seed)
    assert labeled["median"] == sorted(per_seed)[1]


def test_convergence_single_seed_collapses_summary(capsys):
    main(["convergence", "--dim", "2", "--max-evals", "60", "--seeds", "9"])
    rows = read_csv(capsys.readouterr()[0])
    values = {r["seed"]: r["best_f"] for r in rows}
    assert values["median"] == values["min"] == values["max"] == values["9"]


def test_convergence_repeated_seed_repeats_value(capsys):
    main(["convergence", "--dim", "2", "--max-evals", "60", "--seeds", "4,4"])
    rows = read_csv(capsys.readouterr()[0])
    assert rows[0]["best_f"] == rows[1]["best_f"]


# --------------------------------------------------------------------- sweep


def test_sweep_reports_ratios(capsys):
    rc = main(
        [
            "sweep",
            "--dim",
            "3",
            "--max-evals",
            "35",
            "--workers-list",
            "1,2",
            "--work-units",
            "0",
        ]
    )
    assert rc == 0
    out, _ = capsys.readouterr()
    assert out.splitlines()[0] == ",".join(SWEEP_HEADER)
    rows = read_csv(out)
    assert [int(r["workers"]) for r in rows] == [1, 2]
    assert float(rows[0]["speedup"]) == 1.0
    assert float(rows[0]["efficiency"]) == 1.0
    assert rows[0]["final_f"] == rows[1]["final_f"]
    p2 = rows[1]
    assert float(p2["efficiency"]) == pytest.approx(float(p2["speedup"]) / 2, rel=1e-12)


def test_sweep_requires_serial_baseline(capsys):
    rc = main(
        ["sweep", "--dim", "2", "--max-evals", "30", "--workers-list", "2,4"]
    )
    assert rc == 1
    assert "baseline" in capsys.readouterr().err


def test_sweep_rejects_negative_work_units(capsys):
    rc = main(
        [
            "sweep",
            "--dim",
            "2",
            "--max-evals",
            "30",
            "--workers-list",
            "1",
            "--work-units",
            "-5",
        ]
    )
    assert rc == 1


def test_sweep_result_drift_is_runtime_failure(monkeypatch, capsys):
    finals = iter([1.0, 2.0])

    def fake_run_once(objective, config, *, seed=None, workers=None):
        return SimpleNamespace(f=next(finals))

    monkeypatch.setattr("parcma.cli._run_once", fake_run_once)
    rc = main(
        [
            "sweep",
            "--dim",
            "2",
            "--max-evals",
            "30",
            "--workers-list",
            "1,2",
            "--work-units",
            "0",
        ]
    )
    assert rc == 2
    out, err = capsys.readouterr()
    assert out == ""  # no CSV when the check fails
    assert "diverged" in err
