import json

import numpy as np
import pytest

from helpers import nullspace_intersection, random_instance
from splitproj import to_dict
from splitproj.cli import (
    CSV_HEADER,
    ExperimentRecord,
    default_lambda_grid,
    exp1,
    exp2,
    exp2_counts,
    exp3,
    load_problem,
    lower_median,
    main,
    records_to_csv,
    records_to_json,
    run_single,
)

SMALL_GRID = [0.3, 0.5, 0.7, 0.9]


def write_problem(path, **overrides):
    x_basis = {"d": 2, "basis": [[1.0, 0.0]]}
    diag_basis = {"d": 2, "basis": [[1.0, 1.0]]}
    data = {
        "algorithm": "ryu",
        "d": 2,
        "subspaces": [x_basis, diag_basis, x_basis],
        "lambda": 0.5,
        "start": [[3.0, 4.0], [1.0, -2.0]],
    }
    data.update(overrides)
    path.write_text(json.dumps(data))
    return str(path)


def test_default_grid_matches_protocol():
    grid = default_lambda_grid()
    assert len(grid) == 99
    assert grid[0] == pytest.approx(0.01) and grid[-1] == pytest.approx(0.99)


def test_lower_median():
    assert lower_median([3, 1, 2]) == 2
    assert lower_median([4, 1, 2, 3]) == 2


def test_record_validation():
    with pytest.raises(ValueError):
        ExperimentRecord("exp1", "ryu", 1.5, 0, "x", 0.0)
    with pytest.raises(ValueError):
        ExperimentRecord("exp1", "ryu", 0.5, 0, "x", float("nan"))


def test_csv_schema_and_float_precision():
    records = [ExperimentRecord("exp1", "ryu", 0.1 + 0.2, 7, "metric", 1.0 / 3.0)]
    text = records_to_csv(records)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "exp1,ryu,0.30000000000000004,7,metric,,0.33333333333333331"


def test_exp1_bounds_ordered_and_deterministic():
    kwargs = dict(n_instances=4, lambda_grid=[0.2, 0.5, 0.8], seed=3)
    first = records_to_csv(exp1(**kwargs))
    second = records_to_csv(exp1(**kwargs))
    parallel = records_to_csv(exp1(**kwargs, jobs=2))
    assert first == second == parallel
    by_key = {}
    for r in exp1(**kwargs):
        by_key.setdefault((r.algorithm, r.lam), {})[r.metric_name] = r.metric_value
    for metrics in by_key.values():
        assert metrics["mean_spectral_radius"] <= metrics["mean_operator_norm"]


def test_exp2_run_bookkeeping():
    counts = exp2_counts(n_sets=3, n_points=4, lambda_grid=[0.5], seed=1)
    for alg in ("ryu", "mt"):
        assert len(counts[(alg, 0.5)]) == 3 * 4
        for gov, sh in counts[(alg, 0.5)]:
            assert 0 <= gov <= 10_000 and 0 <= sh <= 10_000


def test_exp2_serial_equals_parallel():
    kwargs = dict(n_sets=4, n_points=3, lambda_grid=[0.5, 0.9], seed=2)
    assert records_to_csv(exp2(**kwargs)) == records_to_csv(exp2(**kwargs, jobs=2))


def test_exp3_trace_shape_and_qualitative_behavior():
    records = exp3(n_sets=5, n_points=4, lam=0.3, n_iters=150, seed=5)
    by = {}
    for r in records:
        assert r.metric_name == "median_shadow_distance"
        by.setdefault(r.algorithm, {})[r.iteration] = r.metric_value
    for alg in ("ryu", "mt"):
        vals = by[alg]
        assert set(vals) == set(range(1, 151))
        assert vals[150] < vals[1]
        logs = np.log([vals[i] for i in range(1, 151)])
        k = np.arange(1, 151, dtype=float)
        slope, intercept = np.polyfit(k, logs, 1)
        pred = slope * k + intercept
        r2 = 1.0 - np.sum((logs - pred) ** 2) / np.sum((logs - logs.mean()) ** 2)
        assert slope < 0 and r2 > 0.9
    assert by["ryu"][150] <= by["mt"][150]


def test_infeasible_dims_rejected():
    with pytest.raises(ValueError, match="ceil"):
        exp1(n_instances=1, d=6, dims=(4, 5, 5), lambda_grid=[0.5])


def test_run_single_trivial_intersection(tmp_path):
    path = write_problem(tmp_path / "problem.json")
    records = run_single(path)
    metrics = {r.metric_name: r.metric_value for r in records}
    assert metrics["converged"] == 1.0
    # x-axis cap diagonal cap x-axis is the origin
    assert abs(metrics["solution_0"]) <= 1e-6
    assert abs(metrics["solution_1"]) <= 1e-6
    assert metrics["rate_lower_bound"] <= metrics["rate_upper_bound"]


def test_run_single_start_at_fixed_point(tmp_path):
    eye_basis = {"d": 2, "basis": [[1.0, 0.0], [0.0, 1.0]]}
    path = write_problem(
        tmp_path / "fp.json",
        subspaces=[eye_basis, eye_basis, eye_basis],
        start=[[3.0, -1.0], [0.0, 0.0]],
    )
    records = run_single(path)
    metrics = {r.metric_name: r.metric_value for r in records}
    assert metrics["iterations"] == 0.0
    assert metrics["converged"] == 1.0
    assert metrics["solution_0"] == pytest.approx(3.0)
    assert metrics["solution_1"] == pytest.approx(-1.0)


def test_run_single_affine_translation(tmp_path):
    rng = np.random.default_rng(8)
    subs = random_instance(rng)
    v = rng.standard_normal(6)
    x0 = rng.standard_normal(6)
    data = {
        "algorithm": "ryu",
        "d": 6,
        "subspaces": [to_dict(s) for s in subs],
        "anchors": [v.tolist()] * 3,
        "lambda": 0.5,
        "start": [x0.tolist(), x0.tolist()],
    }
    path = tmp_path / "affine.json"
    path.write_text(json.dumps(data))
    records = run_single(str(path), tol=1e-8)
    metrics = {r.metric_name: r.metric_value for r in records}
    solution = np.array([metrics[f"solution_{i}"] for i in range(6)])
    pz = nullspace_intersection([s.projector for s in subs])
    want = v + pz @ (x0 - v)
    assert metrics["converged"] == 1.0
    assert np.linalg.norm(solution - want) <= 1e-6


def test_run_single_mt_problem(tmp_path):
    rng = np.random.default_rng(15)
    subs = random_instance(rng, dims=(5, 5, 5, 5))
    x0 = rng.standard_normal(6)
    data = {
        "algorithm": "mt",
        "d": 6,
        "subspaces": [to_dict(s) for s in subs],
        "lambda": 0.5,
        "start": [x0.tolist()] * 3,
    }
    path = tmp_path / "mt.json"
    path.write_text(json.dumps(data))
    records = run_single(str(path), tol=1e-8, max_iters=50_000)
    metrics = {r.metric_name: r.metric_value for r in records}
    solution = np.array([metrics[f"solution_{i}"] for i in range(6)])
    pz = nullspace_intersection([s.projector for s in subs])
    assert metrics["converged"] == 1.0
    assert np.linalg.norm(solution - pz @ x0) <= 1e-6


def test_run_single_trace_rows(tmp_path):
    path = write_problem(tmp_path / "problem.json")
    records = run_single(path, include_trace=True)
    names = {r.metric_name for r in records}
    assert "governing_distance" in names and "shadow_distance" in names
    gov = [r for r in records if r.metric_name == "governing_distance"]
    assert gov[0].iteration == 0
    assert all(r.iteration is not None for r in gov)


def test_main_writes_csv_and_json(tmp_path, capsys):
    path = write_problem(tmp_path / "problem.json")
    out = tmp_path / "rows.csv"
    assert main(["run", "--problem", path, "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert main(["run", "--problem", path, "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {row["metric_name"] for row in rows} >= {"iterations", "converged"}


def test_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--problem", str(bad)]) == 2
    assert "bad.json" in capsys.readouterr().err

    x_basis = {"d": 2, "basis": [[1.0, 0.0]]}
    inconsistent = write_problem(
        tmp_path / "inconsistent.json",
        subspaces=[x_basis, x_basis, x_basis],
        anchors=[[0.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
    )
    assert main(["run", "--problem", inconsistent]) == 4

    assert main(["exp1", "--n", "1", "--sub-dims", "4,5,5", "--lambda", "0.5"]) == 2
    err = capsys.readouterr().err
    assert "ceil" in err

    with pytest.raises(SystemExit) as exc:
        main(["exp1", "--no-such-flag"])
    assert exc.value.code == 2


def test_main_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    from splitproj.linalg import NumericalFailure
    import splitproj.cli as cli_mod

    path = write_problem(tmp_path / "p.json")

    def boom(*args, **kwargs):
        raise NumericalFailure("SVD did not converge for 2x2 matrix")

    monkeypatch.setattr(cli_mod, "run_single", boom)
    assert main(["run", "--problem", path]) == 3
    assert "converge" in capsys.readouterr().err


def test_main_exp_smoke(tmp_path):
    out = tmp_path / "e1.csv"
    code = main(["exp1", "--n", "2", "--lambda-grid", "0.2:0.3:0.8",
                 "--seed", "9", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    # 2 algorithms x 3 lambdas x 2 metrics + header
    assert len(lines) == 1 + 12


def test_json_records_roundtrip():
    records = exp1(n_instances=2, lambda_grid=[0.5], seed=4)
    rows = json.loads(records_to_json(records))
    assert len(rows) == len(records)
    assert rows[0]["experiment"] == "exp1"


def test_load_problem_validates_shapes(tmp_path):
    path = write_problem(tmp_path / "p.json", start=[[1.0, 2.0]])
    with pytest.raises(Exception, match="blocks"):
        load_problem(path)
