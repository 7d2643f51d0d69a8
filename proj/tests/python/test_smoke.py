import json
import os
import pathlib
import subprocess

import jsonschema
import numpy as np
import pytest

import conas

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = pathlib.Path(os.environ.get("CONAS_SCHEMAS", ROOT / "schemas"))
CLI = os.environ.get("CONAS_CLI")


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def validate(doc, name):
    jsonschema.Draft202012Validator(schema(name)).validate(doc)


def test_edge_counts_and_count_report():
    assert conas.edge_count(7, 5, 2) == 140
    assert conas.edge_count(5, 5, 2) == 50
    assert conas.edge_count(4, 1, 1) == 2
    report = conas.count({"nodes": 7})
    validate(report, "count")
    assert report["configurations_approx"] == "1.2e33"
    assert report["darts_configurations_approx"] == "6.1e21"


def test_exact_transform_of_python_callable():
    g = conas.exact_transform(3, lambda a: 2.0 * a[0] * a[2] - 0.5)
    assert g == pytest.approx({(): -0.5, (0, 2): 2.0})
    plant = conas.make_planted(8, 5, 2, seed=3)
    back = conas.exact_transform(8, lambda a: conas.expansion_eval(8, plant, a))
    assert back.keys() == plant.keys()
    for s, c in plant.items():
        assert back[s] == pytest.approx(c, abs=1e-12)


def test_restriction_and_minimizer():
    g = {(0,): 1.0, (1, 3): -2.0}
    h = conas.restrict_expansion(4, g, {1: 1})
    assert h == {(0,): 1.0, (2,): -2.0}
    assignment, value = conas.minimize_over_support(4, g)
    assert assignment == {0: -1, 1: -1, 3: -1}
    assert value == -3.0


def test_sampling_and_lasso_recover_a_plant():
    n, s = 12, 4
    plant = conas.make_planted(n, s, 2, seed=5)
    enc = conas.sample_encodings(n, 0.5, 150, 9)
    assert enc.shape == (150, n)
    assert set(np.unique(enc)) <= {-1, 1}
    a = conas.sampling_matrix(enc.tolist(), 2)
    assert a.shape == (150, conas.parity_count(n, 2))
    y = [conas.expansion_eval(n, plant, row) for row in enc.tolist()]
    sol = conas.lasso_solve(a, y, lam=0.01)
    assert sol["converged"] and sol["kkt_residual"] < 1e-6
    parities = [tuple(p) for p in conas.enumerate_parities(n, 2)]
    top = np.argsort(-np.abs(sol["coefficients"]), kind="stable")[:s]
    assert {parities[k] for k in top} == set(plant)


def test_run_search_outputs_validate_and_repeat(tmp_path):
    cfg = json.loads((ROOT / "configs" / "search_cnn.json").read_text())
    cfg.update(stages=2, m=200)
    first = conas.run("search", cfg, tmp_path / "a")
    conas.run("search", cfg, tmp_path / "b")
    for name in ("search_result.json", "cell.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    validate(first, "search_result")
    validate(json.loads((tmp_path / "a" / "cell.json").read_text()), "cell")
    assert len(first["final_encoding"]) == 140
    other = conas.run("search", cfg, tmp_path / "c", seed=99)
    assert other["seed"] == 99


def test_run_dft_and_phase(tmp_path):
    g = conas.run("dft", {"oracle": {"kind": "parity", "n": 4, "indices": [1, 3]}}, tmp_path)
    validate(g, "expansion")
    assert g == {"n": 4, "terms": [{"s": [1, 3], "c": 1.0}]}
    rows = conas.run("phase", {"lambda": 1e-6, "phase": {"m_grid": [56], "trials": 3, "n": 10, "sparsity": 3}},
                     tmp_path)
    assert [r["support_recovered"] for r in rows] == [True, True, True]
    header = (tmp_path / "phase.csv").read_text().splitlines()[0]
    assert header == "m,trial,support_recovered,coefficient_error,kkt_residual,converged"


def test_config_errors():
    with pytest.raises(conas.ConfigError):
        conas.run("search", {"lamda": 1.0}, "/tmp/conas_smoke_bad")
    with pytest.raises(ValueError):
        conas.run("search", {"stages": 0}, "/tmp/conas_smoke_bad")


def test_shipped_configs_validate():
    for path in sorted((ROOT / "configs").glob("*.json")):
        validate(json.loads(path.read_text()), "config")


@pytest.mark.skipif(not CLI, reason="CONAS_CLI not set")
def test_cli(tmp_path):
    out = subprocess.run([CLI, "count", "--nodes", "7", "--json"], capture_output=True, text=True, check=True)
    validate(json.loads(out.stdout), "count")

    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"seed": 1, "stages": 2, "m": 100, "sparsity": 4,
                               "oracle": {"kind": "planted", "n": 20, "sparsity": 5}}))
    for sub in ("a", "b"):
        subprocess.run([CLI, "stages", "--config", str(cfg), "--out", str(tmp_path / sub)], check=True,
                       capture_output=True)
    assert (tmp_path / "a" / "stages.csv").read_bytes() == (tmp_path / "b" / "stages.csv").read_bytes()

    cfg.write_text(json.dumps({"stages": 0}))
    bad = subprocess.run([CLI, "search", "--config", str(cfg), "--out", str(tmp_path)], capture_output=True)
    assert bad.returncode == 2

    env = dict(os.environ, CONAS_THREADS="2")
    cfg.write_text(json.dumps({"seed": 1, "stages": 1, "m": 50, "oracle": {"kind": "planted", "n": 10, "sparsity": 3}}))
    subprocess.run([CLI, "search", "--config", str(cfg), "--out", str(tmp_path / "t2")], check=True, env=env,
                   capture_output=True)
    subprocess.run([CLI, "search", "--config", str(cfg), "--out", str(tmp_path / "t1")], check=True,
                   capture_output=True, env=dict(os.environ, CONAS_THREADS="1"))
    assert (tmp_path / "t1" / "search_result.json").read_bytes() == (tmp_path / "t2" / "search_result.json").read_bytes()
