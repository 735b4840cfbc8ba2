from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from catcluster import cli, glm, grasp
from catcluster.proximity import compute_proximity
from catcluster.data import Dataset, PredictorSpec, Schema, load_csv, load_schema

ROOT = Path(__file__).resolve().parents[1]
DATASETS = ROOT / "datasets"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the large-dataset reproductions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


# every converged unridged fit made anywhere in the suite, as (n_rows, score_residual)
FIT_LOG: list[tuple[int, float]] = []


@pytest.fixture(autouse=True)
def score_equations_hold_for_every_fit(monkeypatch):
    """Wrap the fit finaliser so each converged unridged fit is checked against the score equations."""
    seen: list[tuple[int, float]] = []
    original = glm._finish

    def checked(design, y, family, beta, converged, iters, ridge, flags, path):
        model = original(design, y, family, beta, converged, iters, ridge, flags, path)
        if model.converged and model.ridge == 0.0 and "degenerate_response" not in model.flags:
            seen.append((design.n_rows, model.score_residual))
        return model

    monkeypatch.setattr(glm, "_finish", checked)
    yield
    FIT_LOG.extend(seen)
    bad = [(n, r) for n, r in seen if r > glm.score_bound(n)]
    assert not bad, f"{len(bad)} converged fits violate the score equations, e.g. {bad[:3]}"


def check_proximity(output) -> None:
    """Symmetry, unit diagonal and exact multiples of 1/m for every eligible predictor of a run."""
    m = len(output.all_iterations)
    for name in output.eligible:
        prox = compute_proximity(output.all_iterations, name)
        v = prox.values
        assert np.array_equal(v, v.T), name
        assert np.all(np.diag(v) == 1.0), name
        assert prox.m == m and np.isin(v, np.arange(m + 1) / m).all(), name
        assert np.all((prox.counts >= 0) & (prox.counts <= m)), name


GRASP_RUNS = 0


@pytest.fixture(autouse=True)
def proximity_holds_for_every_grasp_run(monkeypatch):
    original = grasp.grasp_run

    def checked(*args, **kwargs):
        global GRASP_RUNS
        out = original(*args, **kwargs)
        check_proximity(out)
        GRASP_RUNS += 1
        return out

    monkeypatch.setattr(grasp, "grasp_run", checked)
    monkeypatch.setattr(cli, "grasp_run", checked)


def load_bundled(name: str) -> Dataset:
    return load_csv(DATASETS / name / "data.csv", load_schema(DATASETS / name / "schema.json"))


@pytest.fixture(scope="session")
def german():
    return load_bundled("german")


@pytest.fixture(scope="session")
def car():
    return load_bundled("car_evaluation")


@pytest.fixture(scope="session")
def solar():
    return load_bundled("solar")


def synthetic(n=600, seed=0, effects=((0.0, 1.5, 1.5, -1.5, 0.5), (0.0, -1.0, 1.0, 0.0)),
              kinds=("nominal", "ordinal"), slope=0.8, family="binary") -> Dataset:
    """Categorical predictors with the given per-category effects plus one continuous predictor."""
    rng = np.random.default_rng(seed)
    preds, codes = [], []
    eta = np.full(n, -0.2 if family == "binary" else 0.3)
    for j, (eff, kind) in enumerate(zip(effects, kinds)):
        k = len(eff)
        preds.append(PredictorSpec(f"x{j}", kind, tuple("abcdefghijklmnop"[:k])))
        c = rng.integers(0, k, n)
        codes.append(c)
        eta = eta + np.asarray(eff)[c]
    x = rng.normal(size=n)
    eta = eta + slope * x
    preds.append(PredictorSpec("z", "continuous"))
    if family == "binary":
        y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
        schema = Schema(tuple(preds), "y", "binary")
    else:
        y = rng.poisson(np.exp(eta))
        schema = Schema(tuple(preds), "y", "count")
    return Dataset(schema, np.column_stack(codes), x[:, None], y)


# criterion id -> (passed, detail); filled by the acceptance tests, printed at the end of the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not any(ACCEPTANCE.values()) and not FIT_LOG:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: [int(p) if p.isdigit() else p for p in k.replace(".", " ").split()]):
        if ACCEPTANCE[key] is None:
            tr.write_line(f"SKIP  criterion {key}: not run in this session (slow ones need --runslow)")
            continue
        ok, detail = ACCEPTANCE[key]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
    if FIT_LOG:
        worst = max(r / glm.score_bound(n) for n, r in FIT_LOG)
        ok = worst <= 1.0
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  suite-wide score equations: {len(FIT_LOG)} converged unridged fits, "
                      f"worst |X'(y-mu)|_inf / (sqrt(N)*1e-6) = {worst:.3g}")
    if GRASP_RUNS:
        tr.write_line(f"INFO  suite-wide proximity invariants checked on {GRASP_RUNS} GRASP runs "
                      "(a violation fails the test that made the run)")
