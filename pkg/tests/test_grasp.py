import math

import numpy as np
import pytest

from catcluster import grasp
from catcluster.clustering import Clustering, build_design, feasible_clusterings, order_natural
from catcluster.data import Dataset, PredictorSpec, Schema, SplitPlan, split
from catcluster.glm import Family, fit_irls, payoff, predict_mean
from catcluster.grasp import (
    GraspConfig,
    GraspProblem,
    eligible_predictors,
    evaluate_candidate,
    grasp_single_pass,
    prepare_problem,
    rcl_rule,
)

from conftest import synthetic

LETTERS = "abcdefghijklmnop"


def cat_schema(ks, kinds=None, continuous=0, response="binary"):
    kinds = kinds or ["ordinal"] * len(ks)
    preds = tuple(PredictorSpec(f"p{i}", kind, tuple(LETTERS[:k])) for i, (k, kind) in enumerate(zip(ks, kinds)))
    preds += tuple(PredictorSpec(f"z{i}", "continuous") for i in range(continuous))
    return Schema(preds, "y", response)


def test_eligibility():
    assert eligible_predictors(cat_schema([5, 2, 3]), 2) == ("p0", "p2")
    assert eligible_predictors(cat_schema([3, 5, 4, 4, 3, 3, 3]), 2) == tuple(f"p{i}" for i in range(7))
    assert eligible_predictors(cat_schema([5, 4]), 4) == ("p0",)
    with pytest.raises(ValueError, match="nothing to cluster"):
        eligible_predictors(cat_schema([2, 2]), 2)


def test_rcl_rule():
    assert rcl_rule([6, 3]) == 3
    assert rcl_rule([5, 4]) == 2


def test_config_validation():
    for bad in [dict(m=0), dict(k_prime=1), dict(rcl_size=0), dict(payoff_split=1.0), dict(payoff_split=-0.1)]:
        with pytest.raises(ValueError):
            GraspConfig(**bad)


@pytest.fixture(scope="module")
def problem():
    data = synthetic(n=800, seed=1)
    return prepare_problem(data, GraspConfig(m=5, seed=7))


def test_all_in_one_payoff_equals_removal(problem):
    spec = problem.schema.predictor("x0")
    all_in_one = problem.candidates["x0"][-1]
    assert all_in_one.n_clusters == 1
    got = evaluate_candidate(problem, {}, "x0", all_in_one)
    fit_part, val = problem.fit_data.drop_predictor("x0"), problem.validation.drop_predictor("x0")
    model = fit_irls(build_design(fit_part), fit_part.y, Family.BERNOULLI_LOGIT)
    assert got == payoff(Family.BERNOULLI_LOGIT, predict_mean(model, build_design(val)), val.y)
    assert spec.n_categories == len(problem.candidates["x0"])


def test_identical_designs_give_identical_payoffs(problem):
    c = problem.candidates["x1"][1]
    same = Clustering(c.predictor, c.k_prime, c.order, c.assignment)
    fits = problem.n_fits
    a = evaluate_candidate(problem, {}, "x1", c)
    b = evaluate_candidate(problem, {}, "x1", same)
    assert a == b and problem.n_fits <= fits + 1


def test_infeasible_candidate_rejected(problem):
    with pytest.raises(ValueError, match="not a feasible clustering"):
        evaluate_candidate(problem, {}, "x1", Clustering("x1", 2, (3, 2, 1, 0), (0, 0, 1, 1)))


def test_separable_candidate_scores_one():
    # category a or b -> y = 1, c or d -> y = 0
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 4, 400)
    y = (codes < 2).astype(int)
    data = Dataset(cat_schema([4]), codes[:, None], np.empty((400, 0)), y)
    problem = prepare_problem(data, GraspConfig(m=1))
    split_two = Clustering("p0", 2, (0, 1, 2, 3), (0, 0, 1, 1))
    assert evaluate_candidate(problem, {}, "p0", split_two) == 1.0


def test_one_eligible_predictor_one_commit():
    data = Dataset(cat_schema([4, 2]), np.random.default_rng(1).integers(0, 2, (300, 2)) * [2, 1],
                   np.empty((300, 0)), np.random.default_rng(2).integers(0, 2, 300))
    problem = prepare_problem(data, GraspConfig(m=1, seed=3))
    it = grasp_single_pass(problem)
    assert it.candidates_per_step == (4,)
    assert it.commit_order == ("p0",) and set(it.clusterings) == {"p0"}


def test_candidate_counts_per_step():
    data = synthetic(n=600, seed=4, effects=((0.0, 1.0, -1.0, 0.5), (0.0, 0.5, 1.0, 1.5, -0.5)),
                     kinds=("ordinal", "ordinal"))
    problem = prepare_problem(data, GraspConfig(m=1, seed=5))
    it = grasp_single_pass(problem)
    first = it.commit_order[0]
    remaining = {"x0": 4, "x1": 5}
    assert it.candidates_per_step == (9, remaining[{"x0": "x1", "x1": "x0"}[first]])


def _replay(problem, it):
    """Recompute each step's ranked list and the committed candidate's rank."""
    position = {n: k for k, n in enumerate(problem.eligible)}
    state, ranks = {}, []
    remaining = list(problem.eligible)
    for name in it.commit_order:
        scored = sorted(((problem.evaluate(state, n, i), position[n], i, n) for n in remaining
                         for i in range(len(problem.candidates[n]))), key=lambda t: (-t[0], t[1], t[2]))
        idx = problem.candidates[name].index(it.clusterings[name])
        ranks.append((scored, (problem.evaluate(state, name, idx), position[name], idx, name)))
        state[name] = idx
        remaining.remove(name)
    return ranks


def test_pass_invariants():
    data = synthetic(n=900, seed=6, effects=((0.0, 1.2, -0.4, 0.8, 0.1, -1.0, 0.3), (0.0, 0.5, 1.0, 1.5),
                                             (0.0, -1.0, 0.0, 1.0, 0.0)),
                     kinds=("nominal", "ordinal", "nominal"))
    config = GraspConfig(m=6, seed=11)
    out = grasp.grasp_run(data, config)
    problem = prepare_problem(data, config)
    for it in out.all_iterations:
        assert sorted(it.commit_order) == sorted(out.eligible)
        assert set(it.clusterings) == set(out.eligible)
        remaining = list(out.eligible)
        for scored, chosen in _replay(problem, it):
            r = rcl_rule([len(problem.orderings[n].order) for n in remaining])
            assert chosen in scored[:r]
            if len(scored) > r:
                assert chosen[0] >= scored[r][0]
            remaining.remove(chosen[3])
        n_dummies = sum(1 for c in it.model.columns if c.kind == "dummy")
        assert n_dummies == sum(c.n_clusters - 1 for c in it.clusterings.values())
        assert it.payoff == _replay(problem, it)[-1][1][0]


def test_rcl_one_is_greedy_and_repeats_agree():
    data = synthetic(n=700, seed=8)
    out = grasp.grasp_run(data, GraspConfig(m=4, rcl_size=1, seed=2))
    problem = prepare_problem(data, GraspConfig(m=4, rcl_size=1, seed=2))
    first = out.all_iterations[0]
    for it in out.all_iterations:
        assert it.clusterings == first.clusterings
        assert it.payoff == first.payoff
    assert out.best.payoff == first.payoff
    for scored, chosen in _replay(problem, first):
        assert chosen == scored[0]


def test_m_one_equals_single_pass():
    data = synthetic(n=500, seed=12)
    config = GraspConfig(m=1, seed=4)
    out = grasp.grasp_run(data, config)
    single = grasp_single_pass(prepare_problem(data, config), 0)
    assert out.best.clusterings == single.clusterings
    assert out.best.payoff == single.payoff
    assert np.array_equal(out.best.model.coefficients, single.model.coefficients)


def test_same_seed_same_output_and_best_is_max():
    data = synthetic(n=600, seed=13)
    config = GraspConfig(m=8, seed=21)
    a = grasp.grasp_run(data, config)
    b = grasp.grasp_run(data, config)
    assert [it.clusterings for it in a.all_iterations] == [it.clusterings for it in b.all_iterations]
    assert [it.payoff for it in a.all_iterations] == [it.payoff for it in b.all_iterations]
    payoffs = [it.payoff for it in a.all_iterations]
    assert a.best.payoff == max(payoffs)
    assert a.best.repeat == payoffs.index(max(payoffs))


def test_poisson_payoff_is_negative_rmse():
    data = synthetic(n=600, seed=14, family="count")
    train, test = split(data, SplitPlan(), 0)
    out = grasp.grasp_run(train, GraspConfig(m=3, seed=1), test)
    assert out.best.payoff < 0
    assert set(out.test_metrics) == {"rmse"}
    assert out.best.model.family is Family.POISSON_LOG


def test_payoff_on_test_requires_test():
    data = synthetic(n=300)
    with pytest.raises(ValueError, match="test sample"):
        prepare_problem(data, GraspConfig(payoff_split=0.0))
    train, test = split(data, SplitPlan(), 0)
    problem = prepare_problem(train, GraspConfig(payoff_split=0.0), test)
    assert problem.validation is test and problem.fit_data is train


def test_nominal_ordering_follows_fit_part_coefficients(problem):
    one_hot = fit_irls(build_design(problem.fit_data), problem.fit_data.y, Family.BERNOULLI_LOGIT)
    spec = problem.schema.predictor("x0")
    values = [0.0] + [one_hot.coefficient(c) for c in one_hot.columns if c.predictor == "x0"]
    assert list(problem.orderings["x0"].order) == list(np.argsort(values, kind="stable"))
    assert problem.orderings["x1"] == order_natural(problem.schema.predictor("x1"))
    assert len(spec.categories) == 5


def test_constant_categorical_predictor_has_no_effect():
    # p1 always takes its first category; clustering it cannot change any prediction
    rng = np.random.default_rng(15)
    n = 800
    c0 = rng.integers(0, 5, n)
    x = rng.normal(size=n)
    eta = np.array([0.0, 1.5, 1.5, -1.5, 0.5])[c0] + 0.8 * x
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
    schema = Schema((PredictorSpec("p0", "ordinal", tuple("abcde")), PredictorSpec("p1", "ordinal", tuple("abcd")),
                     PredictorSpec("z", "continuous")), "y", "binary")
    data = Dataset(schema, np.column_stack([c0, np.zeros(n, dtype=int)]), x[:, None], y)
    train, test = split(data, SplitPlan(), 0)
    out = grasp.grasp_run(train, GraspConfig(m=10, seed=3), test)

    dropped_train, dropped_test = train.drop_predictor("p1"), test.drop_predictor("p1")
    ref = fit_irls(build_design(dropped_train, {"p0": out.best.clusterings["p0"]}), dropped_train.y,
                   Family.BERNOULLI_LOGIT)
    ref_mu = predict_mean(ref, build_design(dropped_test, {"p0": out.best.clusterings["p0"]}))
    mu = predict_mean(out.best.model, build_design(test, out.best.clusterings))
    assert np.max(np.abs(mu - ref_mu)) < 1e-6
    assert out.test_metrics["ccr"] == pytest.approx(float(np.mean((ref_mu >= 0.5) == (test.y == 1))))
    # every candidate for p1 scores the same as dropping it
    problem = prepare_problem(train, GraspConfig(m=1, seed=3))
    scores = {problem.evaluate({}, "p1", i) for i in range(len(problem.candidates["p1"]))}
    assert len(scores) == 1


def test_output_to_dict_is_json_ready():
    import json

    data = synthetic(n=400, seed=16)
    out = grasp.grasp_run(data, GraspConfig(m=2, seed=1))
    d = grasp.output_to_dict(out, data.schema)
    text = json.dumps(d, sort_keys=True)
    assert json.loads(text)["repeats"][1]["seed"] == [1, 1]
    assert d["best"]["clusterings"]["x1"]["order"] == ["a", "b", "c", "d"]
    assert math.isfinite(d["best"]["payoff"])
