"""Greedy randomized adaptive search over consecutive clusterings of categorical predictors.

Each pass clusters the eligible predictors one at a time. At every step
all (predictor, feasible clustering) candidates of the predictors not yet
clustered are scored by the out-of-sample payoff of a GLM in which the
already-committed predictors and the candidate predictor are reduced and
everything else stays one-hot. One of the top-ranked candidates is drawn
at random and committed. ``m`` independent passes are run and the best
fully clustered model is kept; all of them feed the proximity measure.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .clustering import (
    CategoryOrdering,
    Clustering,
    default_ordering,
    feasible_clusterings,
    one_hot_columns,
    apply_clustering,
    build_design,
)
from .data import BINARY, Dataset, Schema
from .glm import INTERCEPT, Column, DesignMatrix, Family, FitConfig, FittedGlm, ccr, fit_irls, payoff, predict_mean, rmse

log = logging.getLogger(__name__)

_VALIDATION_STREAM = 0x56414C  # keeps the validation shuffle apart from the per-repeat streams


def family_for(schema: Schema) -> Family:
    return Family.BERNOULLI_LOGIT if schema.response_type == BINARY else Family.POISSON_LOG


def rcl_rule(category_counts: Sequence[int]) -> int:
    """Top-3 when some remaining predictor has more than five categories, else top-2."""
    return 3 if max(category_counts) > 5 else 2


@dataclass(frozen=True)
class GraspConfig:
    m: int = 100
    k_prime: int = 2
    rcl_size: int | None = None
    seed: int = 0
    payoff_split: float = 0.25
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.k_prime < 2:
            raise ValueError("k_prime must be at least 2")
        if self.rcl_size is not None and self.rcl_size < 1:
            raise ValueError("rcl_size must be at least 1")
        if not 0.0 <= self.payoff_split < 1.0:
            raise ValueError("payoff_split must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {"m": self.m, "k_prime": self.k_prime, "rcl_size": self.rcl_size, "seed": self.seed,
                "payoff_split": self.payoff_split}


@dataclass(frozen=True, eq=False)
class IterationResult:
    repeat: int
    clusterings: Mapping[str, Clustering]
    payoff: float
    model: FittedGlm
    commit_order: tuple[str, ...] = ()
    candidates_per_step: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class GraspOutput:
    best: IterationResult
    all_iterations: tuple[IterationResult, ...]
    orderings: Mapping[str, CategoryOrdering]
    eligible: tuple[str, ...]
    config: GraspConfig
    test_metrics: Mapping[str, float] | None = None


def eligible_predictors(schema: Schema, k_prime: int) -> tuple[str, ...]:
    """Categorical predictors with more than ``k_prime`` categories, in schema order."""
    names = tuple(p.name for p in schema.categorical if p.n_categories > k_prime)
    if not names:
        raise ValueError(
            f"no categorical predictor has more than {k_prime} categories; "
            "there is nothing to cluster, fit the one-hot GLM instead"
        )
    return names


def _validation_rows(n_rows: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    n_val = int(np.floor(fraction * n_rows + 0.5))
    if n_val == 0 or n_val == n_rows:
        raise ValueError(f"payoff_split {fraction} leaves an empty fit or validation part of {n_rows} rows")
    perm = np.random.default_rng([seed, _VALIDATION_STREAM]).permutation(n_rows)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


class GraspProblem:
    """Everything a pass needs: fit/validation data, orderings, candidates and a payoff cache.

    Payoffs are memoised on the full set of reduced predictors, which is
    what determines the design; evaluation is pure, so the cache never
    changes results.
    """

    def __init__(self, fit_data: Dataset, validation: Dataset, config: GraspConfig,
                 full_train: Dataset | None = None,
                 orderings: Mapping[str, CategoryOrdering] | None = None):
        self.schema = fit_data.schema
        self.config = config
        self.family = family_for(self.schema)
        self.fit_data = fit_data
        self.validation = validation
        self.full_train = full_train if full_train is not None else fit_data
        self.eligible = eligible_predictors(self.schema, config.k_prime)
        self._cat_index = {p.name: j for j, p in enumerate(self.schema.categorical)}

        if orderings is None:
            one_hot = None
            if any(self.schema.predictor(n).kind == "nominal" for n in self.eligible):
                one_hot = fit_irls(build_design(fit_data), fit_data.y, self.family, config.fit)
            orderings = {n: default_ordering(self.schema.predictor(n), one_hot) for n in self.eligible}
        self.orderings = dict(orderings)
        self.candidates = {n: feasible_clusterings(self.orderings[n], config.k_prime) for n in self.eligible}

        self._parts = {"fit": fit_data, "validation": validation, "train": self.full_train}
        self._one_hot = {part: [one_hot_columns(d.codes[:, j], spec) for j, spec in enumerate(self.schema.categorical)]
                         for part, d in self._parts.items()}
        self._reduced: dict[tuple[str, str, int], tuple[np.ndarray, list[Column]]] = {}
        self._payoffs: dict[tuple, float] = {}
        self._models: dict[tuple, FittedGlm] = {}
        self.n_fits = 0

    def _block(self, part: str, name: str, idx: int):
        key = (part, name, idx)
        if key not in self._reduced:
            codes = self._parts[part].codes[:, self._cat_index[name]]
            self._reduced[key] = apply_clustering(codes, self.orderings[name], self.candidates[name][idx])
        return self._reduced[key]

    def design(self, part: str, state: Mapping[str, int]) -> DesignMatrix:
        """Design for ``part`` with predictors in ``state`` reduced by their candidate index."""
        data = self._parts[part]
        blocks = [np.ones((data.n_rows, 1))]
        columns: list[Column] = [INTERCEPT]
        for j, spec in enumerate(self.schema.categorical):
            if spec.name in state:
                block, cols = self._block(part, spec.name, state[spec.name])
            else:
                block, cols = self._one_hot[part][j]
            blocks.append(block)
            columns.extend(cols)
        blocks.append(data.continuous)
        columns.extend(Column("continuous", p.name) for p in self.schema.continuous)
        return DesignMatrix(tuple(columns), np.hstack(blocks))

    @staticmethod
    def _key(state: Mapping[str, int]) -> tuple:
        return tuple(sorted(state.items()))

    def evaluate(self, state: Mapping[str, int], name: str, idx: int) -> float:
        """Validation payoff with ``name`` reduced by candidate ``idx`` on top of ``state``."""
        if name in state:
            raise ValueError(f"{name!r} is already clustered in this state")
        full = dict(state)
        full[name] = idx
        key = self._key(full)
        if key not in self._payoffs:
            self._payoffs[key] = self._score(full)
        return self._payoffs[key]

    def _score(self, state: Mapping[str, int]) -> float:
        self.n_fits += 1
        try:
            model = fit_irls(self.design("fit", state), self.fit_data.y, self.family, self.config.fit)
            mu = predict_mean(model, self.design("validation", state))
            value = payoff(self.family, mu, self.validation.y)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            log.warning("candidate %s failed to fit: %s", dict(state), exc)
            return -math.inf
        return value if np.isfinite(value) else -math.inf

    def final_model(self, state: Mapping[str, int]) -> FittedGlm:
        key = self._key(state)
        if key not in self._models:
            self._models[key] = fit_irls(self.design("train", state), self.full_train.y, self.family,
                                         self.config.fit)
        return self._models[key]

    def clusterings(self, state: Mapping[str, int]) -> dict[str, Clustering]:
        return {n: self.candidates[n][state[n]] for n in self.eligible if n in state}


def evaluate_candidate(problem: GraspProblem, state: Mapping[str, Clustering], name: str,
                       clustering: Clustering) -> float:
    """Payoff of reducing ``name`` by ``clustering`` given already-committed clusterings."""
    def index_of(n, c):
        try:
            return problem.candidates[n].index(c)
        except (KeyError, ValueError):
            raise ValueError(f"{c} is not a feasible clustering of {n!r} under this problem's ordering") from None
    idx_state = {n: index_of(n, c) for n, c in state.items()}
    return problem.evaluate(idx_state, name, index_of(name, clustering))


def repeat_rng(seed: int, repeat_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, repeat_index])


def grasp_single_pass(problem: GraspProblem, repeat_index: int = 0,
                      rng: np.random.Generator | None = None) -> IterationResult:
    config = problem.config
    rng = repeat_rng(config.seed, repeat_index) if rng is None else rng
    position = {n: k for k, n in enumerate(problem.eligible)}
    state: dict[str, int] = {}
    remaining = list(problem.eligible)
    commit_order = []
    per_step = []
    last_payoff = -math.inf
    while remaining:
        scored = []
        for name in remaining:
            for idx in range(len(problem.candidates[name])):
                scored.append((problem.evaluate(state, name, idx), position[name], idx, name))
        per_step.append(len(scored))
        scored.sort(key=lambda t: (-t[0], t[1], t[2]))
        if config.rcl_size is not None:
            r = config.rcl_size
        else:
            r = rcl_rule([len(problem.orderings[n].order) for n in remaining])
        value, _, idx, name = scored[int(rng.integers(min(r, len(scored))))]
        state[name] = idx
        remaining.remove(name)
        commit_order.append(name)
        last_payoff = value
    return IterationResult(
        repeat=repeat_index,
        clusterings=problem.clusterings(state),
        payoff=last_payoff,
        model=problem.final_model(state),
        commit_order=tuple(commit_order),
        candidates_per_step=tuple(per_step),
    )


def prepare_problem(train: Dataset, config: GraspConfig, test: Dataset | None = None) -> GraspProblem:
    if config.payoff_split == 0.0:
        if test is None:
            raise ValueError("payoff_split=0 scores candidates on the test sample, which was not given")
        return GraspProblem(train, test, config, full_train=train)
    fit_rows, val_rows = _validation_rows(train.n_rows, config.payoff_split, config.seed)
    return GraspProblem(train.take(fit_rows), train.take(val_rows), config, full_train=train)


def holdout_scores(model: FittedGlm, test: Dataset, clusterings: Mapping[str, Clustering] | None = None) -> dict:
    mu = predict_mean(model, build_design(test, clusterings))
    if model.family is Family.BERNOULLI_LOGIT:
        return {"ccr": ccr(mu, test.y)}
    return {"rmse": rmse(mu, test.y)}


def grasp_run(train: Dataset, config: GraspConfig = GraspConfig(), test: Dataset | None = None) -> GraspOutput:
    """Run ``config.m`` passes and keep the best by validation payoff (ties: earliest repeat).

    ``test`` is only used to report the chosen model's metrics, except when
    ``config.payoff_split`` is 0, in which case it also scores candidates.
    """
    problem = prepare_problem(train, config, test)
    iterations = []
    for i in range(config.m):
        try:
            iterations.append(grasp_single_pass(problem, i))
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            log.warning("GRASP repeat %d failed: %s", i, exc)
    if not iterations:
        raise RuntimeError(f"all {config.m} GRASP repeats failed; see the logged diagnostics")
    best = iterations[0]
    for it in iterations[1:]:
        if it.payoff > best.payoff:
            best = it
    metrics = holdout_scores(best.model, test, best.clusterings) if test is not None else None
    log.info("GRASP: %d repeats, %d distinct fits, best payoff %.4f", len(iterations), problem.n_fits, best.payoff)
    return GraspOutput(
        best=best,
        all_iterations=tuple(iterations),
        orderings=problem.orderings,
        eligible=problem.eligible,
        config=config,
        test_metrics=metrics,
    )


def output_to_dict(output: GraspOutput, schema: Schema) -> dict:
    """JSON-ready record of a run: best model, per-repeat clusterings and payoffs, seeds."""
    def clusterings(it):
        return {n: c.to_dict(schema.predictor(n)) for n, c in it.clusterings.items()}
    return {
        "config": output.config.to_dict(),
        "eligible": list(output.eligible),
        "orderings": {n: o.labels(schema.predictor(n)) for n, o in output.orderings.items()},
        "best": {
            "repeat": output.best.repeat,
            "payoff": output.best.payoff,
            "clusterings": clusterings(output.best),
            "model": output.best.model.to_dict(),
        },
        "test_metrics": dict(output.test_metrics) if output.test_metrics is not None else None,
        "repeats": [
            {"repeat": it.repeat, "seed": [output.config.seed, it.repeat], "payoff": it.payoff,
             "commit_order": list(it.commit_order), "clusterings": clusterings(it)}
            for it in output.all_iterations
        ],
    }
