"""Bernoulli-logit and Poisson-log GLMs fitted by IRLS, plus CCR / RMSE."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
from scipy.special import expit, xlogy

RANK_RIDGE = 1e-8
SEPARATION_RIDGE = 1e-4
PROB_CLIP = 1e-10
_MAX_HALVINGS = 40
_ETA_MAX = 700.0


class FitError(RuntimeError):
    pass


class Family(str, Enum):
    BERNOULLI_LOGIT = "bernoulli_logit"
    POISSON_LOG = "poisson_log"

    def mean(self, eta: np.ndarray) -> np.ndarray:
        if self is Family.BERNOULLI_LOGIT:
            return expit(eta)
        return np.exp(np.minimum(eta, _ETA_MAX))

    def variance(self, mu: np.ndarray) -> np.ndarray:
        if self is Family.BERNOULLI_LOGIT:
            return mu * (1.0 - mu)
        return mu

    def deviance(self, y: np.ndarray, eta: np.ndarray) -> float:
        """Twice the log-likelihood gap to the saturated model, computed from eta."""
        if self is Family.BERNOULLI_LOGIT:
            # saturated log-likelihood is 0 for 0/1 data
            return float(2.0 * np.sum(np.logaddexp(0.0, eta) - y * eta))
        mu = np.exp(np.minimum(eta, _ETA_MAX))
        return float(2.0 * np.sum(xlogy(y, y) - y * eta - y + mu))

    def loglik(self, y: np.ndarray, eta: np.ndarray) -> float:
        if self is Family.BERNOULLI_LOGIT:
            return float(np.sum(y * eta - np.logaddexp(0.0, eta)))
        # drops the -log(y!) constant
        return float(np.sum(y * eta - np.exp(np.minimum(eta, _ETA_MAX))))

    def initial_intercept(self, y: np.ndarray) -> float:
        ybar = float(np.mean(y))
        if self is Family.BERNOULLI_LOGIT:
            p = min(max(ybar, 1e-3), 1.0 - 1e-3)
            return math.log(p / (1.0 - p))
        return math.log(max(ybar, 1e-3))

    def check_support(self, y: np.ndarray) -> None:
        if self is Family.BERNOULLI_LOGIT:
            if not np.isin(y, (0.0, 1.0)).all():
                raise ValueError("bernoulli_logit needs a 0/1 response")
        elif (y < 0).any() or not np.all(np.mod(y, 1) == 0):
            raise ValueError("poisson_log needs non-negative integer counts")


class Column(NamedTuple):
    """Provenance of one design column: intercept, dummy(predictor, group) or continuous(predictor)."""

    kind: str
    predictor: str | None = None
    group: str | None = None

    def __str__(self) -> str:
        if self.kind == "intercept":
            return "intercept"
        if self.kind == "dummy":
            return f"{self.predictor}[{self.group}]"
        return self.predictor

    def to_json(self) -> dict:
        return {k: v for k, v in self._asdict().items() if v is not None}

    @classmethod
    def from_json(cls, obj: dict) -> Column:
        return cls(obj["kind"], obj.get("predictor"), obj.get("group"))


INTERCEPT = Column("intercept")


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    columns: tuple[Column, ...]
    values: np.ndarray

    def __post_init__(self):
        cols = tuple(self.columns)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(cols):
            raise ValueError(f"values shape {values.shape} does not match {len(cols)} column descriptors")
        if len(set(cols)) != len(cols):
            raise ValueError("column descriptors must be unique")
        icpt = [k for k, c in enumerate(cols) if c.kind == "intercept"]
        if len(icpt) != 1:
            raise ValueError("design needs exactly one intercept column")
        if not np.all(values[:, icpt[0]] == 1.0):
            raise ValueError("intercept column must be all ones")
        dummies = [k for k, c in enumerate(cols) if c.kind == "dummy"]
        if dummies and not np.isin(values[:, dummies], (0.0, 1.0)).all():
            raise ValueError("dummy columns must be 0/1")
        values.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 100
    tolerance: float = 1e-8
    ridge: float = 0.0
    divergence_guard: float = 1e4

    def __post_init__(self):
        if self.max_iterations < 1 or self.tolerance <= 0 or self.ridge < 0 or self.divergence_guard <= 0:
            raise ValueError(f"invalid FitConfig {self}")


@dataclass(frozen=True, eq=False)
class FittedGlm:
    columns: tuple[Column, ...]
    coefficients: np.ndarray
    family: Family
    converged: bool
    n_iterations: int
    deviance: float
    ridge: float = 0.0
    flags: tuple[str, ...] = ()
    score_residual: float = field(default=float("nan"))
    deviance_path: tuple[float, ...] = ()

    def coefficient(self, column: Column) -> float:
        return float(self.coefficients[self.columns.index(column)])

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "columns": [c.to_json() for c in self.columns],
            "coefficients": [float(b) for b in self.coefficients],
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "deviance": self.deviance,
            "ridge": self.ridge,
            "flags": list(self.flags),
            "score_residual": self.score_residual,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> FittedGlm:
        return cls(
            columns=tuple(Column.from_json(c) for c in obj["columns"]),
            coefficients=np.array(obj["coefficients"], dtype=float),
            family=Family(obj["family"]),
            converged=bool(obj["converged"]),
            n_iterations=int(obj["n_iterations"]),
            deviance=float(obj["deviance"]),
            ridge=float(obj.get("ridge", 0.0)),
            flags=tuple(obj.get("flags", ())),
            score_residual=float(obj.get("score_residual", float("nan"))),
        )


def _rank_deficient(X: np.ndarray) -> bool:
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    if np.any(norms == 0.0):
        return True
    Xs = X / norms
    gram = Xs.T @ Xs
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return True
    return bool(np.min(np.diag(L)) ** 2 < 1e-10)


def _newton_step(X, w, grad, ridge):
    H = (X.T * w) @ X
    if ridge:
        H[np.diag_indices_from(H)] += ridge
    # symmetric Jacobi scaling: columns can differ in scale by many orders of magnitude
    d = np.sqrt(np.diag(H))
    d[d == 0.0] = 1.0
    Hs = H / d[:, None] / d[None, :]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            return scipy.linalg.solve(Hs, grad / d, assume_a="pos", check_finite=False) / d
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        return np.linalg.lstsq(Hs, grad / d, rcond=None)[0] / d


def _score_ok(X, y, family, beta, ridge) -> bool:
    grad = X.T @ (y - family.mean(X @ beta)) - ridge * beta
    return bool(np.max(np.abs(grad)) <= score_bound(X.shape[0]))


def _irls(X, y, family, config, ridge):
    """One IRLS run; returns (beta, converged, iterations, diverged, objective path)."""
    p = X.shape[1]
    beta = np.zeros(p)
    beta[0] = family.initial_intercept(y)
    eta = X @ beta
    obj = family.deviance(y, eta) + ridge * beta @ beta
    path = [obj]
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        mu = family.mean(eta)
        w = np.maximum(family.variance(mu), 1e-300)
        grad = X.T @ (y - mu) - ridge * beta
        step = _newton_step(X, w, grad, ridge)
        t = 1.0
        for _ in range(_MAX_HALVINGS):
            cand = beta + t * step
            eta_c = X @ cand
            obj_c = family.deviance(y, eta_c) + ridge * cand @ cand
            if np.isfinite(obj_c) and obj_c <= obj * (1 + 1e-12) + 1e-12:
                break
            t *= 0.5
        else:
            # no decrease along the Newton direction: at the optimum up to rounding, if the score agrees
            converged = _score_ok(X, y, family, beta, ridge)
            break
        change = abs(obj - obj_c) / (abs(obj_c) + 0.1)
        beta, eta, obj = cand, eta_c, obj_c
        path.append(obj)
        if np.linalg.norm(beta) > config.divergence_guard:
            return beta, False, it, True, path
        # a small deviance change alone can stop early when column scales differ widely
        if change < config.tolerance and _score_ok(X, y, family, beta, ridge):
            converged = True
            break
    return beta, converged, it, False, path


def _check_design(design: DesignMatrix) -> int:
    cols = design.columns
    if cols[0] != INTERCEPT:
        raise ValueError("the intercept must be the first design column")
    return len(cols)


def fit_irls(design: DesignMatrix, y: np.ndarray, family: Family, config: FitConfig = FitConfig()) -> FittedGlm:
    """Maximum-likelihood GLM fit by Fisher scoring (canonical links).

    Deviance never increases between accepted iterations: a Newton step that
    would raise it is halved until it does not. A rank-deficient design gets
    a ``1e-8`` ridge and the ``rank_deficient`` flag; a coefficient norm above
    ``config.divergence_guard`` (typically separation) triggers one refit with
    a ``1e-4`` ridge and the ``separation`` flag.
    """
    X = design.values
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n == 0:
        raise FitError("cannot fit a GLM on zero rows")
    if len(y) != n:
        raise ValueError(f"design has {n} rows but response has {len(y)}")
    _check_design(design)
    family.check_support(y)

    flags: list[str] = []
    ridge = config.ridge
    if family is Family.BERNOULLI_LOGIT and X.shape[1] == 1 and np.all(y == y[0]):
        beta = np.array([family.initial_intercept(y)])
        return _finish(design, y, family, beta, True, 0, ridge, ("degenerate_response",), ())

    if _rank_deficient(X):
        ridge = max(ridge, RANK_RIDGE)
        flags.append("rank_deficient")
    beta, converged, iters, diverged, path = _irls(X, y, family, config, ridge)
    if diverged:
        flags.append("separation")
        ridge = max(ridge, SEPARATION_RIDGE)
        beta, converged, more, diverged, path = _irls(X, y, family, config, ridge)
        iters += more
        if diverged:
            converged = False
    return _finish(design, y, family, beta, converged, iters, ridge, tuple(flags), tuple(path))


def score_vector(design: DesignMatrix, y: np.ndarray, family: Family, beta: np.ndarray) -> np.ndarray:
    """Gradient of the log-likelihood, ``X^T (y - mu)`` for canonical links."""
    X = design.values
    return X.T @ (np.asarray(y, dtype=float) - family.mean(X @ beta))


def _finish(design, y, family, beta, converged, iters, ridge, flags, path):
    eta = design.values @ beta
    mu = family.mean(eta)
    score = float(np.max(np.abs(design.values.T @ (y - mu))))
    return FittedGlm(
        columns=design.columns,
        coefficients=beta,
        family=family,
        converged=bool(converged),
        n_iterations=int(iters),
        deviance=max(family.deviance(y, eta), 0.0),
        ridge=float(ridge),
        flags=flags,
        score_residual=score,
        deviance_path=path,
    )


def score_bound(n_rows: int) -> float:
    """Tolerance on ``max |X^T (y - mu)|`` accepted for a converged fit."""
    return math.sqrt(n_rows) * 1e-6


def score_equations_hold(model: FittedGlm, n_rows: int) -> bool:
    return model.score_residual <= score_bound(n_rows)


def _aligned(model: FittedGlm, design: DesignMatrix) -> None:
    if tuple(design.columns) == model.columns:
        return
    have, want = set(design.columns), set(model.columns)
    extra = sorted(str(c) for c in have - want)
    lacking = sorted(str(c) for c in want - have)
    detail = f"unexpected {extra}, missing {lacking}" if (extra or lacking) else "same columns in a different order"
    raise ValueError(f"design columns do not match the model: {detail}")


def linear_predictor(model: FittedGlm, design: DesignMatrix) -> np.ndarray:
    _aligned(model, design)
    return design.values @ model.coefficients


def predict_mean(model: FittedGlm, design: DesignMatrix) -> np.ndarray:
    mu = model.family.mean(linear_predictor(model, design))
    if model.family is Family.BERNOULLI_LOGIT:
        mu = np.clip(mu, PROB_CLIP, 1.0 - PROB_CLIP)
    return mu


def ccr(predicted_means: Sequence[float], y: Sequence[float]) -> float:
    """Correct classification rate at threshold 0.5; a mean of exactly 0.5 predicts 1."""
    p = np.asarray(predicted_means, dtype=float)
    y = np.asarray(y, dtype=float)
    if p.size == 0:
        raise ValueError("ccr of an empty sample")
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {y.shape}")
    return float(np.mean((p >= 0.5) == (y == 1.0)))


def rmse(predicted_means: Sequence[float], y: Sequence[float]) -> float:
    p = np.asarray(predicted_means, dtype=float)
    y = np.asarray(y, dtype=float)
    if p.size == 0:
        raise ValueError("rmse of an empty sample")
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {y.shape}")
    return float(np.sqrt(np.mean((p - y) ** 2)))


def payoff(family: Family, predicted_means: np.ndarray, y: np.ndarray) -> float:
    """Score to maximise: CCR for binary responses, negative RMSE for counts."""
    if family is Family.BERNOULLI_LOGIT:
        return ccr(predicted_means, y)
    return -rmse(predicted_means, y)
