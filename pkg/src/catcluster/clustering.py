"""Category orderings, consecutive clusterings and the dummy encodings they induce."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .data import NOMINAL, ORDINAL, Dataset, PredictorSpec, Schema
from .glm import INTERCEPT, Column, DesignMatrix, FittedGlm


@dataclass(frozen=True)
class CategoryOrdering:
    """``order[i]`` is the index of the category placed at position ``i``."""

    predictor: str
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"{self.predictor}: {order} is not a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "order", order)

    def labels(self, spec: PredictorSpec) -> list[str]:
        return [spec.categories[i] for i in self.order]


@dataclass(frozen=True)
class Clustering:
    """Consecutive clustering of a predictor's ordered categories.

    ``assignment[i]`` is the cluster of the category at position ``i`` of
    ``order``. It is non-decreasing, starts at 0 and never skips an id, so
    the used ids are ``0..n_clusters-1``; trailing clusters up to
    ``k_prime`` may stay empty.
    """

    predictor: str
    k_prime: int
    order: tuple[int, ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        a = tuple(int(c) for c in self.assignment)
        if len(a) != len(order):
            raise ValueError(f"{self.predictor}: assignment length {len(a)} != {len(order)} categories")
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"{self.predictor}: order is not a permutation")
        if a and a[0] != 0:
            raise ValueError(f"{self.predictor}: first cluster id must be 0")
        if any(b - c not in (0, 1) for c, b in zip(a, a[1:])):
            raise ValueError(f"{self.predictor}: clusters must be consecutive runs with ids 0,1,2,...")
        if a and a[-1] >= self.k_prime:
            raise ValueError(f"{self.predictor}: {a[-1] + 1} clusters exceed k_prime={self.k_prime}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "assignment", a)

    @property
    def n_clusters(self) -> int:
        """Number of non-empty clusters."""
        return self.assignment[-1] + 1

    def cluster_of_category(self) -> np.ndarray:
        """Cluster id indexed by original category index."""
        out = np.empty(len(self.order), dtype=np.int64)
        out[list(self.order)] = self.assignment
        return out

    def to_dict(self, spec: PredictorSpec | None = None) -> dict:
        order = [spec.categories[i] for i in self.order] if spec is not None else list(self.order)
        return {"predictor": self.predictor, "k_prime": self.k_prime, "order": order,
                "assignment": list(self.assignment)}

    @classmethod
    def from_dict(cls, obj: dict, spec: PredictorSpec | None = None) -> Clustering:
        order = obj["order"]
        if spec is not None:
            index = {lab: k for k, lab in enumerate(spec.categories)}
            order = [index[lab] for lab in order]
        return cls(obj["predictor"], int(obj["k_prime"]), tuple(order), tuple(obj["assignment"]))


def order_natural(spec: PredictorSpec) -> CategoryOrdering:
    if spec.kind != ORDINAL:
        raise ValueError(f"{spec.name!r} is {spec.kind}; natural order needs an ordinal predictor")
    return CategoryOrdering(spec.name, tuple(range(spec.n_categories)))


def order_by_coefficients(spec: PredictorSpec, one_hot_fit: FittedGlm) -> CategoryOrdering:
    """Sort categories by their one-hot coefficient, the reference category counting as 0.

    Equal coefficients keep the original category order.
    """
    if not spec.is_categorical:
        raise ValueError(f"{spec.name!r} is not categorical")
    values = np.zeros(spec.n_categories)
    lookup = {c: k for k, c in enumerate(one_hot_fit.columns)}
    for k, label in enumerate(spec.categories[1:], start=1):
        col = Column("dummy", spec.name, label)
        if col not in lookup:
            raise ValueError(f"fit has no one-hot dummy for {spec.name}={label!r}")
        values[k] = one_hot_fit.coefficients[lookup[col]]
    return CategoryOrdering(spec.name, tuple(np.argsort(values, kind="stable")))


def default_ordering(spec: PredictorSpec, one_hot_fit: FittedGlm | None) -> CategoryOrdering:
    if spec.kind == ORDINAL:
        return order_natural(spec)
    if spec.kind == NOMINAL:
        if one_hot_fit is None:
            raise ValueError(f"nominal predictor {spec.name!r} needs a one-hot fit to be ordered")
        return order_by_coefficients(spec, one_hot_fit)
    raise ValueError(f"{spec.name!r} is continuous")


def enumerate_feasible_clusterings(k_categories: int, k_prime: int) -> list[tuple[int, ...]]:
    """All consecutive assignments of ``k_categories`` ordered categories into at most ``k_prime`` clusters.

    Each assignment places ``c`` cut points in the ``k_categories - 1`` gaps,
    ``0 <= c <= k_prime - 1``. Assignments come grouped by number of cuts,
    most cuts first, and lexicographically by cut position within a group;
    for ``k_prime = 2`` this puts "first ``k`` categories in cluster 0" at
    position ``k - 1`` and the all-in-one clustering last.
    """
    if k_prime < 2:
        raise ValueError("k_prime must be at least 2")
    if k_categories < 2:
        raise ValueError("need at least two categories to cluster")
    out = []
    for n_cuts in range(min(k_prime - 1, k_categories - 1), -1, -1):
        for cuts in combinations(range(1, k_categories), n_cuts):
            a = np.zeros(k_categories, dtype=np.int64)
            for c in cuts:
                a[c:] += 1
            out.append(tuple(int(v) for v in a))
    return out


def feasible_clusterings(ordering: CategoryOrdering, k_prime: int) -> list[Clustering]:
    return [Clustering(ordering.predictor, k_prime, ordering.order, a)
            for a in enumerate_feasible_clusterings(len(ordering.order), k_prime)]


def one_hot_columns(column: np.ndarray, spec: PredictorSpec) -> tuple[np.ndarray, list[Column]]:
    """K-1 indicators, the first declared category left out for contrast."""
    column = np.asarray(column)
    k = spec.n_categories
    block = (column[:, None] == np.arange(1, k)[None, :]).astype(float)
    return block, [Column("dummy", spec.name, lab) for lab in spec.categories[1:]]


def apply_clustering(column: np.ndarray, ordering: CategoryOrdering | None,
                     clustering: Clustering) -> tuple[np.ndarray, list[Column]]:
    """Reduced dummies: one indicator per non-empty cluster except the last.

    With a single non-empty cluster no column is emitted, i.e. the predictor
    drops out of the model.
    """
    if ordering is not None and ordering.order != clustering.order:
        raise ValueError(f"{clustering.predictor}: clustering was built on a different ordering")
    column = np.asarray(column)
    k = len(clustering.order)
    if column.size and (column.min() < 0 or column.max() >= k):
        raise ValueError(f"{clustering.predictor}: category index outside 0..{k - 1}")
    cluster = clustering.cluster_of_category()[column]
    n_dummies = clustering.n_clusters - 1
    block = (cluster[:, None] == np.arange(n_dummies)[None, :]).astype(float)
    return block, [Column("dummy", clustering.predictor, f"cluster{c}") for c in range(n_dummies)]


def build_design(dataset: Dataset, clusterings: Mapping[str, Clustering] | None = None) -> DesignMatrix:
    """Intercept, then categorical predictors in schema order, then continuous ones.

    Predictors listed in ``clusterings`` get their reduced encoding, the
    rest are one-hot encoded.
    """
    clusterings = clusterings or {}
    unknown = set(clusterings) - {p.name for p in dataset.schema.categorical}
    if unknown:
        raise ValueError(f"clusterings given for non-categorical or unknown predictors {sorted(unknown)}")
    blocks = [np.ones((dataset.n_rows, 1))]
    columns: list[Column] = [INTERCEPT]
    for j, spec in enumerate(dataset.schema.categorical):
        if spec.name in clusterings:
            block, cols = apply_clustering(dataset.codes[:, j], None, clusterings[spec.name])
        else:
            block, cols = one_hot_columns(dataset.codes[:, j], spec)
        blocks.append(block)
        columns.extend(cols)
    blocks.append(dataset.continuous)
    columns.extend(Column("continuous", p.name) for p in dataset.schema.continuous)
    return DesignMatrix(tuple(columns), np.hstack(blocks))


def relative_complexity(schema: Schema, clustered_predictors: Iterable[str] | None = None,
                        k_prime: int = 2) -> float:
    """Categorical coefficient count of the clustered model as a percentage of the one-hot model's.

    With every categorical predictor clustered into two groups this is
    ``J / (sum K_j - J) * 100``. Predictors left out of
    ``clustered_predictors`` keep their ``K_j - 1`` one-hot coefficients.
    """
    cats = schema.categorical
    if not cats:
        raise ValueError("schema has no categorical predictors")
    clustered = {p.name for p in cats} if clustered_predictors is None else set(clustered_predictors)
    unknown = clustered - {p.name for p in cats}
    if unknown:
        raise ValueError(f"not categorical predictors of this schema: {sorted(unknown)}")
    original = sum(p.n_categories - 1 for p in cats)
    if original == 0:
        raise ValueError("every categorical predictor has a single category")
    reduced = sum(min(k_prime, p.n_categories) - 1 if p.name in clustered else p.n_categories - 1
                  for p in cats)
    return 100.0 * reduced / original
