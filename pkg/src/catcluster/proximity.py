"""Co-clustering proximity between categories across the m clustered models."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .clustering import Clustering


@dataclass(frozen=True, eq=False)
class ProximityMatrix:
    """``counts[c, d]`` models put categories c and d together; ``values = counts / m``."""

    predictor: str
    labels: tuple[str, ...]
    counts: np.ndarray
    m: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.labels)
        if counts.shape != (k, k):
            raise ValueError(f"counts shape {counts.shape} does not match {k} labels")
        if self.m < 1:
            raise ValueError("m must be positive")
        counts.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", counts)

    @property
    def values(self) -> np.ndarray:
        return self.counts / self.m

    def __getitem__(self, pair: tuple[str, str]) -> float:
        c, d = (self.labels.index(x) for x in pair)
        return float(self.counts[c, d] / self.m)


def compute_proximity(iterations: Iterable, predictor: str,
                      labels: Sequence[str] | None = None) -> ProximityMatrix:
    """Fraction of iterations in which each pair of categories shares a cluster.

    ``iterations`` holds objects with a ``clusterings`` mapping (GRASP
    iteration results) or bare :class:`Clustering` instances.
    """
    clusterings: list[Clustering] = []
    for it in iterations:
        c = it if isinstance(it, Clustering) else getattr(it, "clusterings", {}).get(predictor)
        if c is None:
            raise KeyError(f"predictor {predictor!r} was not clustered in every iteration")
        if c.predictor != predictor:
            raise ValueError(f"clustering for {c.predictor!r} passed for {predictor!r}")
        clusterings.append(c)
    if not clusterings:
        raise ValueError(f"no iterations to compute proximity for {predictor!r}")
    k = len(clusterings[0].order)
    if labels is None:
        labels = [str(i) for i in range(k)]
    if len(labels) != k:
        raise ValueError(f"{len(labels)} labels for {k} categories")
    counts = np.zeros((k, k), dtype=np.int64)
    for c in clusterings:
        if len(c.order) != k:
            raise ValueError(f"iterations disagree on the number of categories of {predictor!r}")
        cl = c.cluster_of_category()
        counts += cl[:, None] == cl[None, :]
    return ProximityMatrix(predictor, tuple(labels), counts, len(clusterings))


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _num(x: float) -> str:
    return format(x, ".6g")


def export_dot(matrix: ProximityMatrix, threshold: float = 0.0) -> str:
    """Undirected DOT graph: one node per category, an edge where proximity exceeds ``threshold``.

    Edge ``penwidth`` runs from 1 (proximity 0) to 10 (proximity 1).
    """
    order = sorted(range(len(matrix.labels)), key=lambda i: matrix.labels[i])
    values = matrix.values
    lines = [f"graph {_quote(matrix.predictor)} {{"]
    for i in order:
        lines.append(f"  {_quote(matrix.labels[i])};")
    for a, i in enumerate(order):
        for j in order[a + 1:]:
            p = float(values[i, j])
            if p > threshold:
                lines.append(f"  {_quote(matrix.labels[i])} -- {_quote(matrix.labels[j])} "
                             f"[penwidth={_num(1 + 9 * p)}, weight={_num(p)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_csv(matrix: ProximityMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([matrix.predictor, *matrix.labels])
    for label, row in zip(matrix.labels, matrix.values):
        w.writerow([label, *(repr(float(v)) for v in row)])
    return buf.getvalue()
