"""Schemas, CSV ingestion, response binarization and train/test splits."""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

ORDINAL = "ordinal"
NOMINAL = "nominal"
CONTINUOUS = "continuous"
KINDS = (ORDINAL, NOMINAL, CONTINUOUS)

BINARY = "binary"
COUNT = "count"


class SchemaError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class PredictorSpec:
    name: str
    kind: str
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"predictor {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CONTINUOUS:
            if self.categories is not None:
                raise SchemaError(f"continuous predictor {self.name!r} cannot declare categories")
            return
        if not self.categories:
            raise SchemaError(f"categorical predictor {self.name!r} needs a non-empty category list")
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        dupes = [c for c, n in Counter(self.categories).items() if n > 1]
        if dupes:
            raise SchemaError(f"predictor {self.name!r}: duplicate categories {dupes}")

    @property
    def is_categorical(self) -> bool:
        return self.kind != CONTINUOUS

    @property
    def n_categories(self) -> int:
        return len(self.categories) if self.categories else 0


@dataclass(frozen=True)
class Schema:
    """Predictor declarations plus the response column.

    ``positive_label`` only applies to binary responses. When it is absent
    the response is binarized majority-vs-rest, unless the raw labels are
    already exactly ``{"0", "1"}``.
    """

    predictors: tuple[PredictorSpec, ...]
    response_name: str
    response_type: str
    positive_label: str | None = None
    missing_label: str = "Missing"

    def __post_init__(self):
        object.__setattr__(self, "predictors", tuple(self.predictors))
        names = [p.name for p in self.predictors]
        dupes = [n for n, c in Counter(names).items() if c > 1]
        if dupes:
            raise SchemaError(f"duplicate predictor names {dupes}")
        if self.response_name in names:
            raise SchemaError(f"response {self.response_name!r} is also declared as a predictor")
        if self.response_type not in (BINARY, COUNT):
            raise SchemaError(f"response type must be 'binary' or 'count', got {self.response_type!r}")
        if self.positive_label is not None and self.response_type != BINARY:
            raise SchemaError("positive_label only applies to binary responses")

    @property
    def categorical(self) -> tuple[PredictorSpec, ...]:
        return tuple(p for p in self.predictors if p.is_categorical)

    @property
    def continuous(self) -> tuple[PredictorSpec, ...]:
        return tuple(p for p in self.predictors if not p.is_categorical)

    def predictor(self, name: str) -> PredictorSpec:
        for p in self.predictors:
            if p.name == name:
                return p
        raise KeyError(name)

    def categorical_index(self, name: str) -> int:
        for i, p in enumerate(self.categorical):
            if p.name == name:
                return i
        raise KeyError(f"{name!r} is not a categorical predictor")

    @classmethod
    def from_dict(cls, obj: dict) -> Schema:
        try:
            preds = tuple(
                PredictorSpec(p["name"], p["kind"], tuple(p["categories"]) if p.get("categories") is not None else None)
                for p in obj["predictors"]
            )
            resp = obj["response"]
            return cls(
                predictors=preds,
                response_name=resp["name"],
                response_type=resp["type"],
                positive_label=resp.get("positive_label"),
                missing_label=obj.get("missing_label", "Missing"),
            )
        except KeyError as exc:
            raise SchemaError(f"schema is missing key {exc}") from None

    def to_dict(self) -> dict:
        preds = []
        for p in self.predictors:
            entry = {"name": p.name, "kind": p.kind}
            if p.categories is not None:
                entry["categories"] = list(p.categories)
            preds.append(entry)
        resp = {"name": self.response_name, "type": self.response_type}
        if self.positive_label is not None:
            resp["positive_label"] = self.positive_label
        return {"predictors": preds, "response": resp, "missing_label": self.missing_label}


def load_schema(path: str | Path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return Schema.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column store of one sample.

    ``codes`` is (N, J) with category indices into each categorical spec,
    ``continuous`` is (N, P), ``y`` holds 0/1 or counts. Arrays are made
    read-only so instances can be shared freely.
    """

    schema: Schema
    codes: np.ndarray
    continuous: np.ndarray
    y: np.ndarray
    positive_label: str | None = field(default=None)

    def __post_init__(self):
        n = len(self.y)
        J, P = len(self.schema.categorical), len(self.schema.continuous)
        codes = np.asarray(self.codes, dtype=np.int64).reshape(n, J)
        cont = np.asarray(self.continuous, dtype=float).reshape(n, P)
        y = np.asarray(self.y)
        for j, spec in enumerate(self.schema.categorical):
            col = codes[:, j]
            if n and (col.min() < 0 or col.max() >= spec.n_categories):
                raise DataError(f"column {spec.name!r} holds an out-of-range category index")
        if self.schema.response_type == BINARY:
            if not np.isin(y, (0, 1)).all():
                raise DataError("binary response must be 0/1")
            y = y.astype(float)
        else:
            if (y < 0).any() or not np.all(np.mod(y, 1) == 0):
                raise DataError("count response must hold non-negative integers")
            y = y.astype(float)
        for arr in (codes, cont, y):
            arr.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "continuous", cont)
        object.__setattr__(self, "y", y)

    @property
    def n_rows(self) -> int:
        return len(self.y)

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.schema.categorical_index(name)]

    def take(self, rows: Sequence[int] | np.ndarray) -> Dataset:
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.schema, self.codes[rows], self.continuous[rows], self.y[rows], self.positive_label)

    def drop_predictor(self, name: str) -> Dataset:
        """Same rows with one predictor removed from schema and columns."""
        spec = self.schema.predictor(name)
        schema = Schema(
            tuple(p for p in self.schema.predictors if p.name != name),
            self.schema.response_name, self.schema.response_type,
            self.schema.positive_label, self.schema.missing_label,
        )
        if spec.is_categorical:
            j = self.schema.categorical_index(name)
            codes, cont = np.delete(self.codes, j, axis=1), self.continuous
        else:
            k = [p.name for p in self.schema.continuous].index(name)
            codes, cont = self.codes, np.delete(self.continuous, k, axis=1)
        return Dataset(schema, codes, cont, self.y, self.positive_label)


def binarize_majority_vs_rest(raw_labels: Iterable[str]) -> tuple[np.ndarray, str]:
    """Map the most frequent label to 1 and everything else to 0.

    Count ties go to the lexicographically smallest label.
    """
    labels = [str(v) for v in raw_labels]
    counts = Counter(labels)
    if len(counts) < 2:
        raise DataError("response has a single distinct label; nothing to binarize")
    top = max(counts.values())
    majority = min(lab for lab, c in counts.items() if c == top)
    return np.array([lab == majority for lab in labels], dtype=np.int64), majority


def _binary_response(labels: list[str], schema: Schema) -> tuple[np.ndarray, str | None]:
    if schema.positive_label is not None:
        return np.array([lab == schema.positive_label for lab in labels], dtype=np.int64), schema.positive_label
    if set(labels) <= {"0", "1"}:
        return np.array([int(lab) for lab in labels], dtype=np.int64), "1"
    return binarize_majority_vs_rest(labels)


def load_csv(path: str | Path, schema: Schema) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a :class:`Dataset`.

    Extra columns are ignored; every predictor and the response must be
    present. Categorical cells must be declared labels (the schema's
    ``missing_label`` is an ordinary category if declared); continuous cells
    must parse as floats.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)

    position = {name: i for i, name in enumerate(header)}
    needed = [p.name for p in schema.predictors] + [schema.response_name]
    missing = [n for n in needed if n not in position]
    if missing:
        raise DataError(f"{path}: header lacks columns {missing}")

    n = len(rows)
    cats, conts = schema.categorical, schema.continuous
    codes = np.empty((n, len(cats)), dtype=np.int64)
    cont = np.empty((n, len(conts)), dtype=float)
    lookup = [{lab: k for k, lab in enumerate(spec.categories)} for spec in cats]
    raw_y: list[str] = []
    ry = position[schema.response_name]
    for r, row in enumerate(rows):
        line = r + 2  # 1-based, after header
        if len(row) != len(header):
            raise DataError(f"{path}: row {line} has {len(row)} fields, expected {len(header)}")
        for j, spec in enumerate(cats):
            label = row[position[spec.name]]
            if label == "":
                label = schema.missing_label
            try:
                codes[r, j] = lookup[j][label]
            except KeyError:
                raise DataError(
                    f"{path}: row {line}, column {spec.name!r}: unknown category {label!r}"
                ) from None
        for k, spec in enumerate(conts):
            cell = row[position[spec.name]]
            try:
                cont[r, k] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {line}, column {spec.name!r}: non-numeric value {cell!r}"
                ) from None
            if not np.isfinite(cont[r, k]):
                raise DataError(f"{path}: row {line}, column {spec.name!r}: missing value")
        label = row[ry].strip()
        if label == "":
            raise DataError(f"{path}: row {line}: missing response")
        raw_y.append(label)

    if schema.response_type == BINARY:
        y, positive = _binary_response(raw_y, schema)
    else:
        positive = None
        try:
            y = np.array([float(v) for v in raw_y])
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric count response ({exc})") from None
    return Dataset(schema, codes, cont, y, positive)


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Inverse of :func:`load_csv`; the response is written as its integer code (0/1 or counts)."""
    schema = dataset.schema
    cats = schema.categorical
    cont_pos = {p.name: k for k, p in enumerate(schema.continuous)}
    cat_pos = {p.name: j for j, p in enumerate(cats)}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([p.name for p in schema.predictors] + [schema.response_name])
        for i in range(dataset.n_rows):
            row = []
            for p in schema.predictors:
                if p.is_categorical:
                    row.append(p.categories[dataset.codes[i, cat_pos[p.name]]])
                else:
                    row.append(repr(float(dataset.continuous[i, cont_pos[p.name]])))
            row.append(str(int(dataset.y[i])))
            w.writerow(row)


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float = 0.70
    n_reshuffles: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.n_reshuffles < 1:
            raise ValueError("n_reshuffles must be positive")


def split_indices(n_rows: int, plan: SplitPlan, reshuffle_index: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= reshuffle_index < plan.n_reshuffles:
        raise ValueError(f"reshuffle_index {reshuffle_index} outside [0, {plan.n_reshuffles})")
    n_train = int(np.floor(plan.train_fraction * n_rows + 0.5))
    if n_train == 0 or n_train == n_rows:
        raise DataError(f"split of {n_rows} rows at {plan.train_fraction} leaves an empty side")
    rng = np.random.default_rng([plan.seed, reshuffle_index])
    perm = rng.permutation(n_rows)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(dataset: Dataset, plan: SplitPlan, reshuffle_index: int) -> tuple[Dataset, Dataset]:
    train, test = split_indices(dataset.n_rows, plan, reshuffle_index)
    return dataset.take(train), dataset.take(test)
