"""Labelled feature datasets, random train/test splits and CSV I/O."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import SizeMismatch

TARGETS = ("temperature", "light")
_TARGET_COLUMNS = {"temperature": "temperature_c", "light": "light_lux"}


@dataclass(frozen=True)
class Dataset:
    trace_ids: tuple
    features: np.ndarray
    temperature: np.ndarray
    light: np.ndarray

    def __post_init__(self):
        n = len(self.trace_ids)
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise SizeMismatch("features must be (n_rows, n_features)")
        if len(self.temperature) != n or len(self.light) != n:
            raise SizeMismatch("label arrays must match the row count")
        if len(set(self.trace_ids)) != n:
            raise SizeMismatch("duplicate trace ids")

    def __len__(self) -> int:
        return len(self.trace_ids)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def target(self, name: str) -> np.ndarray:
        if name not in TARGETS:
            raise KeyError(f"unknown target {name!r}; expected one of {TARGETS}")
        return self.temperature if name == "temperature" else self.light

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(tuple(self.trace_ids[i] for i in idx), self.features[idx],
                       self.temperature[idx], self.light[idx])


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_test: int
    seed: int = 0

    @classmethod
    def for_dataset(cls, dataset: Dataset, n_train: int, seed: int = 0) -> "SplitSpec":
        return cls(n_train, len(dataset) - n_train, seed)


def random_split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Draw ``n_train`` rows uniformly without replacement; the rest is test."""
    if spec.n_train + spec.n_test != len(dataset):
        raise SizeMismatch(f"{spec.n_train} + {spec.n_test} != dataset size {len(dataset)}")
    if spec.n_train < 1 or spec.n_test < 1:
        raise SizeMismatch("train and test sets must both be non-empty")
    rng = np.random.default_rng(spec.seed)
    chosen = np.zeros(len(dataset), dtype=bool)
    chosen[rng.choice(len(dataset), spec.n_train, replace=False)] = True
    return dataset.subset(np.flatnonzero(chosen)), dataset.subset(np.flatnonzero(~chosen))


def feature_columns(n_features: int) -> list[str]:
    return [f"f{k:02d}" for k in range(n_features)]


def write_dataset_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trace_id", *feature_columns(dataset.n_features), "temperature_c", "light_lux"])
        for k, tid in enumerate(dataset.trace_ids):
            w.writerow([tid, *(repr(float(x)) for x in dataset.features[k]),
                        repr(float(dataset.temperature[k])), repr(float(dataset.light[k]))])


def read_dataset_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "trace_id" or header[-2:] != ["temperature_c", "light_lux"]:
            raise SizeMismatch(f"{path}: unexpected dataset header")
        n_feat = len(header) - 3
        if header[1:-2] != feature_columns(n_feat):
            raise SizeMismatch(f"{path}: feature columns must be f00..f{n_feat - 1:02d}")
        ids, rows = [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            rows.append([float(x) for x in row[1:]])
    arr = np.array(rows, dtype=float).reshape(len(rows), n_feat + 2)
    return Dataset(tuple(ids), arr[:, :n_feat], arr[:, -2], arr[:, -1])
