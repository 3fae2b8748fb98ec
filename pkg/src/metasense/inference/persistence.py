"""Versioned JSON serialization of trained regressors.

Floats are written with ``repr`` precision so a save/load cycle reproduces
predictions bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from .forest import ForestModel, ForestParams, RegressionTree
from .ridge import RidgeModel

FORMAT_NAME = "metasense-model"
FORMAT_VERSION = 1


def _tree_to_dict(tree: RegressionTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def _tree_from_dict(d: dict, n_features: int) -> RegressionTree:
    return RegressionTree(np.array(d["feature"], dtype=np.intp), np.array(d["threshold"], dtype=float),
                          np.array(d["left"], dtype=np.intp), np.array(d["right"], dtype=np.intp),
                          np.array(d["value"], dtype=float), n_features)


def model_to_dict(model) -> dict:
    head = {"format": FORMAT_NAME, "format_version": FORMAT_VERSION, "target": model.target}
    if isinstance(model, ForestModel):
        p = model.params
        return {**head, "kind": "forest", "seed": model.seed, "n_features": model.n_features,
                "params": {"n_trees": p.n_trees, "max_features": p.max_features, "min_leaf": p.min_leaf,
                           "bootstrap": p.bootstrap, "max_depth": p.max_depth},
                "trees": [_tree_to_dict(t) for t in model.trees]}
    if isinstance(model, RidgeModel):
        return {**head, "kind": "ridge", "alpha": model.alpha, "intercept": model.intercept,
                "weights": model.weights.tolist(), "mean": model.mean.tolist(), "scale": model.scale.tolist()}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    if d.get("format") != FORMAT_NAME:
        raise ValueError("not a metasense model document")
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('format_version')!r}")
    if d["kind"] == "forest":
        n = d["n_features"]
        return ForestModel(tuple(_tree_from_dict(t, n) for t in d["trees"]), ForestParams(**d["params"]),
                           d["seed"], n, d["target"])
    if d["kind"] == "ridge":
        return RidgeModel(np.array(d["weights"]), d["intercept"], d["alpha"],
                          np.array(d["mean"]), np.array(d["scale"]), d["target"])
    raise ValueError(f"unknown model kind {d['kind']!r}")


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
