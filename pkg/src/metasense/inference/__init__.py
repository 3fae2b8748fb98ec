"""Feature extraction and regression of temperature and light from traces."""
import numpy as np

from ..errors import DimensionMismatch
from .data import TARGETS, Dataset, SplitSpec, random_split, read_dataset_csv, write_dataset_csv
from .features import N_SEGMENTS, FeatureVector, extract_features
from .forest import ForestModel, ForestParams, RegressionTree, fit_tree, train_forest
from .metrics import determination_coefficient
from .persistence import load_model, save_model
from .ridge import RidgeModel, train_ridge


def predict(model, features):
    """Estimate for one :class:`FeatureVector` (scalar) or a 2-D array (vector)."""
    if isinstance(features, FeatureVector):
        if len(features) != model.n_features:
            raise DimensionMismatch(f"expected {model.n_features} features, got {len(features)}")
        return float(model.predict(features.values[None, :])[0])
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        if len(X) != model.n_features:
            raise DimensionMismatch(f"expected {model.n_features} features, got {len(X)}")
        return float(model.predict(X[None, :])[0])
    return model.predict(X)


__all__ = [
    "TARGETS", "Dataset", "SplitSpec", "random_split", "read_dataset_csv", "write_dataset_csv",
    "N_SEGMENTS", "FeatureVector", "extract_features",
    "ForestModel", "ForestParams", "RegressionTree", "fit_tree", "train_forest",
    "determination_coefficient", "load_model", "save_model",
    "RidgeModel", "train_ridge", "predict",
]
