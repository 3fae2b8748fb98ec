import numpy as np

from ..errors import DegenerateTruth, SizeMismatch


def determination_coefficient(y_true, y_pred) -> float:
    """``1 - SS_res / SS_tot`` with ``SS_tot`` about the mean of ``y_true``.

    Negative values mean the predictions are worse than that mean.
    """
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise SizeMismatch("y_true and y_pred must have equal, nonzero length")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0:
        raise DegenerateTruth("y_true is constant; R^2 is undefined")
    return 1.0 - float(np.sum((y_true - y_pred) ** 2)) / ss_tot
