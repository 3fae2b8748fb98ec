"""Log-time segment averaging of traces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyTrace
from ..scattering import TransientTrace

N_SEGMENTS = 40


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    edges: np.ndarray
    trace_id: str = ""

    def __len__(self):
        return len(self.values)


def log_edges(t_start: float, t_end: float, n_segments: int = N_SEGMENTS) -> np.ndarray:
    return np.logspace(np.log10(t_start), np.log10(t_end), n_segments + 1)


def extract_features(trace: TransientTrace, n_segments: int = N_SEGMENTS,
                     trace_id: str = "") -> FeatureVector:
    """Mean dB value in each of ``n_segments`` log-spaced time segments.

    Edges run from the first positive sample time to the last sample time.
    Segment ``k`` takes samples in ``[edge_k, edge_k+1)``; the last segment
    also includes the final sample. Empty segments repeat the previous
    segment's mean; an empty first segment takes the first positive sample.
    """
    t = np.asarray(trace.times, dtype=float)
    y = np.asarray(trace.values_db, dtype=float)
    pos = t > 0
    if pos.sum() < 2:
        raise EmptyTrace("need at least two samples with t > 0")
    t, y = t[pos], y[pos]
    if t[-1] <= t[0]:
        raise EmptyTrace("trace spans zero time")
    edges = log_edges(t[0], t[-1], n_segments)
    seg = np.searchsorted(edges, t, side="right") - 1
    seg = np.clip(seg, 0, n_segments - 1)
    sums = np.bincount(seg, weights=y, minlength=n_segments)
    counts = np.bincount(seg, minlength=n_segments)
    values = np.empty(n_segments)
    prev = y[0]
    for k in range(n_segments):
        if counts[k]:
            prev = sums[k] / counts[k]
        values[k] = prev
    return FeatureVector(values, edges, trace_id)
