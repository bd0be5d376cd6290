"""Regression figures of merit."""

from __future__ import annotations

import numpy as np

from ..errors import DegeneratePrediction


def evaluate_r2(true_vals, predicted) -> float:
    """R^2 of the least-squares line through (predicted, true).

    Equal to the squared Pearson correlation, so any affine miscalibration
    of the predictions is forgiven.  See :func:`r2_identity` for the
    uncorrected score.
    """
    t = np.asarray(true_vals, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if t.shape != p.shape or t.size < 3:
        raise ValueError("need at least 3 (true, predicted) pairs of equal length")
    if np.ptp(p) == 0.0:
        raise DegeneratePrediction("all predictions are identical")
    if np.ptp(t) == 0.0:
        raise DegeneratePrediction("all true values are identical")
    r = np.corrcoef(t, p)[0, 1]
    return float(r * r)


def r2_identity(true_vals, predicted) -> float:
    """1 - SS_res / SS_tot against the identity line."""
    t = np.asarray(true_vals, dtype=float)
    p = np.asarray(predicted, dtype=float)
    ss_tot = np.sum((t - t.mean()) ** 2)
    if ss_tot == 0.0:
        raise DegeneratePrediction("all true values are identical")
    return float(1.0 - np.sum((t - p) ** 2) / ss_tot)


def linear_fit(true_vals, predicted) -> tuple[float, float]:
    """Slope and intercept of ``true ~ slope * predicted + intercept``."""
    slope, intercept = np.polyfit(np.asarray(predicted, float), np.asarray(true_vals, float), 1)
    return float(slope), float(intercept)
