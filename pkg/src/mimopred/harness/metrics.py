"""Prediction-error and parameter-error metrics."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..exceptions import DimensionError
from ..utils import angular_distance, wrap_angle

UNMATCHED = -1


def grid_power(truth: np.ndarray) -> float:
    """Mean ``||H(q,k)||_F^2`` over a ``(..., N, M)`` grid."""
    return float(np.mean(np.sum(np.abs(truth) ** 2, axis=(-2, -1))))


def nse(pred: np.ndarray, truth: np.ndarray, power: float | None = None) -> np.ndarray:
    """Normalized square error per ``(q, k)``.

    ``power`` is the normalizing ``E||H||_F^2``; by default it is the mean over
    ``truth`` itself.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionError(f"prediction shape {pred.shape} != truth shape {truth.shape}")
    if power is None:
        power = grid_power(truth)
    return np.sum(np.abs(pred - truth) ** 2, axis=(-2, -1)) / power


def nmse(preds, truths, powers=None) -> float:
    """Mean NSE over trials (linear). Each trial's NSE is averaged over its grid first."""
    if powers is None:
        powers = [None] * len(preds)
    vals = [np.mean(nse(p, t, w)) for p, t, w in zip(preds, truths, powers)]
    return float(np.mean(vals))


def match_paths(truth: dict, est: dict) -> np.ndarray:
    """Assign estimated paths to true paths by minimum total squared angular distance.

    ``truth`` and ``est`` map parameter names (``mu_r``, ``gamma`` ...) to
    per-path arrays; only names present in both are compared. Returns, for
    each true path, the index of its estimate or ``UNMATCHED``.
    """
    names = [n for n in ("mu_r", "mu_t", "gamma", "eta")
             if truth.get(n) is not None and est.get(n) is not None]
    z_true = len(truth[names[0]])
    z_est = len(est[names[0]])
    cost = np.zeros((z_true, z_est))
    for n in names:
        cost += angular_distance(np.asarray(truth[n])[:, None], np.asarray(est[n])[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    out = np.full(z_true, UNMATCHED)
    out[rows] = cols
    return out


def rmse(estimates, true_value, angular: bool = True) -> float:
    """Root mean square error over trials; differences are wrapped for angles."""
    err = np.asarray(estimates, dtype=float) - true_value
    if angular:
        err = wrap_angle(err)
    return float(np.sqrt(np.mean(np.square(err))))


def empirical_cdf(samples):
    """Sorted samples and the step heights ``i / n`` reached at each of them."""
    x = np.sort(np.asarray(samples, dtype=float))
    return x, np.arange(1, x.size + 1) / x.size
