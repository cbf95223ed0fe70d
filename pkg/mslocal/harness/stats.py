from typing import Dict, Sequence, Tuple

import numpy as np

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def mean_and_stderr(values: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and standard error; the error is 0 for fewer than two values."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan"), float("nan")
    mean = float(np.sum(values) / values.size)
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))


def proportion_stderr(hits: int, trials: int) -> float:
    if trials == 0:
        return 0.0
    p = hits / trials
    return float(np.sqrt(p * (1 - p) / trials))


def fit_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Least-squares slope of log y against x over the points with y > 0.

    Returns -inf when fewer than two points are positive (nothing to fit,
    e.g. an identically vanishing statistic).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    if keep.sum() < 2:
        return float("-inf")
    slope, _ = np.polyfit(x[keep], np.log(y[keep]), 1)
    return float(slope)


def geometric_mean(values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan")
    if np.any(values <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(values))))


def quantile_summary(values: Sequence[float], prefix: str = "") -> Dict[str, float]:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {}
    summary = {f"{prefix}min": float(values.min()), f"{prefix}max": float(values.max())}
    for q, value in zip(QUANTILES, np.quantile(values, QUANTILES)):
        summary[f"{prefix}q{int(round(q * 100)):02d}"] = float(value)
    return summary
