import math

SCALE_RATIO = 15 / 8


def scale_length(k: int) -> float:
    """Length scale L_k = (15/8)^k."""
    if k < 0:
        raise ValueError(f"scale index must be nonnegative, got {k}")
    return SCALE_RATIO**k


def shell_bounds(step: int) -> tuple:
    """Contracted-distance shell [L_{k-1}, L_k) treated by step k (k >= 1)."""
    if step < 1:
        raise ValueError(f"steps are numbered from 1, got {step}")
    return scale_length(step - 1), scale_length(step)


def collar_radius(step: int) -> int:
    """Largest integer distance strictly below L_k."""
    return math.ceil(scale_length(step)) - 1
