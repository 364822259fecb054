"""Smooth plateau bumps built from the exp(-1/s) mollifier."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProfileShape:
    """Support (a, b) and plateau [p, q] of a bump, a < p < q < b.

    For analyzing profiles the parameters are measured in units of one gauge growth step.
    """

    support_inner: float = 0.0
    plateau_inner: float = 0.5
    plateau_outer: float = 1.5
    support_outer: float = 2.0

    def __post_init__(self) -> None:
        knots = (self.support_inner, self.plateau_inner, self.plateau_outer, self.support_outer)
        if not all(lo < hi for lo, hi in zip(knots, knots[1:], strict=False)):
            raise ValueError(f"degenerate bump parameters {knots}: need a < p < q < b")


def _mollifier(s: np.ndarray) -> np.ndarray:
    positive = s > 0
    out = np.zeros_like(s, dtype=float)
    out[positive] = np.exp(-1.0 / s[positive])
    return out


def smooth_step(s: np.ndarray) -> np.ndarray:
    """C^∞ step: 0 for s ≤ 0, 1 for s ≥ 1."""
    s = np.asarray(s, dtype=float)
    rising = _mollifier(s)
    return rising / (rising + _mollifier(1.0 - s))


def plateau_bump(t: np.ndarray, shape: ProfileShape) -> np.ndarray:
    """Bump positive on (a, b), equal to one on [p, q], zero elsewhere."""
    t = np.asarray(t, dtype=float)
    rising = smooth_step((t - shape.support_inner) / (shape.plateau_inner - shape.support_inner))
    falling = smooth_step((shape.support_outer - t) / (shape.support_outer - shape.plateau_outer))
    return rising * falling
