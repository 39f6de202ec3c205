"""Search rectangles over (private SINR targets, common SINR floor, angles)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERATE_EDGE = 1e-12


class DegenerateBoxError(ValueError):
    """Raised when a box has no edge left to bisect."""


@dataclass
class Box:
    """Axis-aligned rectangle; dimension order is gamma_1..gamma_K, s, alpha_2..alpha_K.

    gamma bounds are per-user private SINR targets (linear domain), the s
    bounds cap the common-stream SINR floor, and the alpha bounds confine the
    phase of the common stream seen by users 2..K, in radians inside [0, 2pi].
    """

    gamma_lo: np.ndarray
    gamma_hi: np.ndarray
    s_lo: float
    s_hi: float
    alpha_lo: np.ndarray
    alpha_hi: np.ndarray

    def __post_init__(self):
        self.gamma_lo = np.asarray(self.gamma_lo, dtype=float)
        self.gamma_hi = np.asarray(self.gamma_hi, dtype=float)
        self.alpha_lo = np.asarray(self.alpha_lo, dtype=float)
        self.alpha_hi = np.asarray(self.alpha_hi, dtype=float)
        self.s_lo = float(self.s_lo)
        self.s_hi = float(self.s_hi)

    @property
    def n_users(self) -> int:
        return self.gamma_lo.shape[0]

    @property
    def ndim(self) -> int:
        return 2 * self.n_users  # K gammas + 1 s + (K-1) alphas

    def lower(self) -> np.ndarray:
        return np.concatenate([self.gamma_lo, [self.s_lo], self.alpha_lo])

    def upper(self) -> np.ndarray:
        return np.concatenate([self.gamma_hi, [self.s_hi], self.alpha_hi])

    def widths(self) -> np.ndarray:
        return self.upper() - self.lower()

    def is_empty(self) -> bool:
        return bool(np.any(self.widths() < 0))

    def contains(self, gamma, s, alpha, rtol: float = 1e-9) -> bool:
        lo, hi = self.lower(), self.upper()
        x = np.concatenate([np.atleast_1d(gamma), [s], np.atleast_1d(alpha)])
        slack = rtol * np.maximum(1.0, np.abs(hi))
        return bool(np.all(x >= lo - slack) and np.all(x <= hi + slack))

    def copy(self) -> "Box":
        return Box(
            self.gamma_lo.copy(), self.gamma_hi.copy(),
            self.s_lo, self.s_hi,
            self.alpha_lo.copy(), self.alpha_hi.copy(),
        )

    def _replace_dim(self, j: int, lo: float, hi: float) -> "Box":
        out = self.copy()
        K = self.n_users
        if j < K:
            out.gamma_lo[j], out.gamma_hi[j] = lo, hi
        elif j == K:
            out.s_lo, out.s_hi = lo, hi
        else:
            out.alpha_lo[j - K - 1], out.alpha_hi[j - K - 1] = lo, hi
        return out


def branch(
    box: Box,
    rule: str = "absolute",
    ref_widths: np.ndarray = None,
    active: np.ndarray = None,
):
    """Bisect the box at the midpoint of its longest edge.

    rule "absolute" picks the longest raw edge; "relative" measures edges
    against ref_widths (normally the initial box). Ties break to the lowest
    dimension index. The two children partition the parent exactly.

    `active` optionally masks dimensions out of the selection (used to skip
    edges the bound is insensitive to); masked dimensions are reconsidered
    if no active edge is left to split.
    """
    w = box.widths()
    if np.all(w < DEGENERATE_EDGE):
        raise DegenerateBoxError(f"all edges below {DEGENERATE_EDGE}")
    if rule == "relative":
        if ref_widths is None:
            raise ValueError("relative branching needs reference widths")
        score = w / np.maximum(np.asarray(ref_widths, dtype=float), DEGENERATE_EDGE)
    elif rule == "absolute":
        score = w
    else:
        raise ValueError(f"unknown branching rule {rule!r}")
    if active is not None:
        masked = np.where(np.asarray(active, dtype=bool), score, 0.0)
        if masked.max() >= DEGENERATE_EDGE:
            score = masked
    j = int(np.argmax(score))
    lo, hi = box.lower()[j], box.upper()[j]
    mid = 0.5 * (lo + hi)
    return box._replace_dim(j, lo, mid), box._replace_dim(j, mid, hi)
