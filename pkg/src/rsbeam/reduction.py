"""Box tightening from monotone necessary feasibility/threshold conditions.

Both tests evaluate the box corners only: QoS floors must fit into the
largest common-rate budget the box allows, and the best weighted rate the
box allows must pay for at least the cheapest power any point of the box
consumes, scaled by the current objective threshold. The same inequalities,
solved for one coordinate at a time, tighten the box without discarding any
point that could still beat the threshold.
"""

from __future__ import annotations

import numpy as np

from .boxes import Box
from .model import ProblemInstance


def _min_power_proxy(inst: ProblemInstance, gamma_lo, s_lo) -> float:
    """Cheapest conceivable consumed power for targets at the box lower corner.

    Matched filtering bounds each private precoder by gamma_k / ||h_k||^2 and
    the common precoder by s / min_k ||h_k||^2 (every user must reach s).
    """
    inv = 1.0 / inst.channel_gains
    return inst.mu * (s_lo * inv.max() + float(gamma_lo @ inv)) + inst.Pc


def reduce_box(inst: ProblemInstance, box: Box, delta: float):
    """Tighten a box at threshold delta; returns the reduced Box or None.

    None means the box provably contains no point meeting the QoS floors and
    the threshold, and can be discarded without bounding it.
    """
    u = inst.u
    Rth = inst.Rth
    ghi_log = np.log2(1.0 + box.gamma_hi)
    shi_log = np.log2(1.0 + box.s_hi)
    umax = float(u.max())

    in_I = Rth - ghi_log > 0.0
    V = float(np.sum(Rth[in_I] - ghi_log[in_I]) - shi_log)
    if V > 0.0:
        return None

    W = _min_power_proxy(inst, box.gamma_lo, box.s_lo)
    U = umax * shi_log + float(u @ ghi_log)
    if U < delta * W:
        return None

    # raise lower bounds: each coordinate must on its own leave enough
    # rate (threshold condition) and enough budget (QoS condition)
    with np.errstate(over="ignore"):
        exc = np.where(u > 0.0, (W * delta - U) / np.where(u > 0.0, u, 1.0), -np.inf)
        glo2 = np.where(
            in_I,
            np.exp2(np.maximum(exc, V)) * (1.0 + box.gamma_hi) - 1.0,
            np.maximum(
                np.exp2(exc) * (1.0 + box.gamma_hi), np.exp2(V + Rth)
            ) - 1.0,
        )
        gamma_lo = np.maximum(box.gamma_lo, glo2)
        s_lo = max(
            box.s_lo,
            float(np.exp2(max((W * delta - U) / umax, V)) * (1.0 + box.s_hi) - 1.0),
        )

    gamma_hi = box.gamma_hi.copy()
    s_hi = box.s_hi
    if delta * inst.mu > 0.0:
        # lower upper bounds: pushing one coordinate up costs power that the
        # remaining rate headroom has to justify
        W2 = _min_power_proxy(inst, gamma_lo, s_lo)
        head = (U - delta * W2) / (delta * inst.mu)
        gamma_hi = np.minimum(gamma_hi, gamma_lo + inst.channel_gains * head)
        s_hi = min(s_hi, s_lo + float(inst.channel_gains.min()) * head)

    if np.any(gamma_lo > gamma_hi) or s_lo > s_hi:
        return None
    return Box(
        gamma_lo=gamma_lo,
        gamma_hi=gamma_hi,
        s_lo=s_lo,
        s_hi=s_hi,
        alpha_lo=box.alpha_lo.copy(),
        alpha_hi=box.alpha_hi.copy(),
    )
