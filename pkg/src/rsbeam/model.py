"""Problem data and rate arithmetic for the rate-splitting MISO downlink.

An M-antenna base station serves K single-antenna users over unit-noise
channels h_k. The transmitter superimposes one common stream (decoded and
cancelled by every user) and K private streams. A candidate transmit
strategy is a set of precoders plus a split of the common rate across
users. All rates are in bits per channel use (log base 2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProblemInstance:
    """Static data of one precoder design problem.

    H    : (K, M) complex array, row k is the channel h_k (unit noise).
    P    : total transmit power budget (linear scale).
    u    : (K,) nonnegative rate weights, not all zero.
    mu   : power amplifier inefficiency (0 for pure rate maximization).
    Pc   : static circuit power, must be positive (objective denominator).
    Rth  : (K,) per-user minimum rate requirements in bits.

    With mu = 0, Pc = 1 the objective is the weighted sum rate; with unit
    weights and mu > 0 it is the energy efficiency in bits per unit power.
    """

    H: np.ndarray
    P: float
    u: np.ndarray = None
    mu: float = 0.0
    Pc: float = 1.0
    Rth: np.ndarray = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        object.__setattr__(self, "H", H)
        K, M = H.shape
        if K < 1 or M < 1:
            raise ValueError("need at least one user and one antenna")
        norms = np.linalg.norm(H, axis=1)
        if np.any(norms <= 0):
            raise ValueError("all channel vectors must be nonzero")
        u = np.ones(K) if self.u is None else np.asarray(self.u, dtype=float)
        if u.shape != (K,) or np.any(u < 0) or not np.any(u > 0):
            raise ValueError("weights must be K nonnegative values, not all zero")
        object.__setattr__(self, "u", u)
        Rth = np.zeros(K) if self.Rth is None else np.asarray(self.Rth, dtype=float)
        if Rth.shape != (K,) or np.any(Rth < 0):
            raise ValueError("rate requirements must be K nonnegative values")
        object.__setattr__(self, "Rth", Rth)
        if not self.P > 0:
            raise ValueError("power budget must be positive")
        if self.mu < 0:
            raise ValueError("amplifier inefficiency must be nonnegative")
        if not self.Pc > 0:
            raise ValueError("static circuit power must be positive")

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def M(self) -> int:
        return self.H.shape[1]

    @property
    def channel_gains(self) -> np.ndarray:
        """Squared channel norms ||h_k||^2."""
        return np.sum(np.abs(self.H) ** 2, axis=1)


@dataclass
class Candidate:
    """A transmit strategy: common precoder, private precoders, rate split.

    p_c : (M,) complex common precoder.
    p   : (K, M) complex private precoders, row k for user k.
    c   : (K,) nonnegative common-rate shares.
    """

    p_c: np.ndarray
    p: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.p_c = np.asarray(self.p_c, dtype=complex).reshape(-1)
        self.p = np.atleast_2d(np.asarray(self.p, dtype=complex))
        self.c = np.asarray(self.c, dtype=float).reshape(-1)

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.p_c) ** 2) + np.sum(np.abs(self.p) ** 2))


@dataclass
class RateReport:
    """Per-user SINRs and rates of a candidate, plus the objective value."""

    gamma_c: np.ndarray    # common-stream SINR at each user
    gamma_p: np.ndarray    # private-stream SINR at each user
    Rc_cap: np.ndarray     # log2(1 + gamma_c), per-user cap on the common rate
    Rp: np.ndarray         # log2(1 + gamma_p), private rate
    per_user_rate: np.ndarray  # c_k + Rp_k
    objective: float       # weighted rate sum over total consumed power
    total_power: float


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list = field(default_factory=list)  # (constraint name, residual)
    rates: RateReport = None


def compute_sinrs(inst: ProblemInstance, cand: Candidate) -> RateReport:
    """Evaluate common/private SINRs, rates and the objective of a candidate.

    gamma_c,k = |h_k^H p_c|^2 / (sum_j |h_k^H p_j|^2 + 1)
    gamma_p,k = |h_k^H p_k|^2 / (sum_{j != k} |h_k^H p_j|^2 + 1)
    """
    K, M = inst.K, inst.M
    if cand.p_c.shape != (M,) or cand.p.shape != (K, M) or cand.c.shape != (K,):
        raise ValueError(
            f"candidate dimensions {cand.p_c.shape}/{cand.p.shape}/{cand.c.shape} "
            f"do not match instance (K={K}, M={M})"
        )
    Hc = inst.H.conj()
    ip_c = Hc @ cand.p_c              # h_k^H p_c
    ip_p = Hc @ cand.p.T              # [k, j] = h_k^H p_j
    pw = np.abs(ip_p) ** 2
    denom_c = pw.sum(axis=1) + 1.0
    gamma_c = np.abs(ip_c) ** 2 / denom_c
    denom_p = denom_c - np.diag(pw)
    gamma_p = np.diag(pw) / denom_p
    Rc_cap = np.log2(1.0 + gamma_c)
    Rp = np.log2(1.0 + gamma_p)
    rate = cand.c + Rp
    tot = cand.total_power()
    obj = float(inst.u @ rate) / (inst.mu * tot + inst.Pc)
    return RateReport(gamma_c, gamma_p, Rc_cap, Rp, rate, obj, tot)


def check_primal_feasible(
    inst: ProblemInstance, cand: Candidate, tol: float = 1e-6
) -> FeasibilityReport:
    """Check a candidate against the rate-split, QoS and power constraints.

    Every violated constraint is reported with its residual:
      common_rate[k] : sum(c) - log2(1 + gamma_c,k)
      rate_floor[k]  : max(0, Rth_k - Rp_k) - c_k
      power          : total power - P
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    rr = compute_sinrs(inst, cand)
    viol = []
    csum = float(np.sum(cand.c))
    for k in range(inst.K):
        r = csum - rr.Rc_cap[k]
        if r > tol:
            viol.append((f"common_rate[{k}]", r))
    floors = np.maximum(0.0, inst.Rth - rr.Rp)
    for k in range(inst.K):
        r = floors[k] - cand.c[k]
        if r > tol:
            viol.append((f"rate_floor[{k}]", r))
    pr = rr.total_power - inst.P
    if pr > tol:
        viol.append(("power", pr))
    return FeasibilityReport(feasible=not viol, violations=viol, rates=rr)


def initial_box(inst: ProblemInstance):
    """Smallest search rectangle containing every power-feasible SINR profile.

    Private SINR targets live in [0, P*||h_k||^2], the common SINR floor in
    [0, min_k P*||h_k||^2], and the K-1 auxiliary angles in [0, 2*pi].
    """
    from .boxes import Box

    tops = inst.P * inst.channel_gains
    Ka = inst.K - 1
    return Box(
        gamma_lo=np.zeros(inst.K),
        gamma_hi=tops,
        s_lo=0.0,
        s_hi=float(tops.min()),
        alpha_lo=np.zeros(Ka),
        alpha_hi=np.full(Ka, TWO_PI),
    )


# ---------------------------------------------------------------------------
# JSON interchange (all complex numbers as {"re": ..., "im": ...})

def _c2d(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _d2c(d: dict) -> complex:
    return complex(d["re"], d["im"])


def instance_to_dict(inst: ProblemInstance) -> dict:
    return {
        "K": inst.K,
        "M": inst.M,
        "channels": [[_c2d(z) for z in row] for row in inst.H],
        "P": float(inst.P),
        "weights": inst.u.tolist(),
        "mu": float(inst.mu),
        "Pc": float(inst.Pc),
        "Rth": inst.Rth.tolist(),
    }


def instance_from_dict(d: dict) -> ProblemInstance:
    H = np.array([[_d2c(z) for z in row] for row in d["channels"]], dtype=complex)
    if H.shape != (d["K"], d["M"]):
        raise ValueError(f"channel matrix shape {H.shape} contradicts K/M fields")
    return ProblemInstance(
        H=H,
        P=float(d["P"]),
        u=np.asarray(d["weights"], dtype=float),
        mu=float(d.get("mu", 0.0)),
        Pc=float(d.get("Pc", 1.0)),
        Rth=np.asarray(d.get("Rth", np.zeros(d["K"])), dtype=float),
    )


def load_instance(path) -> ProblemInstance:
    with open(Path(path)) as f:
        return instance_from_dict(json.load(f))


def save_instance(inst: ProblemInstance, path) -> None:
    with open(Path(path), "w") as f:
        json.dump(instance_to_dict(inst), f, indent=2)


def candidate_to_dict(cand: Candidate) -> dict:
    return {
        "p_c": [_c2d(z) for z in cand.p_c],
        "p": [[_c2d(z) for z in row] for row in cand.p],
        "c": cand.c.tolist(),
    }


def candidate_from_dict(d: dict) -> Candidate:
    return Candidate(
        p_c=np.array([_d2c(z) for z in d["p_c"]], dtype=complex),
        p=np.array([[_d2c(z) for z in row] for row in d["p"]], dtype=complex),
        c=np.asarray(d["c"], dtype=float),
    )
