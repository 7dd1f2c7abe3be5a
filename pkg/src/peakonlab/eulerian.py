"""Closed-form solution profile u(t, x) on every branch.

The solution is a two-peakon ``p1 e^{-|x-q1|} + p2 e^{-|x-q2|}`` before
breaking, the single cusp ``(c1+c2) e^{-|x|}`` at the breaking time, a
rescaled two-peakon (strengths d1, d2) afterwards when alpha < 1, and a
traveling single peakon when alpha = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AtBreakingError, BranchError
from .params import Config, derive

# Pair parameters p1, p2 blow up like 1/(t - t0); inside this window the
# pair is refused and u is evaluated through its finite t0 limit instead.
BLOWUP_GUARD = 1e-9


class SolutionBranch(enum.Enum):
    PRE_BREAKING = "pre-breaking"
    AT_BREAKING = "at-breaking"
    POST_TWO_PEAKON = "post-two-peakon"
    POST_ONE_PEAKON = "post-one-peakon"


@dataclass(frozen=True)
class PeakonPair:
    """Instantaneous two-peakon parameters at time ``t``."""

    p1: float
    p2: float
    q1: float
    q2: float
    t: float


def classify(cfg: Config, t: float) -> SolutionBranch:
    """Route a time to the branch whose closed form is in effect."""
    if abs(t - cfg.t0) < BLOWUP_GUARD:
        return SolutionBranch.AT_BREAKING
    if t < cfg.t0:
        return SolutionBranch.PRE_BREAKING
    if cfg.alpha == 1.0:
        return SolutionBranch.POST_ONE_PEAKON
    return SolutionBranch.POST_TWO_PEAKON


def trajectories(cfg: Config, t: float) -> PeakonPair:
    """Peakon strengths and positions at time ``t != t0``.

    Raises ``AtBreakingError`` inside the blow-up window |t - t0| < 1e-9
    and ``BranchError`` for t > t0 with alpha = 1 (no two-peakon branch
    exists there).
    """
    branch = classify(cfg, t)
    if branch is SolutionBranch.AT_BREAKING:
        raise AtBreakingError(
            f"|t - t0| = {abs(t - cfg.t0):.3e} < {BLOWUP_GUARD:.0e}: "
            "pair parameters blow up at breaking"
        )
    if branch is SolutionBranch.POST_ONE_PEAKON:
        raise BranchError("alpha = 1 continues as a single peakon; no pair for t > t0")
    dc = derive(cfg)
    tau = t - cfg.t0
    if branch is SolutionBranch.PRE_BREAKING:
        c1, c2, L = cfg.c1, cfg.c2, dc.L
        E = math.exp(L * tau)
        one_minus_E = -math.expm1(L * tau)
        p1 = (c1 - c2 * E) / one_minus_E
        p2 = (c2 - c1 * E) / one_minus_E
        q1 = math.log(L) + c1 * tau - math.log(c1 - c2 * E)
        q2 = -math.log(L) + c2 * tau + math.log(c1 * E - c2)
    else:
        d1, d2, Lt = dc.d1, dc.d2, dc.Ltilde
        E = math.exp(-Lt * tau)
        one_minus_E = -math.expm1(-Lt * tau)
        p1 = (d2 - d1 * E) / one_minus_E
        p2 = (d1 - d2 * E) / one_minus_E
        q1 = math.log(Lt) + d2 * tau - math.log(d1 * E - d2)
        q2 = -math.log(Lt) + d1 * tau + math.log(d1 - d2 * E)
    return PeakonPair(p1=p1, p2=p2, q1=q1, q2=q2, t=t)


def peak_positions(cfg: Config, t: float) -> tuple[float, ...]:
    """x locations where u(t, .) has a kink (density breakpoints)."""
    branch = classify(cfg, t)
    if branch is SolutionBranch.AT_BREAKING:
        return (0.0,)
    if branch is SolutionBranch.POST_ONE_PEAKON:
        return ((cfg.c1 + cfg.c2) * (t - cfg.t0),)
    pair = trajectories(cfg, t)
    return (pair.q1, pair.q2)


def eval_u(cfg: Config, t: float, x):
    """u(t, x); total in (t, x).  ``x`` may be a scalar or an ndarray."""
    x = np.asarray(x, dtype=float)
    branch = classify(cfg, t)
    if branch is SolutionBranch.AT_BREAKING:
        out = (cfg.c1 + cfg.c2) * np.exp(-np.abs(x))
    elif branch is SolutionBranch.POST_ONE_PEAKON:
        s = cfg.c1 + cfg.c2
        out = s * np.exp(-np.abs(x - s * (t - cfg.t0)))
    else:
        pair = trajectories(cfg, t)
        out = pair.p1 * np.exp(-np.abs(x - pair.q1)) + pair.p2 * np.exp(
            -np.abs(x - pair.q2)
        )
    return out if out.ndim else float(out)


def eval_ux(cfg: Config, t: float, x):
    """Spatial derivative of u off the peaks; left derivative at a peak.

    Each term p e^{-|x-q|} differentiates to sign(q - x) p e^{-|x-q|};
    taking sign(0) = +1 realizes the left-derivative convention.
    """
    x = np.asarray(x, dtype=float)
    branch = classify(cfg, t)
    if branch is SolutionBranch.AT_BREAKING:
        s = cfg.c1 + cfg.c2
        out = np.where(x <= 0.0, 1.0, -1.0) * s * np.exp(-np.abs(x))
    elif branch is SolutionBranch.POST_ONE_PEAKON:
        s = cfg.c1 + cfg.c2
        q = s * (t - cfg.t0)
        out = np.where(x <= q, 1.0, -1.0) * s * np.exp(-np.abs(x - q))
    else:
        pair = trajectories(cfg, t)
        out = pair.p1 * np.where(x <= pair.q1, 1.0, -1.0) * np.exp(
            -np.abs(x - pair.q1)
        ) + pair.p2 * np.where(x <= pair.q2, 1.0, -1.0) * np.exp(-np.abs(x - pair.q2))
    return out if out.ndim else float(out)


def energy(cfg: Config, t: float) -> float:
    """Closed-form H1 energy of the branch active at time ``t``.

    2c1^2 + 2c2^2 before breaking, 2(c1+c2)^2 of the cusp at breaking,
    2d1^2 + 2d2^2 for alpha < 1 afterwards, and 2(c1+c2)^2 for alpha = 1.
    """
    branch = classify(cfg, t)
    dc = derive(cfg)
    if branch is SolutionBranch.PRE_BREAKING:
        return dc.E2
    if branch is SolutionBranch.POST_TWO_PEAKON:
        return dc.E2tilde
    s = cfg.c1 + cfg.c2
    return 2.0 * s * s
