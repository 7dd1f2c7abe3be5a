"""Closed-form solution along characteristics.

The characteristic map y(t, xi), its xi-derivative, the velocity
U = u(t, y), the energy density h and its reduced companion h_bar are
given in closed form on three xi-pieces split at the initial peak
positions q1(0) and q2(0).  The label grid is normalized so that
y(0, xi) = xi.

Numerical conventions
---------------------
* Every factor of the form 1 - e^{z} is computed as -expm1(z).
* The middle-piece ratio inside the logarithm of y is formed as
  (-numerator)/(-denominator): both factors are negative throughout the
  piece, and negating first keeps the ratio positive near breaking.
* The middle-piece h is evaluated with the product p1 p2 e^{q1 - q2}
  eliminated algebraically (it equals -L^2 e^{L(t-t0)}/(1-e^{L(t-t0)})^2,
  whose singular factor cancels against y_xi), so h stays finite and
  accurate arbitrarily close to breaking.
* At a piece boundary the left-closed piece wins: xi <= q1(0) is 'left',
  xi >= q2(0) is 'right'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import eulerian
from .errors import BranchArgumentError, BranchError, DomainError
from .eulerian import BLOWUP_GUARD
from .params import Config, derive

FIELD_NAMES = ("y", "y_xi", "U", "U_xi", "h", "h_bar")


@dataclass(frozen=True)
class LagrangianSample:
    """State of one characteristic: (y, y_xi, U, U_xi, h, h_bar)."""

    y: float
    y_xi: float
    U: float
    U_xi: float
    h: float
    h_bar: float


@dataclass(frozen=True)
class HelperValues:
    """Breaking-time helper functions of xi (fixed cfg).

    C, D enter the middle-piece characteristic before breaking; S is the
    normalized jump strength Q(t0+)/(d1 d2) with derivative S_prime.  S
    increases from -1 at q1(0) to +1 at q2(0).
    """

    C: float
    D: float
    S: float
    S_prime: float


@lru_cache(maxsize=None)
def initial_peaks(cfg: Config) -> tuple[float, float]:
    """Peak positions (q1(0), q2(0)) delimiting the three xi-pieces."""
    pair = eulerian.trajectories(cfg, 0.0)
    return pair.q1, pair.q2


def _masks(cfg: Config, xi: np.ndarray):
    q10, q20 = initial_peaks(cfg)
    left = xi <= q10
    right = xi >= q20
    mid = ~(left | right)
    return left, mid, right


# ----------------------------------------------------------------------
# breaking-time helpers
# ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _s_constants(cfg: Config) -> tuple[float, float, float, float]:
    """(a, b, K, w) with L C + D = L (a + b e^xi) and w = 2 c1 c2 (1-e^{-L t0})^2."""
    c1, c2 = cfg.c1, cfg.c2
    L = derive(cfg).L
    emLt0 = math.exp(-L * cfg.t0)
    a = L * math.exp(-c1 * cfg.t0) + c2 - c1 * emLt0
    b = -c1 + c2 * emLt0 + L * math.exp(c2 * cfg.t0)
    K = c1 - c2 * emLt0 + L * math.exp(c2 * cfg.t0)
    w = 2.0 * c1 * c2 * (-math.expm1(-L * cfg.t0)) ** 2
    return a, b, K, w


def _s_of(cfg: Config, xi: np.ndarray) -> np.ndarray:
    a, b, K, w = _s_constants(cfg)
    G = a + b * np.exp(xi)
    return (w - K * G) / (b * G)


def _s_prime_of(cfg: Config, xi: np.ndarray) -> np.ndarray:
    a, b, _, w = _s_constants(cfg)
    G = a + b * np.exp(xi)
    return -w * np.exp(xi) / np.square(G)


def _h_breaking_mid(cfg: Config, xi: np.ndarray) -> np.ndarray:
    """h(t0, xi) on the collapsed piece; equals -2 c1 c2 S'(xi)."""
    return -2.0 * cfg.c1 * cfg.c2 * _s_prime_of(cfg, xi)


def helpers(cfg: Config, xi: float) -> HelperValues:
    """C, D, S, S' at a label inside [q1(0), q2(0)]."""
    q10, q20 = initial_peaks(cfg)
    if not q10 <= xi <= q20:
        raise DomainError(f"xi = {xi} outside [{q10}, {q20}]")
    c1, c2 = cfg.c1, cfg.c2
    L = derive(cfg).L
    C = c2 - c1 * math.exp(-L * cfg.t0) + L * math.exp(xi + c2 * cfg.t0)
    D = (
        L * L * math.exp(-c1 * cfg.t0)
        - L * c1 * math.exp(xi)
        + L * c2 * math.exp(xi - L * cfg.t0)
    )
    arr = np.asarray(xi, dtype=float)
    return HelperValues(
        C=C, D=D, S=float(_s_of(cfg, arr)), S_prime=float(_s_prime_of(cfg, arr))
    )


def q_jump(cfg: Config, xi: float) -> tuple[float, float]:
    """(Q(t0-, xi), Q(t0+, xi)); the jump factor is exactly (1 - alpha)."""
    q10, q20 = initial_peaks(cfg)
    if not q10 <= xi <= q20:
        raise DomainError(f"xi = {xi} outside [{q10}, {q20}]")
    s = float(_s_of(cfg, np.asarray(xi, dtype=float)))
    dc = derive(cfg)
    return cfg.c1 * cfg.c2 * s, dc.d1 * dc.d2 * s


# ----------------------------------------------------------------------
# field blocks (vectorized over xi)
# ----------------------------------------------------------------------


def _empty_fields(n: int) -> dict[str, np.ndarray]:
    return {name: np.empty(n) for name in FIELD_NAMES}


def _tail_fields(out, mask, y, y_xi, U, orientation):
    """Fill one exponential tail; on tails h = h_bar = U^2 y_xi and
    U_xi = +/- U y_xi (u_x = +/- u on the outer exponentials)."""
    out["y"][mask] = y
    out["y_xi"][mask] = y_xi
    out["U"][mask] = U
    out["U_xi"][mask] = orientation * U * y_xi
    h = U * U * y_xi
    out["h"][mask] = h
    out["h_bar"][mask] = h


def _require_positive(arr: np.ndarray, what: str) -> None:
    if arr.size and not np.all(arr > 0.0):
        raise BranchArgumentError(f"{what} left its positive range (invalid cfg or t)")


def _fields_pre(cfg: Config, t: float, xi: np.ndarray) -> dict[str, np.ndarray]:
    c1, c2 = cfg.c1, cfg.c2
    dc = derive(cfg)
    L = dc.L
    tau = t - cfg.t0
    out = _empty_fields(xi.size)
    left, mid, right = _masks(cfg, xi)

    if np.any(left):
        xs = xi[left]
        A = c1 * math.exp(c1 * cfg.t0) * math.expm1(-c1 * t) - c2 * math.exp(
            c2 * cfg.t0
        ) * math.expm1(-c2 * t)
        den = L + A * np.exp(xs)
        _require_positive(den, "left-piece denominator")
        num_U = c1 * c1 * math.exp(-c1 * tau) - c2 * c2 * math.exp(-c2 * tau)
        _tail_fields(
            out, left, xs + math.log(L) - np.log(den), L / den,
            num_U * np.exp(xs) / den, +1.0,
        )

    if np.any(right):
        xs = xi[right]
        A = c1 * math.exp(-c1 * cfg.t0) * math.expm1(c1 * t) - c2 * math.exp(
            -c2 * cfg.t0
        ) * math.expm1(c2 * t)
        den = L + A * np.exp(-xs)
        _require_positive(den, "right-piece denominator")
        num_U = c1 * c1 * math.exp(c1 * tau) - c2 * c2 * math.exp(c2 * tau)
        _tail_fields(
            out, right, xs - math.log(L) + np.log(den), L / den,
            num_U * np.exp(-xs) / den, -1.0,
        )

    if np.any(mid):
        xs = xi[mid]
        c1t0 = cfg.t0  # noqa: F841 - keep tau-based exponentials below readable
        E1 = math.exp(L * tau)
        ec1 = math.exp(c1 * tau)
        ec2 = math.exp(c2 * tau)
        one_minus_E1 = -math.expm1(L * tau)
        one_minus_Et0 = -math.expm1(-L * cfg.t0)
        exs = np.exp(xs)
        C = c2 - c1 * math.exp(-L * cfg.t0) + L * math.exp(c2 * cfg.t0) * exs
        D = (
            L * L * math.exp(-c1 * cfg.t0)
            - L * c1 * exs
            + L * c2 * math.exp(-L * cfg.t0) * exs
        )
        neg_num = -((c1 * E1 - c2) * D + L * L * ec1 * C)
        neg_den = -(D + (c1 * ec2 - c2 * ec1) * C)
        _require_positive(neg_num, "middle-piece log numerator")
        _require_positive(neg_den, "middle-piece log denominator")
        prod = neg_num * neg_den  # = num * den, both factors negated
        y = c2 * tau - math.log(L) + np.log(neg_num / neg_den)
        y_xi = (
            (c1 * c2) ** 2 * L * ec2
            * one_minus_Et0**2 * one_minus_E1**2 * exs / prod
        )
        num_U = (
            D * D * (c1 * c1 * E1 - c2 * c2)
            + 2.0 * C * D * L * L * ec1 * (c1 + c2)
            + C * C * L * L * ec1 * (c1 * c1 * ec2 - c2 * c2 * ec1)
        )
        U = num_U / prod
        # -4 p1 p2 e^{q1-q2} y_xi with the (1-e^{L tau})^-2 blow-up cancelled
        cross = 4.0 * (c1 * c2) ** 2 * L**3 * ec1 * one_minus_Et0**2 * exs / prod
        h = U * U * y_xi + cross
        pair = eulerian.trajectories(cfg, t)
        ux_mid = pair.p2 * np.exp(y - pair.q2) - pair.p1 * np.exp(pair.q1 - y)
        out["y"][mid] = y
        out["y_xi"][mid] = y_xi
        out["U"][mid] = U
        out["U_xi"][mid] = ux_mid * y_xi
        out["h"][mid] = h
        out["h_bar"][mid] = h
    return out


def _fields_breaking(cfg: Config, xi: np.ndarray) -> dict[str, np.ndarray]:
    c1, c2 = cfg.c1, cfg.c2
    L = derive(cfg).L
    s = c1 + c2
    out = _empty_fields(xi.size)
    left, mid, right = _masks(cfg, xi)

    if np.any(left):
        xs = xi[left]
        A = c1 * math.exp(c1 * cfg.t0) * math.expm1(-c1 * cfg.t0) - c2 * math.exp(
            c2 * cfg.t0
        ) * math.expm1(-c2 * cfg.t0)
        den = L + A * np.exp(xs)
        _require_positive(den, "left-piece denominator")
        _tail_fields(
            out, left, xs + math.log(L) - np.log(den), L / den,
            s * L * np.exp(xs) / den, +1.0,
        )
    if np.any(right):
        xs = xi[right]
        A = c1 * math.exp(-c1 * cfg.t0) * math.expm1(c1 * cfg.t0) - c2 * math.exp(
            -c2 * cfg.t0
        ) * math.expm1(c2 * cfg.t0)
        den = L + A * np.exp(-xs)
        _require_positive(den, "right-piece denominator")
        _tail_fields(
            out, right, xs - math.log(L) + np.log(den), L / den,
            s * L * np.exp(-xs) / den, -1.0,
        )
    if np.any(mid):
        xs = xi[mid]
        h = _h_breaking_mid(cfg, xs)
        out["y"][mid] = 0.0
        out["y_xi"][mid] = 0.0
        out["U"][mid] = s
        out["U_xi"][mid] = 0.0
        out["h"][mid] = h
        out["h_bar"][mid] = (1.0 - cfg.alpha) * h
    return out


def _fields_post_dissipative(cfg: Config, t: float, xi: np.ndarray):
    c1, c2 = cfg.c1, cfg.c2
    L = derive(cfg).L
    s = c1 + c2
    sig = t - cfg.t0
    out = _empty_fields(xi.size)
    left, mid, right = _masks(cfg, xi)

    if np.any(left):
        xs = xi[left]
        B = L * math.exp(-s * sig) - c1 * math.exp(c1 * cfg.t0) + c2 * math.exp(
            c2 * cfg.t0
        )
        den = L + B * np.exp(xs)
        _require_positive(den, "left-piece denominator")
        _tail_fields(
            out, left, xs + math.log(L) - np.log(den), L / den,
            s * L * math.exp(-s * sig) * np.exp(xs) / den, +1.0,
        )
    if np.any(right):
        xs = xi[right]
        B = L * math.exp(s * sig) - c1 * math.exp(-c1 * cfg.t0) + c2 * math.exp(
            -c2 * cfg.t0
        )
        den = L + B * np.exp(-xs)
        _require_positive(den, "right-piece denominator")
        _tail_fields(
            out, right, xs - math.log(L) + np.log(den), L / den,
            s * L * math.exp(s * sig) * np.exp(-xs) / den, -1.0,
        )
    if np.any(mid):
        xs = xi[mid]
        out["y"][mid] = s * sig
        out["y_xi"][mid] = 0.0
        out["U"][mid] = s
        out["U_xi"][mid] = 0.0
        out["h"][mid] = _h_breaking_mid(cfg, xs)  # frozen at its t0 value
        out["h_bar"][mid] = 0.0
    return out


def _fields_post_general(cfg: Config, t: float, xi: np.ndarray):
    c1, c2 = cfg.c1, cfg.c2
    dc = derive(cfg)
    L, Lt, d1, d2 = dc.L, dc.Ltilde, dc.d1, dc.d2
    sig = t - cfg.t0
    out = _empty_fields(xi.size)
    left, mid, right = _masks(cfg, xi)

    if np.any(left):
        xs = xi[left]
        G = Lt * (-c1 * math.exp(c1 * cfg.t0) + c2 * math.exp(c2 * cfg.t0)) + L * (
            d1 * math.exp(-d1 * sig) - d2 * math.exp(-d2 * sig)
        )
        den = L * Lt + G * np.exp(xs)
        _require_positive(den, "left-piece denominator")
        num_U = d1 * d1 * math.exp(-d1 * sig) - d2 * d2 * math.exp(-d2 * sig)
        _tail_fields(
            out, left, xs + math.log(L * Lt) - np.log(den), L * Lt / den,
            num_U * L * np.exp(xs) / den, +1.0,
        )
    if np.any(right):
        xs = xi[right]
        G = Lt * (-c1 * math.exp(-c1 * cfg.t0) + c2 * math.exp(-c2 * cfg.t0)) + L * (
            d1 * math.exp(d1 * sig) - d2 * math.exp(d2 * sig)
        )
        den = L * Lt + G * np.exp(-xs)
        _require_positive(den, "right-piece denominator")
        num_U = d1 * d1 * math.exp(d1 * sig) - d2 * d2 * math.exp(d2 * sig)
        _tail_fields(
            out, right, xs - math.log(L * Lt) + np.log(den), L * Lt / den,
            num_U * L * np.exp(-xs) / den, -1.0,
        )
    if np.any(mid):
        xs = xi[mid]
        S = _s_of(cfg, xs)
        Sp = _s_prime_of(cfg, xs)
        ed1 = math.exp(d1 * sig)
        ed2 = math.exp(d2 * sig)
        Et = math.exp(-Lt * sig)
        one_minus_Et = -math.expm1(-Lt * sig)
        neg_num = (d1 - d2 * Et) * (S + 1.0) - Lt * ed2 * (S - 1.0)
        den_m = Lt * (S + 1.0) + (d2 * ed1 - d1 * ed2) * (S - 1.0)
        _require_positive(neg_num, "middle-piece log numerator")
        _require_positive(den_m, "middle-piece log denominator")
        prod = den_m * neg_num
        y = d1 * sig + np.log(neg_num / den_m)
        y_xi = -2.0 * d1 * d2 * ed1 * one_minus_Et**2 * Sp / prod
        num_U = Lt * (
            (d1 * d1 - d2 * d2 * Et) * np.square(S + 1.0)
            - 2.0 * (d1 * d1 - d2 * d2) * ed2 * (np.square(S) - 1.0)
            + ed2 * (d1 * d1 * ed2 - d2 * d2 * ed1) * np.square(S - 1.0)
        )
        U = num_U / prod
        # -4 p1 p2 e^{q1-q2} y_xi for the post-breaking pair, cancelled form
        cross = -8.0 * d1 * d2 * Lt * Lt * ed2 * Sp / prod
        h_bar = U * U * y_xi + cross
        h = h_bar - 2.0 * cfg.alpha * c1 * c2 * Sp
        pair = eulerian.trajectories(cfg, t)
        ux_mid = pair.p2 * np.exp(y - pair.q2) - pair.p1 * np.exp(pair.q1 - y)
        out["y"][mid] = y
        out["y_xi"][mid] = y_xi
        out["U"][mid] = U
        out["U_xi"][mid] = ux_mid * y_xi
        out["h"][mid] = h
        out["h_bar"][mid] = h_bar
    return out


def fields_at(cfg: Config, t: float, xi) -> dict[str, np.ndarray]:
    """All six fields at time t on an array of labels (branch-dispatched).

    Exactly at breaking (|t - t0| < 1e-9) the finite t0-limit block is
    used; the pair-parameter blow-up never enters any formula here.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if abs(t - cfg.t0) < BLOWUP_GUARD:
        return _fields_breaking(cfg, xi)
    if t < cfg.t0:
        return _fields_pre(cfg, t, xi)
    if cfg.alpha == 1.0:
        return _fields_post_dissipative(cfg, t, xi)
    return _fields_post_general(cfg, t, xi)


# ----------------------------------------------------------------------
# scalar interface
# ----------------------------------------------------------------------


def _sample(fields: dict[str, np.ndarray], i: int = 0) -> LagrangianSample:
    return LagrangianSample(**{k: float(v[i]) for k, v in fields.items()})


def initial_profile(cfg: Config, xi: float) -> LagrangianSample:
    """State at t = 0: identity characteristic carrying the initial data."""
    u0 = eulerian.eval_u(cfg, 0.0, xi)
    ux0 = eulerian.eval_ux(cfg, 0.0, xi)
    return LagrangianSample(y=xi, y_xi=1.0, U=u0, U_xi=ux0, h=ux0 * ux0, h_bar=ux0 * ux0)


def profile_pre(cfg: Config, t: float, xi: float) -> LagrangianSample:
    """Closed form for t < t0."""
    if t >= cfg.t0:
        raise BranchError(f"profile_pre needs t < t0 = {cfg.t0}, got {t}")
    return _sample(_fields_pre(cfg, t, np.asarray([xi], dtype=float)))


def profile_breaking(cfg: Config, xi: float) -> LagrangianSample:
    """The t0-limit profile; on the collapsed piece h_bar = (1-alpha) h."""
    return _sample(_fields_breaking(cfg, np.asarray([xi], dtype=float)))


def profile_post_dissipative(cfg: Config, t: float, xi: float) -> LagrangianSample:
    """Closed form for t > t0 in the fully dissipative case alpha = 1."""
    if cfg.alpha != 1.0:
        raise BranchError(f"alpha = {cfg.alpha} != 1")
    if t <= cfg.t0:
        raise BranchError(f"needs t > t0 = {cfg.t0}, got {t}")
    return _sample(_fields_post_dissipative(cfg, t, np.asarray([xi], dtype=float)))


def profile_post_general(cfg: Config, t: float, xi: float) -> LagrangianSample:
    """Closed form for t > t0, alpha in [0, 1); for alpha = 0 it continues
    the pre-breaking formulas (d_j = c_j)."""
    if cfg.alpha == 1.0:
        raise BranchError("alpha = 1 is the dissipative branch")
    if t <= cfg.t0:
        raise BranchError(f"needs t > t0 = {cfg.t0}, got {t}")
    return _sample(_fields_post_general(cfg, t, np.asarray([xi], dtype=float)))


def sample_at(cfg: Config, t: float, xi: float) -> LagrangianSample:
    """Branch-dispatched sample at one (t, xi)."""
    return _sample(fields_at(cfg, t, np.asarray([xi], dtype=float)))
