"""Energy measures mu and nu: smooth densities plus point masses.

Both measures have absolutely continuous part ux^2 dx away from the
breaking time.  At t = t0 an amount -4 c1 c2 of energy concentrates at
the origin; nu keeps all of it as an atom while mu keeps only the
fraction (1 - alpha) that survives dissipation.  For t > t0 the retained
part re-enters the ux^2 density; the removed part stays in nu, either
spread over (q1(t), q2(t)) with density nu_m (alpha < 1) or riding along
with the peak as an atom (alpha = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import eulerian
from .errors import DomainError
from .eulerian import SolutionBranch
from .params import Config, derive

# Default spatial truncation for whole-line masses: the densities decay
# like e^{-2|x|}, so the tail beyond |x| = 40 + max|breakpoint| is
# below e^{-80} of the local scale.
TAIL_PAD = 40.0


@dataclass(frozen=True)
class Measure:
    """Positive measure: piecewise-smooth density plus finitely many atoms.

    ``density`` must accept scalars and ndarrays.  ``breakpoints`` are the
    kink locations of the density; quadrature splits there.  Atoms on an
    interval boundary count as inside (closed-interval convention).
    """

    density: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()

    def density_mass(self, a: float, b: float) -> float:
        """Integral of the density alone over [a, b]."""
        if not a <= b:
            raise DomainError(f"need a <= b, got [{a}, {b}]")
        if a == b:
            return 0.0
        cuts = sorted({a, b, *(p for p in self.breakpoints if a < p < b)})
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            val, _ = integrate.quad(
                self.density, lo, hi, limit=200, epsabs=1e-12, epsrel=1e-12
            )
            total += val
        return total

    def atom_mass(self, a: float, b: float) -> float:
        return sum(m for x, m in self.atoms if a <= x <= b)

    def interval_mass(self, a: float, b: float) -> float:
        return self.density_mass(a, b) + self.atom_mass(a, b)

    def support_bound(self) -> tuple[float, float]:
        """Interval outside which the measure is negligible."""
        anchors = [0.0, *self.breakpoints, *(x for x, _ in self.atoms)]
        return min(anchors) - TAIL_PAD, max(anchors) + TAIL_PAD

    def total(self) -> float:
        a, b = self.support_bound()
        return self.interval_mass(a, b)

    def to_json_dict(self, x_grid) -> dict:
        """Samples on a caller grid plus breakpoints and atoms."""
        xs = np.asarray(x_grid, dtype=float)
        dens = np.asarray(self.density(xs), dtype=float)
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "atoms": [{"x": float(x), "mass": float(m)} for x, m in self.atoms],
            "samples": [
                {"x": float(x), "density": float(d)} for x, d in zip(xs, dens)
            ],
        }


@dataclass(frozen=True)
class EulerianState:
    """The triple (u, mu, nu) at a fixed time, with ux along for the ride."""

    u: Callable[[np.ndarray], np.ndarray]
    ux: Callable[[np.ndarray], np.ndarray]
    mu: Measure
    nu: Measure
    t: float = field(default=0.0)


def total_mass(m: Measure, a: float, b: float) -> float:
    """Density integral plus atom masses over the closed interval [a, b]."""
    return m.interval_mass(a, b)


def _ux_squared(cfg: Config, t: float) -> Callable[[np.ndarray], np.ndarray]:
    def dens(x):
        v = eulerian.eval_ux(cfg, t, x)
        return np.square(v)

    return dens


def mu_at(cfg: Config, t: float) -> Measure:
    """The measure mu(t): density ux^2, plus the surviving atom at t0."""
    branch = eulerian.classify(cfg, t)
    dens = _ux_squared(cfg, t)
    if branch is SolutionBranch.AT_BREAKING:
        mass = -4.0 * (1.0 - cfg.alpha) * cfg.c1 * cfg.c2
        return Measure(dens, breakpoints=(0.0,), atoms=((0.0, mass),))
    return Measure(dens, breakpoints=eulerian.peak_positions(cfg, t))


def nu_at(cfg: Config, t: float) -> Measure:
    """The measure nu(t): mu before breaking, full bookkeeping afterwards."""
    branch = eulerian.classify(cfg, t)
    dens = _ux_squared(cfg, t)
    if branch is SolutionBranch.PRE_BREAKING:
        return Measure(dens, breakpoints=eulerian.peak_positions(cfg, t))
    if branch is SolutionBranch.AT_BREAKING:
        mass = -4.0 * cfg.c1 * cfg.c2
        return Measure(dens, breakpoints=(0.0,), atoms=((0.0, mass),))
    if branch is SolutionBranch.POST_ONE_PEAKON:
        mass = -4.0 * cfg.c1 * cfg.c2
        loc = (cfg.c1 + cfg.c2) * (t - cfg.t0)
        return Measure(dens, breakpoints=(loc,), atoms=((loc, mass),))
    pair = eulerian.trajectories(cfg, t)

    def dens_with_spread(x):
        x = np.asarray(x, dtype=float)
        out = np.square(eulerian.eval_ux(cfg, t, x))
        inside = (x > pair.q1) & (x < pair.q2)
        if np.any(inside):
            out = np.asarray(out, dtype=float)
            out[inside] += _nu_m_raw(cfg, t, np.asarray(x)[inside])
        return out

    return Measure(dens_with_spread, breakpoints=(pair.q1, pair.q2))


def _nu_m_raw(cfg: Config, t: float, x: np.ndarray) -> np.ndarray:
    """The spread density between the post-breaking peaks (no domain checks).

    The squared denominator is assembled from exponentials of magnitude
    up to |x| + Ltilde*(t - t0); when any exponent passes 300 the whole
    expression is evaluated in log space to dodge overflow/underflow.
    """
    dc = derive(cfg)
    d1, d2, Lt = dc.d1, dc.d2, dc.Ltilde
    sig = t - cfg.t0
    one_minus_E = -math.expm1(-Lt * sig)
    pref = 4.0 * cfg.alpha * (1.0 - cfg.alpha) * (cfg.c1 * cfg.c2) ** 2 * one_minus_E**2
    a_coef = Lt + d2 * math.exp(d1 * sig) - d1 * math.exp(d2 * sig)
    b_coef = d1 - d2 * math.exp(-Lt * sig) - Lt * math.exp(d2 * sig)
    if max(abs(d1 * sig), abs(d2 * sig), float(np.max(np.abs(x)))) < 300.0:
        W = np.exp(x - d1 * sig) * a_coef - b_coef
        return pref * np.exp(x) / np.square(W)
    # log-space fallback: nu_m = pref * e^x / W^2 with
    # W = e^{x - d1 sig} a - b; |W| = e^{m} |e^{la - m} sa - e^{lb - m} sb|
    la = x - d1 * sig + math.log(abs(a_coef)) if a_coef != 0.0 else -math.inf
    lb = math.log(abs(b_coef)) if b_coef != 0.0 else -math.inf
    m = np.maximum(la, lb)
    sa, sb = math.copysign(1.0, a_coef), math.copysign(1.0, b_coef)
    inner = sa * np.exp(la - m) - sb * np.exp(lb - m)
    log_w2 = 2.0 * (m + np.log(np.abs(inner)))
    return np.exp(math.log(pref) + x - log_w2)


def nu_m_density(cfg: Config, t: float, x: float) -> float:
    """Density of the spread-out removed energy at (t, x), t > t0, alpha < 1.

    Vanishes identically as alpha -> 0 or 1 (prefactor alpha(1-alpha));
    alpha = 1 itself has no two-peakon interval and is rejected.
    """
    if cfg.alpha == 1.0:
        raise DomainError("alpha = 1: no two-peakon interval carries spread energy")
    if t <= cfg.t0:
        raise DomainError(f"nu_m lives on t > t0 = {cfg.t0}, got t = {t}")
    pair = eulerian.trajectories(cfg, t)
    if not (pair.q1 < x < pair.q2):
        raise DomainError(
            f"x = {x} outside the open interval ({pair.q1}, {pair.q2}) at t = {t}"
        )
    return float(_nu_m_raw(cfg, t, np.asarray(x, dtype=float)))


def state_at(cfg: Config, t: float) -> EulerianState:
    """Bundle (u, ux, mu, nu) at time t for the coordinate transforms."""
    return EulerianState(
        u=lambda x: eulerian.eval_u(cfg, t, x),
        ux=lambda x: eulerian.eval_ux(cfg, t, x),
        mu=mu_at(cfg, t),
        nu=nu_at(cfg, t),
        t=t,
    )
