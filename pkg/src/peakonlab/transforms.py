"""Maps between Eulerian and Lagrangian coordinates, plus relabeling.

``to_lagrangian`` inverts the monotone function F(y) = nu((-inf, y)) + y
node by node (vectorized bisection); where F jumps across an atom the
preimage is a plateau on which y sits at the atom location.
``to_eulerian`` pushes the energy densities forward through y: plateaus
become atoms, elsewhere the density is h/y_xi at the inverted label.

Profiles sampled from closed forms (or produced by ``to_lagrangian``,
whose bisection can be re-run at any label) carry a ``resampler`` so
that relabeling, inversion and mass quadrature are exact rather than
interpolated; profiles coming out of a time integrator are purely
discrete and fall back to grid-level interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from . import lagrangian
from .errors import ConvergenceError, DomainError, MonotonicityError
from .lagrangian import FIELD_NAMES, LagrangianSample
from .measures import EulerianState, Measure
from .params import Config

# A node is part of a collapsed (plateau) run when y_xi falls below this.
PLATEAU_YXI_TOL = 1e-10
# Plateau runs with less accumulated h than this carry no atom.
PLATEAU_MASS_TOL = 1e-12
BISECT_MAX_ITER = 200

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class LagrangianProfile:
    """Six fields sampled on a nondecreasing label grid at one time."""

    xi: np.ndarray
    y: np.ndarray
    y_xi: np.ndarray
    U: np.ndarray
    U_xi: np.ndarray
    h: np.ndarray
    h_bar: np.ndarray
    t: float
    breakpoints: tuple[float, ...] = ()
    resampler: Callable[[np.ndarray], dict[str, np.ndarray]] | None = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.xi.size < 2:
            raise DomainError("profile needs at least two grid nodes")
        if np.any(np.diff(self.xi) < 0.0):
            raise MonotonicityError("xi grid must be nondecreasing")

    @property
    def n(self) -> int:
        return self.xi.size

    def sample(self, i: int) -> LagrangianSample:
        return LagrangianSample(
            y=float(self.y[i]), y_xi=float(self.y_xi[i]), U=float(self.U[i]),
            U_xi=float(self.U_xi[i]), h=float(self.h[i]), h_bar=float(self.h_bar[i]),
        )

    def fields(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in FIELD_NAMES}

    def replace_fields(self, t: float, **fields) -> "LagrangianProfile":
        """New profile on the same grid (integrator output: no resampler)."""
        return LagrangianProfile(
            xi=self.xi, t=t, breakpoints=self.breakpoints, resampler=None, **fields
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("t,xi,y,y_xi,U,U_xi,h,h_bar\n")
            for i in range(self.n):
                row = (self.t, self.xi[i], self.y[i], self.y_xi[i], self.U[i],
                       self.U_xi[i], self.h[i], self.h_bar[i])
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class RelabelCheckReport:
    """Discrete membership check for the Lagrangian solution set."""

    min_slope: float
    is_member: bool
    violations: tuple[tuple[float, str], ...]
    max_inverse: float  # sup of 1/(y_xi + h) over the grid


# ----------------------------------------------------------------------
# grids and closed-form profiles
# ----------------------------------------------------------------------


def clustered_grid(
    cfg: Config, xi_min: float, xi_max: float, n_base: int,
    ratio: float = 0.7, per_side: int = 40,
) -> np.ndarray:
    """Uniform grid plus geometric refinement toward q1(0) and q2(0).

    y_xi collapses at those labels as t -> t0 and the middle-piece
    denominators nearly cancel, so resolution is concentrated there.
    """
    base = np.linspace(xi_min, xi_max, n_base)
    step = (xi_max - xi_min) / (n_base - 1)
    extras = [base]
    for q in lagrangian.initial_peaks(cfg):
        if not xi_min < q < xi_max:
            continue
        offs = step * ratio ** np.arange(1, per_side + 1)
        extras.append(np.clip(q - offs, xi_min, xi_max))
        extras.append(np.clip(q + offs, xi_min, xi_max))
        nudge = 1e-12 * (1.0 + abs(q))
        extras.append(np.asarray([q - nudge, q + nudge]))
    return np.unique(np.concatenate(extras))


def seamed_grid(
    cfg: Config, xi_min: float, xi_max: float, n: int, blocks_per_segment: int = 6
) -> np.ndarray:
    """n-node grid of uniform blocks with tight node pairs at q1(0), q2(0).

    Resolution is equidistributed against the breaking-time monitor
    1 + y_xi(t0) + h(t0): the characteristic map is strongly stretched
    next to the collapsed piece and the energy density is peaked inside
    it, and both structures set the accuracy of the kernel quadrature
    long after breaking.  Each seam-delimited segment is split into
    blocks of equal monitor mass, every block uniform in xi, joints
    doubled; piecewise-constant spacing keeps the trapezoid sums of the
    nonlocal terms amenable to endpoint (Euler-Maclaurin) corrections.
    """
    seams = [q for q in lagrangian.initial_peaks(cfg) if xi_min < q < xi_max]
    if not seams:
        return np.linspace(xi_min, xi_max, n)
    edges = [xi_min, *seams, xi_max]
    nudges = [0.0] + [1e-12 * (1.0 + abs(q)) for q in seams] + [0.0]
    segments = [
        (edges[k] + nudges[k], edges[k + 1] - nudges[k + 1])
        for k in range(len(edges) - 1)
    ]

    probes, monitors, seg_mass = [], [], []
    for a, b in segments:
        probe = np.linspace(a, b, 1200)
        f = lagrangian.fields_at(cfg, cfg.t0, probe)
        m = np.minimum(25.0, 1.0 + f["y_xi"] + f["h"])
        probes.append(probe)
        monitors.append(m)
        seg_mass.append(float(trapezoid(m, probe)))
    total_mass = sum(seg_mass)

    pieces = []
    budget = n
    for k, (a, b) in enumerate(segments):
        n_seg = max(10, int(round(n * seg_mass[k] / total_mass)))
        if k == len(segments) - 1:
            n_seg = max(10, budget)
        budget -= n_seg
        cum = np.concatenate([[0.0], np.cumsum(
            0.5 * (monitors[k][1:] + monitors[k][:-1]) * np.diff(probes[k])
        )])
        # block edges at equal monitor mass, then each block uniform
        nb = max(1, min(blocks_per_segment, n_seg // 8))
        targets = np.linspace(0.0, cum[-1], nb + 1)
        block_edges = np.interp(targets, cum, probes[k])
        counts = np.maximum(4, np.round(np.diff(targets) / cum[-1] * n_seg).astype(int))
        counts[-1] += n_seg - int(counts.sum())
        counts[-1] = max(counts[-1], 4)
        for lo, hi, c in zip(block_edges[:-1], block_edges[1:], counts):
            pieces.append(np.linspace(lo, hi, c))
    grid = np.concatenate(pieces)
    return grid[np.argsort(grid, kind="stable")]


def closed_form_profile(cfg: Config, t: float, xi_grid) -> LagrangianProfile:
    """Sample the closed-form fields on a grid; exact resampling attached."""
    xi = np.asarray(xi_grid, dtype=float)
    f = lagrangian.fields_at(cfg, t, xi)
    return LagrangianProfile(
        xi=xi, t=t, breakpoints=lagrangian.initial_peaks(cfg),
        resampler=lambda xs: lagrangian.fields_at(cfg, t, np.asarray(xs, dtype=float)),
        **f,
    )


# ----------------------------------------------------------------------
# quadrature helpers (vectorized Gauss-Legendre panels)
# ----------------------------------------------------------------------


def _gl_panels(a: float, b: float, cuts=(), panels_per_unit: float = 12.0):
    edges = [np.linspace(a, b, max(2, int((b - a) * panels_per_unit) + 2))]
    edges.append(np.asarray([c for c in cuts if a < c < b]))
    return np.unique(np.concatenate(edges))


def _gl_mass(density, a: float, b: float, cuts=()) -> float:
    """Integral of a vectorized density over [a, b], split at ``cuts``."""
    if a >= b:
        return 0.0
    edges = _gl_panels(a, b, cuts)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(density(pts.ravel())).reshape(pts.shape)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


class _Cumulative:
    """Panel-precomputed x -> density measure of (-inf, x).

    Panels are split at the measure's breakpoints, so every panel is
    smooth and ten-point Gauss quadrature is accurate to rounding.
    """

    def __init__(self, m: Measure):
        a, b = m.support_bound()
        self.edges = _gl_panels(a, b, m.breakpoints)
        self.density = m.density
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        half = 0.5 * np.diff(self.edges)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.asarray(self.density(pts.ravel())).reshape(pts.shape)
        masses = half * (vals @ _GL_WEIGHTS)
        self.cum = np.concatenate([[0.0], np.cumsum(masses)])

    def mass_below(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xc = np.clip(x, self.edges[0], self.edges[-1])
        k = np.clip(np.searchsorted(self.edges, xc, side="right") - 1, 0,
                    self.edges.size - 2)
        lo = self.edges[k]
        mid = 0.5 * (lo + xc)
        half = 0.5 * (xc - lo)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.asarray(self.density(pts.ravel())).reshape(pts.shape)
        return self.cum[k] + half * (vals @ _GL_WEIGHTS)


def _atom_mass_below(atoms, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for loc, mass in atoms:
        out += np.where(x > loc, mass, 0.0)
    return out


# ----------------------------------------------------------------------
# Eulerian -> Lagrangian
# ----------------------------------------------------------------------


def to_lagrangian(state: EulerianState, xi_grid) -> LagrangianProfile:
    """Map (u, mu, nu) to characteristic coordinates on ``xi_grid``.

    The grid is augmented with the exact label preimages of the nu
    breakpoints and of every atom's plateau edges, so downstream
    quadrature can split segments exactly.

    Raises ``ConvergenceError`` if the bisection for F(y) = xi fails
    within 200 iterations (non-finite or non-monotone input).
    """
    nu, mu = state.nu, state.mu
    cumulative = _Cumulative(nu)
    atoms = nu.atoms
    mu_atoms = dict(mu.atoms)

    def F(y: np.ndarray) -> np.ndarray:
        return cumulative.mass_below(y) + _atom_mass_below(atoms, y) + y

    plateaus = []  # (xi_low, xi_high, location, nu mass)
    for loc, mass in atoms:
        fm = float(F(np.asarray([loc]))[0])
        plateaus.append((fm, fm + mass, loc, mass))
    total = float(cumulative.cum[-1] + sum(m for _, m in atoms))
    y_lo_floor = float(cumulative.edges[0]) - 1.0
    y_hi_ceil = float(cumulative.edges[-1]) + 1.0

    def solve(xi: np.ndarray) -> dict[str, np.ndarray]:
        xi = np.asarray(xi, dtype=float)
        lo = np.full(xi.shape, min(y_lo_floor, float(xi.min()) - total - 1.0))
        hi = np.full(xi.shape, max(y_hi_ceil, float(xi.max()) + 1.0))
        width_tol = 1e-14 * (1.0 + np.abs(xi))
        for _ in range(BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            high = F(mid) >= xi
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
            if np.all(hi - lo <= width_tol):
                break
        else:
            raise ConvergenceError("bisection for F(y) = xi did not converge")
        y = 0.5 * (lo + hi)
        resid = np.abs(F(y) - xi)
        on_plateau = np.zeros(xi.shape, dtype=bool)
        f_atom = np.zeros(xi.shape)
        for fm, fp, loc, mass in plateaus:
            tol = 1e-11 * (1.0 + abs(fm))
            sel = (xi >= fm - tol) & (xi <= fp + tol)
            on_plateau |= sel
            y[sel] = loc
            f_atom[sel] = mu_atoms.get(loc, 0.0) / mass if mass > 0.0 else 1.0
        bad = ~on_plateau & (resid > 1e-9 * (1.0 + np.abs(xi)))
        if np.any(bad):
            raise ConvergenceError(
                f"{int(bad.sum())} labels did not invert "
                f"(first xi = {xi[bad][0]}, residual {resid[bad][0]:.3e})"
            )
        dens_nu = np.asarray(nu.density(y), dtype=float)
        dens_mu = np.asarray(mu.density(y), dtype=float)
        y_xi = np.where(on_plateau, 0.0, 1.0 / (1.0 + dens_nu))
        h = np.where(on_plateau, 1.0, dens_nu * y_xi)
        frac = np.where(dens_nu > 0.0, dens_mu / np.maximum(dens_nu, 1e-300), 1.0)
        h_bar = np.where(on_plateau, f_atom, frac) * h
        U = np.asarray(state.u(y), dtype=float)
        U_xi = np.where(on_plateau, 0.0, np.asarray(state.ux(y), dtype=float) * y_xi)
        return {"y": y, "y_xi": y_xi, "U": U, "U_xi": U_xi, "h": h, "h_bar": h_bar}

    seam_labels = [float(F(np.asarray([b]))[0]) for b in nu.breakpoints]
    seam_labels += [v for fm, fp, _, _ in plateaus for v in (fm, fp)]
    xi = np.unique(np.concatenate([np.asarray(xi_grid, dtype=float), seam_labels]))
    return LagrangianProfile(
        xi=xi, t=state.t, breakpoints=tuple(sorted(set(seam_labels))),
        resampler=solve, **solve(xi),
    )


# ----------------------------------------------------------------------
# Lagrangian -> Eulerian
# ----------------------------------------------------------------------


def _plateau_runs(profile: LagrangianProfile):
    """Index ranges [i, j] of collapsed runs spanning >= 2 grid cells whose
    accumulated h is an atom's worth of mass."""
    flat = profile.y_xi <= PLATEAU_YXI_TOL
    runs = []
    i = 0
    n = profile.n
    while i < n:
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flat[j + 1]:
            j += 1
        if j - i >= 2:
            mass = float(trapezoid(profile.h[i: j + 1], profile.xi[i: j + 1]))
            if mass > PLATEAU_MASS_TOL:
                runs.append((i, j))
        i = j + 1
    return runs


def _invert_labels(profile: LagrangianProfile, x: np.ndarray) -> np.ndarray:
    """Labels xi* with y(xi*) = x (monotone inversion; clipped to range)."""
    if profile.resampler is None:
        return np.interp(x, profile.y, profile.xi)
    lo = np.full(x.shape, profile.xi[0])
    hi = np.full(x.shape, profile.xi[-1])
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        high = profile.resampler(mid)["y"] >= x
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
        if np.all(hi - lo <= 1e-14 * (1.0 + np.abs(mid))):
            break
    else:
        raise ConvergenceError("label inversion did not converge")
    return 0.5 * (lo + hi)


def _u_from_profile(profile: LagrangianProfile, x: np.ndarray) -> np.ndarray:
    """u(x) = U at the inverted label; exponential tails outside the range."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inside = (x >= profile.y[0]) & (x <= profile.y[-1])
    left, right = x < profile.y[0], x > profile.y[-1]
    out[left] = profile.U[0] * np.exp(x[left] - profile.y[0])
    out[right] = profile.U[-1] * np.exp(profile.y[-1] - x[right])
    xin = x[inside]
    if profile.resampler is not None:
        labels = _invert_labels(profile, xin)
        out[inside] = profile.resampler(labels)["U"]
        return out
    # Discrete profile: between kinks u is locally A e^x + B e^{-x}; fit
    # that model through the cell endpoints (exact for peakon profiles),
    # falling back to linear interpolation on near-degenerate cells.
    idx = np.clip(np.searchsorted(profile.y, xin, side="right") - 1, 0,
                  profile.n - 2)
    y0, y1 = profile.y[idx], profile.y[idx + 1]
    u0, u1 = profile.U[idx], profile.U[idx + 1]
    dy = y1 - y0
    vals = np.empty_like(xin)
    tiny = dy <= 1e-9
    if np.any(tiny):
        w = np.zeros_like(xin[tiny])
        np.divide(xin[tiny] - y0[tiny], dy[tiny], out=w, where=dy[tiny] > 0.0)
        vals[tiny] = u0[tiny] + w * (u1[tiny] - u0[tiny])
    wide = ~tiny
    if np.any(wide):
        # solve [e^{-hh}, e^{hh}; e^{hh}, e^{-hh}] (a, b) = (u0, u1)
        xm = 0.5 * (y0[wide] + y1[wide])
        hh = 0.5 * dy[wide]
        det = -2.0 * np.sinh(2.0 * hh)
        ep, em = np.exp(hh), np.exp(-hh)
        a = (u0[wide] * em - u1[wide] * ep) / det
        b = (u1[wide] * em - u0[wide] * ep) / det
        z = xin[wide] - xm
        vals[wide] = a * np.exp(z) + b * np.exp(-z)
    out[inside] = vals
    return out


class _BackedPushforward(Measure):
    """Pushforward with an exactly resampled density: masses by panel GL."""

    def density_mass(self, a: float, b: float) -> float:
        if not a <= b:
            raise DomainError(f"need a <= b, got [{a}, {b}]")
        return _gl_mass(self.density, a, b, cuts=self.breakpoints)


class _DiscretePushforward(Measure):
    """Pushforward backed only by grid samples: interval masses integrate
    the label-space density between inverted labels with the trapezoid
    rule (accuracy is grid-limited)."""

    def __init__(self, profile, weight_name, density, breakpoints, atoms):
        super().__init__(density=density, breakpoints=breakpoints, atoms=atoms)
        object.__setattr__(self, "_profile", profile)
        object.__setattr__(self, "_weight", weight_name)

    def density_mass(self, a: float, b: float) -> float:
        if not a <= b:
            raise DomainError(f"need a <= b, got [{a}, {b}]")
        p = self._profile
        w = getattr(p, self._weight)
        xa, xb = np.interp([a, b], p.y, p.xi)
        grid = np.concatenate([[xa], p.xi[(p.xi > xa) & (p.xi < xb)], [xb]])
        vals = np.interp(grid, p.xi, w)
        return float(trapezoid(vals, grid)) - self.atom_mass(a, b)


def to_eulerian(profile: LagrangianProfile, x_grid):
    """Push a profile back to (u samples, mu, nu) on ``x_grid``.

    Collapsed runs of y (y_xi = 0 over at least two cells carrying mass)
    become atoms at the plateau value; elsewhere the densities are
    h_bar/y_xi for mu and h/y_xi for nu at the inverted label.
    """
    x = np.asarray(x_grid, dtype=float)
    u_samples = _u_from_profile(profile, x)

    runs = _plateau_runs(profile)
    atom_info = []
    for i, j in runs:
        loc = float(np.mean(profile.y[i: j + 1]))
        if profile.resampler is None:
            sl = slice(i, j + 1)
            mass_nu = float(trapezoid(profile.h[sl], profile.xi[sl]))
            mass_mu = float(trapezoid(profile.h_bar[sl], profile.xi[sl]))
        else:
            lo, hi = float(profile.xi[i]), float(profile.xi[j])
            cuts = profile.breakpoints
            mass_nu = _gl_mass(lambda s: profile.resampler(s)["h"], lo, hi, cuts)
            mass_mu = _gl_mass(lambda s: profile.resampler(s)["h_bar"], lo, hi, cuts)
        atom_info.append((loc, mass_mu, mass_nu))

    def make_density(weight: str):
        def dens(xq):
            xq = np.atleast_1d(np.asarray(xq, dtype=float))
            xc = np.clip(xq, profile.y[0], profile.y[-1])
            labels = _invert_labels(profile, xc)
            if profile.resampler is not None:
                f = profile.resampler(labels)
                w, yx = f[weight], f["y_xi"]
            else:
                w = np.interp(labels, profile.xi, getattr(profile, weight))
                yx = np.interp(labels, profile.xi, profile.y_xi)
            out = np.zeros_like(xq)
            ok = yx > PLATEAU_YXI_TOL
            out[ok] = w[ok] / yx[ok]
            out[(xq < profile.y[0]) | (xq > profile.y[-1])] = 0.0
            return out

        return dens

    breakpoints = [float(profile.y[0]), float(profile.y[-1])]
    breakpoints += [loc for loc, _, _ in atom_info]
    for b in profile.breakpoints:
        if profile.xi[0] <= b <= profile.xi[-1]:
            k = min(int(np.searchsorted(profile.xi, b)), profile.n - 1)
            breakpoints.append(float(profile.y[k]))
    bpts = tuple(sorted(set(breakpoints)))

    mu_atoms = tuple((loc, m) for loc, m, _ in atom_info if m > PLATEAU_MASS_TOL)
    nu_atoms = tuple((loc, m) for loc, _, m in atom_info if m > PLATEAU_MASS_TOL)
    if profile.resampler is not None:
        mu = _BackedPushforward(make_density("h_bar"), breakpoints=bpts, atoms=mu_atoms)
        nu = _BackedPushforward(make_density("h"), breakpoints=bpts, atoms=nu_atoms)
    else:
        mu = _DiscretePushforward(profile, "h_bar", make_density("h_bar"), bpts, mu_atoms)
        nu = _DiscretePushforward(profile, "h", make_density("h"), bpts, nu_atoms)
    return u_samples, mu, nu


# ----------------------------------------------------------------------
# membership and relabeling
# ----------------------------------------------------------------------


def check_F_membership(profile: LagrangianProfile) -> RelabelCheckReport:
    """Discrete verification of the Lagrangian set's pointwise conditions
    plus the lower slope bound of y + H that encodes relabeling validity."""
    p = profile
    violations: list[tuple[float, str]] = []

    def flag(mask, reason):
        for x in p.xi[mask][:5]:
            violations.append((float(x), reason))

    flag(p.y_xi < -1e-12, "y_xi < 0")
    flag(p.h < -1e-12, "h < 0")
    flag(p.h_bar < -1e-12, "h_bar < 0")
    flag(p.h_bar > p.h + 1e-12, "h_bar > h")
    compat = np.abs(p.y_xi * p.h_bar - p.U_xi**2)
    scale = 1.0 + np.abs(p.y_xi * p.h_bar) + p.U_xi**2
    flag(compat > 1e-9 * scale, "y_xi h_bar != U_xi^2")

    dxi = np.diff(p.xi)
    pos = dxi > 0.0
    cell_h = 0.5 * (p.h[:-1] + p.h[1:])
    slope = (np.diff(p.y)[pos] + cell_h[pos] * dxi[pos]) / dxi[pos]
    min_slope = float(np.min(slope)) if slope.size else math.inf
    max_inverse = float(np.max(1.0 / np.maximum(p.y_xi + p.h, 1e-300)))
    return RelabelCheckReport(
        min_slope=min_slope,
        is_member=(min_slope > 0.0 and not violations),
        violations=tuple(violations),
        max_inverse=max_inverse,
    )


def relabel(
    profile: LagrangianProfile,
    g: Callable[[np.ndarray], np.ndarray],
    gprime: Callable[[np.ndarray], np.ndarray] | None = None,
) -> LagrangianProfile:
    """Compose the profile with a strictly increasing reparametrization.

    y, U compose plainly; the derivative fields and both energy densities
    pick up the factor g'.  g' is taken from ``gprime`` when given and
    from centered differences of g on the grid otherwise.
    """
    xi = profile.xi
    gv = np.asarray(g(xi), dtype=float)
    if np.any(np.diff(gv) <= 0.0):
        raise MonotonicityError("g must be strictly increasing on the grid")
    gp = (np.asarray(gprime(xi), dtype=float) if gprime is not None
          else np.gradient(gv, xi))
    if np.any(gp <= 0.0):
        raise MonotonicityError("g' must be positive on the grid")

    if profile.resampler is not None:
        f = profile.resampler(gv)
    else:
        f = {name: np.interp(gv, profile.xi, getattr(profile, name))
             for name in FIELD_NAMES}
    new = {
        "y": f["y"], "U": f["U"],
        "y_xi": f["y_xi"] * gp, "U_xi": f["U_xi"] * gp,
        "h": f["h"] * gp, "h_bar": f["h_bar"] * gp,
    }
    new_resampler = None
    if profile.resampler is not None and gprime is not None:
        base = profile.resampler

        def new_resampler(xs):
            xs = np.asarray(xs, dtype=float)
            ff = base(np.asarray(g(xs), dtype=float))
            gg = np.asarray(gprime(xs), dtype=float)
            return {
                "y": ff["y"], "U": ff["U"], "y_xi": ff["y_xi"] * gg,
                "U_xi": ff["U_xi"] * gg, "h": ff["h"] * gg,
                "h_bar": ff["h_bar"] * gg,
            }

    return LagrangianProfile(
        xi=xi, t=profile.t, breakpoints=(), resampler=new_resampler, **new
    )
