"""Validated collision parameters and the constants derived from them.

A collision is specified by four scalars: the incoming peakon strength
``c1 > 0``, the antipeakon strength ``c2 < 0``, the breaking time
``t0 > 0`` and the dissipation fraction ``alpha`` in [0, 1].  Everything
else (post-breaking strengths ``d1, d2``, energies, decay rates) is
computed once in :func:`derive` and cached, so all modules share one
rounding of the square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import RangeError, SignError, SymmetricCaseError

# Below this, c1 + c2 counts as zero and the collision as fully symmetric.
SYMMETRIC_TOL = 1e-12


@dataclass(frozen=True)
class Config:
    """Collision parameters.  Construct through :func:`make_config`."""

    c1: float
    c2: float
    t0: float
    alpha: float


@dataclass(frozen=True)
class DerivedConstants:
    """Constants shared by all solution branches.

    L       decay rate c1 - c2 of the incoming pair
    d1, d2  post-breaking strengths (roots of x^2 - (c1+c2)x + (1-alpha)c1c2)
    Ltilde  d1 - d2
    E2      energy 2c1^2 + 2c2^2 before breaking
    E2tilde energy 2d1^2 + 2d2^2 after breaking (= E2 + 4*alpha*c1*c2)
    """

    L: float
    d1: float
    d2: float
    Ltilde: float
    E2: float
    E2tilde: float


def make_config(c1: float, c2: float, t0: float, alpha: float) -> Config:
    """Validate raw scalars and return a `Config`.

    Raises
    ------
    SignError
        unless c1 > 0 > c2.
    RangeError
        if t0 <= 0 or alpha outside [0, 1], or any value is not finite.
    SymmetricCaseError
        if |c1 + c2| < 1e-12.  The symmetric collision annihilates at
        breaking and needs a separate (much simpler) treatment; for
        alpha = 1 the continuation would be the zero solution.  Rejected
        uniformly for every alpha.
    """
    c1, c2, t0, alpha = float(c1), float(c2), float(t0), float(alpha)
    for name, v in (("c1", c1), ("c2", c2), ("t0", t0), ("alpha", alpha)):
        if not math.isfinite(v):
            raise RangeError(f"{name} must be finite, got {v!r}")
    if not (c1 > 0.0 > c2):
        raise SignError(f"need c1 > 0 > c2, got c1={c1}, c2={c2}")
    if t0 <= 0.0:
        raise RangeError(f"breaking time t0 must be positive, got {t0}")
    if not (0.0 <= alpha <= 1.0):
        raise RangeError(f"dissipation fraction alpha must lie in [0, 1], got {alpha}")
    if abs(c1 + c2) < SYMMETRIC_TOL:
        raise SymmetricCaseError(
            f"|c1 + c2| = {abs(c1 + c2):.3e} < {SYMMETRIC_TOL:.0e}: "
            "the fully symmetric collision is not supported"
        )
    return Config(c1, c2, t0, alpha)


@lru_cache(maxsize=None)
def derive(cfg: Config) -> DerivedConstants:
    """Compute the derived constants for ``cfg`` (cached per config)."""
    c1, c2, alpha = cfg.c1, cfg.c2, cfg.alpha
    L = c1 - c2
    m = 0.5 * (c1 + c2)
    # d1 is the larger root; the discriminant is >= m^2 > 0 because
    # -(1 - alpha) c1 c2 >= 0.
    root = math.sqrt(m * m - (1.0 - alpha) * c1 * c2)
    d1 = m + root
    d2 = m - root
    E2 = 2.0 * (c1 * c1 + c2 * c2)
    E2tilde = 2.0 * (d1 * d1 + d2 * d2)
    return DerivedConstants(L=L, d1=d1, d2=d2, Ltilde=d1 - d2, E2=E2, E2tilde=E2tilde)


_FIELDS = ("c1", "c2", "t0", "alpha")


def config_to_text(cfg: Config) -> str:
    """Serialize to the flat ``key = value`` format used by the CLI."""
    return "".join(f"{k} = {getattr(cfg, k):.17g}\n" for k in _FIELDS)


def config_from_text(text: str) -> Config:
    """Parse the flat key-value format (blank lines and ``#`` comments ok)."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RangeError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise RangeError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = float(val)
        except ValueError as exc:
            raise RangeError(f"line {lineno}: bad number {val.strip()!r}") from exc
    missing = [k for k in _FIELDS if k not in values]
    if missing:
        raise RangeError(f"missing keys: {', '.join(missing)}")
    return make_config(values["c1"], values["c2"], values["t0"], values["alpha"])
