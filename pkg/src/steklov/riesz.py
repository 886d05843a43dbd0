"""Riesz means, eigenvalue sums, and related spectral functionals.

The central object is R_gamma(z) = sum_j (z - nu_j)_+^gamma computed from a
stored spectrum.  R_0 is the counting function with the STRICT convention
N(z) = #{nu_j < z}.  Everything that reads a spectrum refuses z beyond the
largest stored eigenvalue -- values past that point would silently undercount
-- raising :class:`ValidityCeilingError` instead of clamping.

Riesz exponents lift by one integral,

    R_{gamma+rho}(z) = Gamma(gamma+rho+1) / (Gamma(gamma+1) Gamma(rho))
                       * integral_0^z (z-t)^{rho-1} R_gamma(t) dt,

implemented with composite Gauss-Legendre panels split at the eigenvalues
(R_gamma is piecewise smooth there); for rho < 1 the endpoint singularity is
removed by the substitution t = z - u^{1/rho} first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .spectra import Spectrum

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class ValidityCeilingError(ValueError):
    """z exceeds the largest stored eigenvalue; the tail would be undercounted."""

    def __init__(self, z: float, ceiling: float):
        self.z = float(z)
        self.ceiling = float(ceiling)
        super().__init__(
            f"z = {z} exceeds the validity ceiling {ceiling} (largest stored "
            "eigenvalue); store more eigenvalues instead of extrapolating")


@dataclass(eq=False)
class RieszCurve:
    """R_gamma sampled on a grid, remembering how far it can be trusted.

    When built from a Spectrum the curve keeps a reference to it, so that
    iteration integrates the exact piecewise form instead of re-sampling.
    """

    gamma: float
    grid: np.ndarray
    values: np.ndarray
    validity_ceiling: float
    spectrum: Optional[Spectrum] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        vals = np.asarray(self.values, dtype=float).ravel()
        if grid.size != vals.size or grid.size < 2:
            raise ValueError("grid and values must have equal length >= 2")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(vals))):
            raise ValueError("curve contains non-finite entries")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(np.diff(vals) < -1e-12 * max(1.0, float(np.abs(vals).max()))):
            raise ValueError("Riesz means are nondecreasing; values are not")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        grid.setflags(write=False)
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals


def _check_gamma(gamma: float) -> float:
    g = float(gamma)
    if not (g >= 0 and math.isfinite(g)):
        raise ValueError(f"Riesz exponent must be a finite real >= 0, got {gamma}")
    return g


def riesz_mean_grid(s: Spectrum, gamma: float, zs) -> np.ndarray:
    """R_gamma at each grid point, vectorized.

    Integer gamma <= 3 uses prefix sums of eigenvalue powers (exact binomial
    expansion); other exponents fall back to chunked broadcasting.  Summation
    order is ascending in the eigenvalues, so results are deterministic.
    """
    g = _check_gamma(gamma)
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    if not np.all(np.isfinite(zs)):
        raise ValueError("evaluation points must be finite")
    over = zs > s.ceiling
    if np.any(over):
        bad = float(zs[over][0])
        raise ValidityCeilingError(bad, s.ceiling)

    vals = s.values
    counts = np.searchsorted(vals, zs, side="left")
    if g == 0.0:
        return counts.astype(float)
    if g in (1.0, 2.0, 3.0):
        p = int(g)
        prefix = [np.concatenate(([0.0], np.cumsum(vals ** j)))
                  for j in range(1, p + 1)]
        out = zs ** p * counts
        sign = -1.0
        for j in range(1, p + 1):
            out += sign * math.comb(p, j) * zs ** (p - j) * prefix[j - 1][counts]
            sign = -sign
        return out
    out = np.empty_like(zs)
    chunk = max(1, int(4e7) // max(1, vals.size))
    for i in range(0, zs.size, chunk):
        zblock = zs[i:i + chunk, None]
        diff = zblock - vals[None, :]
        np.clip(diff, 0.0, None, out=diff)
        out[i:i + chunk] = np.sum(diff ** g, axis=1)
    return out


def riesz_mean(s: Spectrum, gamma: float, z: float) -> float:
    """R_gamma(z) = sum (z - nu_j)_+^gamma; gamma = 0 counts strictly below z."""
    return float(riesz_mean_grid(s, gamma, [z])[0])


def riesz_curve(s: Spectrum, gamma: float, grid) -> RieszCurve:
    """Sample R_gamma on a grid (all points must sit under the ceiling)."""
    grid = np.asarray(grid, dtype=float).ravel()
    vals = riesz_mean_grid(s, gamma, grid)
    meta = dict(s.meta)
    meta["problem"] = s.problem
    meta["source"] = s.source
    return RieszCurve(float(gamma), grid, vals, s.ceiling, spectrum=s, meta=meta)


# -- iteration --------------------------------------------------------------

def _gl_panel_integral(f, a: float, b: float) -> float:
    """8-point Gauss-Legendre on [a, b] applied to a vectorized f."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def _panels(knots: np.ndarray, lo: float, hi: float) -> np.ndarray:
    inner = knots[(knots > lo) & (knots < hi)]
    return np.concatenate(([lo], inner, [hi]))


def riesz_iterate(curve: RieszCurve, rho: float, z: float,
                  tol: float = 1e-6) -> float:
    """Lift the curve's exponent by rho > 0 and evaluate at z.

    Spectrum-backed curves are integrated exactly between eigenvalue knots
    (composite 8-point Gauss-Legendre; for rho < 1 after the substitution
    t = z - u^{1/rho}, which removes the (z-t)^{rho-1} endpoint singularity).
    Grid-only curves integrate their piecewise-linear interpolant in closed
    form and raise if a two-level refinement estimate exceeds ``tol``.
    """
    rho = float(rho)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    z = float(z)
    if z > curve.validity_ceiling:
        raise ValidityCeilingError(z, curve.validity_ceiling)
    if z <= 0:
        return 0.0
    gamma = curve.gamma
    front = math.gamma(gamma + rho + 1) / (math.gamma(gamma + 1) * math.gamma(rho))

    if curve.spectrum is not None:
        s = curve.spectrum
        evaluate = lambda t: riesz_mean_grid(s, gamma, t)
        knots = s.values
        if rho >= 1.0:
            panels = _panels(knots, 0.0, z)
            total = 0.0
            for a, b in zip(panels[:-1], panels[1:]):
                total += _gl_panel_integral(
                    lambda t: (z - t) ** (rho - 1.0) * evaluate(t), a, b)
        else:
            # t = z - u^{1/rho}:   integral_0^{z^rho} R_gamma(z - u^{1/rho}) du / rho
            u_knots = (z - knots[(knots > 0) & (knots < z)]) ** rho
            panels = np.sort(np.concatenate(([0.0], u_knots, [z ** rho])))
            total = 0.0
            for a, b in zip(panels[:-1], panels[1:]):
                if b - a <= 0:
                    continue
                total += _gl_panel_integral(
                    lambda u: evaluate(z - u ** (1.0 / rho)), a, b)
            total /= rho
        return front * total

    grid, fvals = curve.grid, curve.values
    if z > grid[-1] + 1e-12 * max(1.0, abs(z)) or grid[0] > 1e-12:
        raise ValueError(
            "grid-only curve does not cover [0, z]; rebuild the curve on a "
            "grid starting at 0 (or keep the source spectrum attached)")
    full = _pwl_weighted_integral(grid, fvals, rho, z)
    cg, cv = grid[::2], fvals[::2]
    if cg[-1] != grid[-1]:
        cg = np.concatenate((cg, grid[-1:]))
        cv = np.concatenate((cv, fvals[-1:]))
    coarse = _pwl_weighted_integral(cg, cv, rho, z)
    err = abs(full - coarse) / 3.0    # piecewise-linear error is O(h^2)
    if err > tol * max(1.0, abs(full)):
        raise ValueError(
            f"curve grid too coarse for the requested tolerance: estimated "
            f"relative error {err / max(1.0, abs(full)):.3e} > {tol:.3e}")
    return front * full


def _pwl_weighted_integral(grid: np.ndarray, fvals: np.ndarray, rho: float,
                           z: float) -> float:
    """integral_0^z (z-t)^{rho-1} * pwl(t) dt for the piecewise-linear
    interpolant through (grid, fvals), in closed form per panel.

    With s = z - t the antiderivative of s^{rho-1} (c0 - c1 s) is
    c0 s^rho / rho - c1 s^{rho+1} / (rho+1).
    """
    t0 = np.clip(grid[:-1], None, z)
    t1 = np.clip(grid[1:], None, z)
    keep = t1 > t0
    t0, t1 = t0[keep], t1[keep]
    f0 = fvals[:-1][keep]
    slope = (fvals[1:][keep] - f0) / (grid[1:][keep] - grid[:-1][keep])
    # f(t) = f0 + slope (t - g0) = (f0 + slope (z - g0)) - slope (z - t)
    c0 = f0 + slope * (z - grid[:-1][keep])
    c1 = slope
    s0 = z - t1   # lower integration limit in s
    s1 = z - t0
    part = (c0 * (s1 ** rho - s0 ** rho) / rho
            - c1 * (s1 ** (rho + 1) - s0 ** (rho + 1)) / (rho + 1))
    return float(np.sum(part))


# -- sums and staircase -------------------------------------------------------

def partial_sum(s: Spectrum, k: int) -> float:
    """Sum of the first k stored eigenvalues (SN includes the zero mode)."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > len(s):
        raise ValueError(f"k = {k} exceeds the {len(s)} stored eigenvalues")
    return float(np.sum(s.values[:k]))


def mean_sum(s: Spectrum, k: int) -> float:
    """Average of the first k stored eigenvalues."""
    return partial_sum(s, k) / k


def staircase_sum(R: float) -> float:
    """sum_{k>=0} (R - k)_+ by direct summation (R >= 0)."""
    R = float(R)
    if R < 0:
        raise ValueError(f"R must be >= 0, got {R}")
    if R == 0.0:
        return 0.0
    k = np.arange(math.floor(R) + 1, dtype=float)
    return float(np.sum(R - k))


def staircase_bounds(R: float):
    """Two-sided enclosure (R^2+R)/2 <= staircase_sum(R) <= (R^2+R+1)/2;
    the lower bound is attained exactly at integers."""
    R = float(R)
    if R < 0:
        raise ValueError(f"R must be >= 0, got {R}")
    return 0.5 * (R * R + R), 0.5 * (R * R + R + 1.0)


# -- heat trace ---------------------------------------------------------------

def heat_trace(s: Spectrum, t: float, tol: float = 1e-10):
    """(sum_j e^{-eta_j t} over the stored spectrum, certified tail bound).

    The tail past the last stored eigenvalue is bounded geometrically by
    e^{-eta_last t} / (1 - e^{-gap t}) with gap = the smallest spacing in the
    last decile of the spectrum; this encodes the assumption that spacings do
    not shrink below that observed gap further out.  Raises when the spectrum
    is too short to push the tail bound under ``tol``, or when the last
    decile contains a repeated eigenvalue (no certification possible).
    """
    if s.problem != "SD":
        raise ValueError("heat_trace expects an SD spectrum (positive eigenvalues)")
    t = float(t)
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    vals = s.values
    value = float(np.sum(np.exp(-vals * t)))    # ascending eigenvalues
    m = max(2, len(s) // 10)
    gaps = np.diff(vals[-m:])
    if gaps.size == 0 or float(gaps.min()) <= 0:
        raise ValueError(
            "cannot certify the tail: repeated eigenvalues in the last decile")
    gap = float(gaps.min())
    tail = math.exp(-vals[-1] * t) / -math.expm1(-gap * t)
    if tail > tol:
        raise ValueError(
            f"tail bound {tail:.3e} exceeds tolerance {tol:.3e} at t = {t}; "
            "store more eigenvalues")
    return value, tail


# -- Legendre transform -------------------------------------------------------

class LegendreBound(NamedTuple):
    value: float
    z: float
    at_boundary: bool


def legendre_sum_bound(curve: RieszCurve, k: int) -> LegendreBound:
    """Lower bound on the sum of the first k eigenvalues from an upper bound
    on R_1: sum_{j<=k} eta_j >= sup_z (k z - U(z)).

    ``curve`` must be a convex pointwise upper bound for R_1 (gamma = 1).
    The supremum is taken over the curve's grid; if it lands on the grid
    boundary the bound is not tight and the result is flagged.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if curve.gamma != 1.0:
        raise ValueError("legendre_sum_bound needs a gamma = 1 curve")
    g, v = curve.grid, curve.values
    scale = max(1.0, float(np.abs(v).max()))
    second = np.diff(v, 2)
    if second.size and float(second.min()) < -1e-9 * scale:
        raise ValueError("curve is not convex; Legendre duality does not apply")
    obj = k * g - v
    i = int(np.argmax(obj))
    return LegendreBound(float(obj[i]), float(g[i]),
                         bool(i == 0 or i == obj.size - 1))


# -- curve CSV ----------------------------------------------------------------

def save_curve(curve: RieszCurve, path) -> None:
    """Write a Riesz curve as CSV ('# key=value' header, 'z,value' rows)."""
    lines = [f"# gamma={format(curve.gamma, '.17g')}",
             f"# validity_ceiling={format(curve.validity_ceiling, '.17g')}"]
    for key in sorted(curve.meta):
        v = curve.meta[key]
        if isinstance(v, bool):
            txt = "true" if v else "false"
        elif isinstance(v, (int, np.integer)):
            txt = str(int(v))
        elif isinstance(v, float):
            txt = format(v, ".17g")
        else:
            txt = str(v)
        lines.append(f"# {key}={txt}")
    lines.append("z,value")
    for z, v in zip(curve.grid, curve.values):
        lines.append(f"{format(float(z), '.17g')},{format(float(v), '.17g')}")
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def load_curve(path) -> RieszCurve:
    """Read a curve written by :func:`save_curve` (no spectrum attached)."""
    gamma = None
    ceiling = None
    meta: dict = {}
    zs, vs = [], []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, text = line[1:].strip().partition("=")
                key, text = key.strip(), text.strip()
                if key == "gamma":
                    gamma = float(text)
                elif key == "validity_ceiling":
                    ceiling = float(text)
                elif key == "n":
                    meta[key] = int(text)
                elif key == "john":
                    meta[key] = text == "true"
                else:
                    try:
                        meta[key] = float(text)
                    except ValueError:
                        meta[key] = text
                continue
            if not header_seen:
                if line != "z,value":
                    raise ValueError(f"{path}:{lineno}: expected header 'z,value'")
                header_seen = True
                continue
            a, _, b = line.partition(",")
            zs.append(float(a))
            vs.append(float(b))
    if gamma is None or ceiling is None or not zs:
        raise ValueError(f"{path}: missing gamma/validity_ceiling header or data")
    return RieszCurve(gamma, np.array(zs), np.array(vs), ceiling, meta=meta)
