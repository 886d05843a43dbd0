"""Exact free-surface spectra and the Spectrum container.

For a vertical cylinder F x (-h, 0) the surface eigenvalues separate: every
base Laplacian eigenvalue mu (Neumann for the sloshing problem SN, Dirichlet
for the clamped-wall problem SD) contributes

    SN:  sqrt(mu) * tanh(sqrt(mu) h)
    SD:  sqrt(mu) * coth(sqrt(mu) h)

In the plane the interval base gives the classical rectangle spectra
(k pi / l) tanh(k pi h / l), k >= 0, and (j pi / l) coth(j pi h / l), j >= 1.

Spectra are value-sorted, carry their provenance in ``source`` and enough
domain metadata for the bound evaluators, and round-trip through a small CSV
format bit-exactly (17 significant digits).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (CylinderDomain, DomainError, ExplicitBase, IntervalBase,
                       RectangleBase)

#: absolute tolerance for "the first sloshing eigenvalue is zero" (exact data)
TOL_ZERO = 1e-10


class SpectrumError(ValueError):
    """Raised for malformed spectra (unsorted, negative, wrong ground mode)."""


@dataclass(eq=False)
class Spectrum:
    """A sorted batch of surface eigenvalues of one problem on one domain.

    ``problem`` is "SN" (sloshing: walls Neumann) or "SD" (walls Dirichlet).
    ``source`` records provenance ("exact", "fem:h=...", "file:...").
    ``meta`` carries domain summary data (n, areaF, depth, alpha, beta, john)
    used by the bound evaluators; missing keys degrade to hypothesis flags.
    ``zero_tol`` is how close to 0 the SN ground mode must be; FEM spectra
    pass their mesh-dependent tolerance here.
    """

    problem: str
    values: np.ndarray
    source: str = "exact"
    meta: dict = field(default_factory=dict)
    zero_tol: float = TOL_ZERO

    def __post_init__(self):
        if self.problem not in ("SN", "SD"):
            raise SpectrumError(f"problem must be 'SN' or 'SD', got {self.problem!r}")
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise SpectrumError("empty spectrum")
        if not np.all(np.isfinite(vals)):
            raise SpectrumError("spectrum contains non-finite values")
        if np.any(np.diff(vals) < 0):
            raise SpectrumError("eigenvalues must be sorted nondecreasing")
        if vals[0] < -self.zero_tol:
            raise SpectrumError(f"negative eigenvalue {vals[0]!r}")
        if self.problem == "SN":
            if vals[0] > self.zero_tol:
                raise SpectrumError(
                    f"a sloshing spectrum starts at 0; got {vals[0]!r} "
                    f"(zero_tol = {self.zero_tol})")
            vals = vals.copy()
            vals[0] = max(vals[0], 0.0)
        elif vals[0] <= 0:
            raise SpectrumError("SD eigenvalues are strictly positive")
        vals = np.maximum(vals, 0.0)
        vals.setflags(write=False)
        self.values = vals

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def ceiling(self) -> float:
        """Largest stored eigenvalue: counting functions and Riesz means are
        only trustworthy up to here."""
        return float(self.values[-1])


def _stable_tanh(x: np.ndarray) -> np.ndarray:
    # tanh saturates to 1 exactly (in double precision) beyond ~19; clip at 40
    # so coth shares the same saturation point.
    return np.tanh(np.minimum(x, 40.0))


def _surface_values(base_values: np.ndarray, h: float, problem: str) -> np.ndarray:
    root = np.sqrt(base_values)
    t = _stable_tanh(root * h)
    if problem == "SN":
        return root * t
    with np.errstate(divide="ignore"):
        return np.where(root > 0, root / np.where(t > 0, t, 1.0), np.inf)


def rectangle_sn(length: float, h: float, count: int) -> Spectrum:
    """First ``count`` sloshing eigenvalues of the rectangle (0,length)x(-h,0):
    (k pi / length) tanh(k pi h / length), k = 0, 1, ...  (zero mode included).
    """
    _check_rect_args(length, h, count)
    k = np.arange(count, dtype=float)
    x = k * math.pi / length
    vals = x * _stable_tanh(x * h)
    meta = {"n": 2, "areaF": length, "depth": h,
            "alpha": math.pi / 2, "beta": math.pi / 2, "john": True}
    return Spectrum("SN", vals, source="exact", meta=meta)


def rectangle_sd(length: float, h: float, count: int) -> Spectrum:
    """First ``count`` clamped-wall eigenvalues of the rectangle:
    (j pi / length) coth(j pi h / length), j = 1, 2, ...
    """
    _check_rect_args(length, h, count)
    j = np.arange(1, count + 1, dtype=float)
    x = j * math.pi / length
    vals = x / _stable_tanh(x * h)
    meta = {"n": 2, "areaF": length, "depth": h,
            "alpha": math.pi / 2, "beta": math.pi / 2, "john": True}
    return Spectrum("SD", vals, source="exact", meta=meta)


def _check_rect_args(length, h, count):
    if not (length > 0 and h > 0):
        raise ValueError("length and depth must be positive")
    if not isinstance(count, int) or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")


def interval_laplacian(length: float, bc: str, count: int) -> np.ndarray:
    """Eigenvalues (k pi / length)^2 of the interval; Neumann k >= 0,
    Dirichlet k >= 1."""
    if not length > 0:
        raise ValueError("length must be positive")
    if bc not in ("neumann", "dirichlet"):
        raise ValueError(f"bc must be 'neumann' or 'dirichlet', got {bc!r}")
    start = 0 if bc == "neumann" else 1
    k = np.arange(start, start + count, dtype=float)
    return (k * math.pi / length) ** 2


def rectangle_laplacian(a: float, b: float, bc: str, count: int) -> np.ndarray:
    """First ``count`` Laplacian eigenvalues (p pi/a)^2 + (q pi/b)^2 of the
    rectangle (0,a)x(0,b); Neumann p,q >= 0, Dirichlet p,q >= 1.

    Generated by a lazy heap walk over the (p, q) lattice, so the list is
    complete (no truncated-grid misses).
    """
    if not (a > 0 and b > 0):
        raise ValueError("rectangle sides must be positive")
    if bc not in ("neumann", "dirichlet"):
        raise ValueError(f"bc must be 'neumann' or 'dirichlet', got {bc!r}")
    lo = 0 if bc == "neumann" else 1

    def val(p, q):
        return (p * math.pi / a) ** 2 + (q * math.pi / b) ** 2

    heap = [(val(lo, lo), lo, lo)]
    seen = {(lo, lo)}
    out = []
    while len(out) < count:
        v, p, q = heapq.heappop(heap)
        out.append(v)
        for np_, nq in ((p + 1, q), (p, q + 1)):
            if (np_, nq) not in seen:
                seen.add((np_, nq))
                heapq.heappush(heap, (val(np_, nq), np_, nq))
    return np.array(out)


def cylinder_sn(base_values, h: float, count: int, *, area=None, n=None,
                source: str = "exact") -> Spectrum:
    """Sloshing spectrum of a cylinder from its Neumann base spectrum."""
    base = _check_base(base_values, h, count, first_zero=True)
    vals = np.sort(_surface_values(base[:count], h, "SN"))
    meta = {}
    if n is not None:
        meta["n"] = int(n)
    if area is not None:
        meta["areaF"] = float(area)
    meta["depth"] = float(h)
    meta["john"] = True
    return Spectrum("SN", vals, source=source, meta=meta)


def cylinder_sd(base_values, h: float, count: int, *, area=None, n=None,
                source: str = "exact") -> Spectrum:
    """Clamped-wall spectrum of a cylinder from its Dirichlet base spectrum."""
    base = _check_base(base_values, h, count, first_zero=False)
    if base[0] <= 0:
        raise ValueError("a Dirichlet base spectrum must be strictly positive "
                         "(0 would make the surface value blow up)")
    vals = np.sort(_surface_values(base[:count], h, "SD"))
    meta = {}
    if n is not None:
        meta["n"] = int(n)
    if area is not None:
        meta["areaF"] = float(area)
    meta["depth"] = float(h)
    meta["john"] = True
    return Spectrum("SD", vals, source=source, meta=meta)


def _check_base(base_values, h, count, *, first_zero: bool) -> np.ndarray:
    base = np.asarray(base_values, dtype=float).ravel()
    if not h > 0:
        raise ValueError("depth must be positive")
    if not isinstance(count, int) or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    if base.size < count:
        raise ValueError(f"base spectrum has {base.size} values, need {count}")
    if np.any(np.diff(base) < 0):
        raise ValueError("base eigenvalues must be sorted nondecreasing")
    if np.any(base < -TOL_ZERO):
        raise ValueError("base eigenvalues must be nonnegative")
    if first_zero and abs(base[0]) > TOL_ZERO:
        raise ValueError(f"a Neumann base spectrum starts at 0, got {base[0]!r}")
    return np.maximum(base, 0.0)


def cylinder_spectrum(dom: CylinderDomain, problem: str, count: int) -> Spectrum:
    """Exact surface spectrum of a CylinderDomain (interval, rectangle, or
    explicit base)."""
    if problem not in ("SN", "SD"):
        raise ValueError(f"problem must be 'SN' or 'SD', got {problem!r}")
    bc = "neumann" if problem == "SN" else "dirichlet"
    if isinstance(dom.base, IntervalBase):
        base = interval_laplacian(dom.base.length, bc, count)
    elif isinstance(dom.base, RectangleBase):
        base = rectangle_laplacian(dom.base.a, dom.base.b, bc, count)
    elif isinstance(dom.base, ExplicitBase):
        if dom.base.bc != bc:
            raise DomainError(
                f"problem {problem} needs a {bc} base spectrum, the explicit "
                f"base is tagged {dom.base.bc}")
        base = np.asarray(dom.base.eigenvalues)
    else:
        raise DomainError(f"unsupported base {type(dom.base).__name__}")
    maker = cylinder_sn if problem == "SN" else cylinder_sd
    s = maker(base, dom.depth, count, area=dom.base_area, n=dom.n)
    if isinstance(dom.base, IntervalBase):
        s.meta["alpha"] = math.pi / 2
        s.meta["beta"] = math.pi / 2
    return s


# -- CSV round trip ---------------------------------------------------------

_META_BOOL = ("john",)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def save_spectrum(s: Spectrum, path) -> None:
    """Write a spectrum as CSV: '# key=value' header lines, then index,value
    rows with 17 significant digits (bit-exact decimal round trip)."""
    lines = [f"# problem={s.problem}", f"# source={s.source}"]
    if s.zero_tol != TOL_ZERO:
        lines.append(f"# zero_tol={_fmt(s.zero_tol)}")
    for key in sorted(s.meta):
        lines.append(f"# {key}={_fmt(s.meta[key])}")
    lines.append("index,value")
    for i, v in enumerate(s.values, start=1):
        lines.append(f"{i},{format(float(v), '.17g')}")
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_meta_value(key: str, text: str):
    if key in _META_BOOL:
        if text not in ("true", "false"):
            raise SpectrumError(f"meta key {key} must be true/false, got {text!r}")
        return text == "true"
    if key == "n":
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def load_spectrum(path) -> Spectrum:
    """Read a spectrum CSV written by :func:`save_spectrum` (validates
    sortedness, signs, and the header structure)."""
    problem = None
    source = None
    meta: dict = {}
    values = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise SpectrumError(f"{path}:{lineno}: malformed meta line {line!r}")
                key, _, text = body.partition("=")
                key = key.strip()
                text = text.strip()
                if key == "problem":
                    problem = text
                elif key == "source":
                    source = text
                else:
                    meta[key] = _parse_meta_value(key, text)
                continue
            if not header_seen:
                if line != "index,value":
                    raise SpectrumError(
                        f"{path}:{lineno}: expected header 'index,value', got {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise SpectrumError(f"{path}:{lineno}: expected 'index,value', got {line!r}")
            try:
                idx = int(parts[0])
                val = float(parts[1])
            except ValueError as exc:
                raise SpectrumError(f"{path}:{lineno}: non-numeric row {line!r}") from exc
            if idx != len(values) + 1:
                raise SpectrumError(
                    f"{path}:{lineno}: index column must run 1,2,...; got {idx}")
            values.append(val)
    if problem is None:
        raise SpectrumError(f"{path}: missing '# problem=' line")
    if not header_seen or not values:
        raise SpectrumError(f"{path}: no eigenvalue rows found")
    zero_tol = meta.pop("zero_tol", TOL_ZERO)
    return Spectrum(problem, np.array(values), source=source or f"file:{path}",
                    meta=meta, zero_tol=float(zero_tol))
