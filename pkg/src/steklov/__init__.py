"""Sloshing (mixed Steklov-Neumann) and Steklov-Dirichlet spectra on planar
polygons and cylinder-type domains.

The package computes exact and finite-element spectra of the
Dirichlet-to-Neumann map on the free surface, evaluates semiclassical
Riesz-mean and eigenvalue-sum bounds, and checks two-term asymptotics.
"""

import os as _os

# Cap BLAS/OpenMP threading before numpy is imported anywhere in the package.
# STEKLOV_THREADS=N makes every run use exactly N threads (reproducibility).
_threads = _os.environ.get("STEKLOV_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from . import specfun, geometry, spectra, riesz, bounds, asymptotics, fem
from .geometry import PolygonalDomain, CylinderDomain, ConeDomain, DomainError
from .spectra import Spectrum, load_spectrum, save_spectrum
from .riesz import RieszCurve, ValidityCeilingError, riesz_mean, riesz_curve
from .bounds import BoundReport, verify

__version__ = "0.1.0"

__all__ = [
    "specfun", "geometry", "spectra", "riesz", "bounds", "asymptotics", "fem",
    "PolygonalDomain", "CylinderDomain", "ConeDomain", "DomainError",
    "Spectrum", "load_spectrum", "save_spectrum",
    "RieszCurve", "ValidityCeilingError", "riesz_mean", "riesz_curve",
    "BoundReport", "verify",
    "__version__",
]
