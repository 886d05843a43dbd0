"""Riesz means of the spectrum and the two-sided counting bounds.

R_gamma(z) = sum_j (z - nu_j)_+^gamma interpolates between the eigenvalue
counting function (gamma = 0) and smoother averages whose asymptotics carry
a geometric second term.  The R_1 mean of the sloshing spectrum admits a
two-term LOWER bound (L/2pi) z^2 + z/2 on domains contained below their
free surface, while the clamped-wall spectrum admits matching UPPER bounds.
This script plots margins along a grid and demonstrates the integral
iteration that lifts R_1 to R_2 without touching the eigenvalues again.
"""

import math

import numpy as np

from steklov import bounds, riesz, spectra

L = math.pi
sn = spectra.rectangle_sn(L, 1.0, 3000)
sd = spectra.rectangle_sd(L, 1.0, 3000)
grid = np.geomspace(0.5, 500.0, 12)

print("R_1 margins on the rectangle (positive = bound holds):")
print(f"{'z':>8} {'SN lower':>12} {'SD upper':>12} {'SD area':>12}")
r1_sn = riesz.riesz_mean_grid(sn, 1.0, grid)
r1_sd = riesz.riesz_mean_grid(sd, 1.0, grid)
for z, a, b in zip(grid, r1_sn, r1_sd):
    lower = bounds.sn_lower_john_2d(L, 1.0, z)
    upper = bounds.sd_upper_2d_john(L, z)
    area = bounds.sd_upper_ndim(L, 2, 1.0, z)
    print(f"{z:>8.2f} {a - lower:>12.4f} {upper - b:>12.4f} {area - b:>12.4f}")

# the same checks, packaged: verify() evaluates a named bound over a grid,
# records margins, and confirms the geometric hypotheses from the metadata
rep = bounds.verify(sn, "john2d", np.geomspace(0.5, 500.0, 400))
print(f"\nverify('john2d'): {rep.status}, min margin {rep.min_margin:.4f}, "
      f"flags {rep.hypothesis_flags}")

# deep-water model: with nu_k replaced by k pi / L, R_1 becomes an explicit
# staircase sum squeezed between the parabolas (R^2+R)/2 and (R^2+R+1)/2
z = 40.0
n_z = riesz.riesz_mean(sn, 0.0, z)
r1_z = riesz.riesz_mean(sn, 1.0, z)
scale = math.pi / L
lo, hi = riesz.staircase_bounds(z / scale)
print(f"\nat z = {z}: N(z) = {n_z:.0f} modes, R_1 = {r1_z:.4f}; the model"
      f" staircase gives [{scale * lo:.4f}, {scale * hi:.4f}]"
      f" (true eigenvalues sit a shade below k pi / L, so R_1 a shade above)")

# lifting R_1 to R_2 by one integration reproduces the direct value
curve = riesz.riesz_curve(sn, 1.0, np.linspace(0.0, 60.0, 240))
for z in (5.0, 20.0, 50.0):
    lifted = riesz.riesz_iterate(curve, 1.0, z)
    direct = riesz.riesz_mean(sn, 2.0, z)
    print(f"iterated R_2({z:>4.0f}) = {lifted:14.6f}   "
          f"direct = {direct:14.6f}   rel {abs(lifted-direct)/direct:.1e}")

# Legendre duality turns the R_1 curve back into sharp partial-sum bounds
curve_sd = riesz.riesz_curve(sd, 1.0, np.linspace(0.0, 120.0, 600))
for k in (5, 25, 100):
    dual = riesz.legendre_sum_bound(curve_sd, k)
    observed = riesz.partial_sum(sd, k)
    print(f"sum of first {k:>3} SD eigenvalues >= {dual.value:12.4f}   "
          f"(true {observed:12.4f})")

# the heat trace of the clamped spectrum obeys |F|/(pi t) with certified tail
for t in (0.1, 1.0):
    val, tail = riesz.heat_trace(sd, t)
    print(f"heat trace at t = {t}: {val:.6f} + tail <= {tail:.1e}  "
          f"(bound {bounds.sd_heat_trace_upper(L, 2, t):.6f})")
