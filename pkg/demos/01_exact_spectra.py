"""Closed-form sloshing and Steklov-Dirichlet spectra on simple tanks.

A rectangular tank of surface length L and depth h has sloshing frequencies
nu_k = (k pi / L) tanh(k pi h / L) and, with the walls clamped instead of
free, eta_j = (j pi / L) coth(j pi h / L).  This script prints both families,
shows the interlacing nu_k < eta_k < nu_{k+1}-ish ordering, the deep-water
limit, and checks the exact scaling rule under a similarity of the tank.
"""

import math

import numpy as np

from steklov import spectra

L, H = math.pi, 1.0
sn = spectra.rectangle_sn(L, H, 12)
sd = spectra.rectangle_sd(L, H, 11)

print(f"rectangle: surface length {L:.4f}, depth {H}")
print(f"{'k':>3} {'SN nu_k':>12} {'SD eta_k':>12}")
for k in range(11):
    eta = sd.values[k - 1] if k >= 1 else float("nan")
    print(f"{k:>3} {sn.values[k]:>12.8f} {eta:>12.8f}")

# the wall condition only matters for the lowest modes: tanh and coth both
# approach 1, so high modes of either family approach k pi / L
deep = np.arange(1, 12) * math.pi / L
print("\nrelative distance from the deep-water line k pi / L:")
print("  SN:", np.array2string((deep - sn.values[1:]) / deep, precision=2))
print("  SD:", np.array2string((sd.values - deep) / deep, precision=2))

# Dirichlet walls stiffen the tank: eta_j > nu_{j+1} mode by mode
assert np.all(sd.values > sn.values[1:])
print("\nclamped walls raise every frequency:  eta_j > nu_(j+1)  (checked)")

# similarity scaling: stretching the tank by a divides all frequencies by a
a = 2.5
scaled = spectra.rectangle_sn(a * L, a * H, 12)
assert np.allclose(scaled.values, sn.values / a, rtol=1e-13)
print(f"scaling by {a}: nu_k(aL, ah) = nu_k(L, h)/a  (checked)")

# a cylinder over an interval cross-section reproduces the rectangle
from steklov.geometry import CylinderDomain, IntervalBase

cyl = CylinderDomain(2, IntervalBase(L), H)
via_cyl = spectra.cylinder_spectrum(cyl, "SN", 12)
assert np.allclose(via_cyl.values, sn.values, rtol=1e-12)
print("cylinder over an interval base matches the rectangle  (checked)")

# in three dimensions the same separation of variables applies over any
# base whose Neumann Laplacian is known, e.g. a pi x pi square
from steklov.geometry import RectangleBase

box = CylinderDomain(3, RectangleBase(math.pi, math.pi), 1.0)
s3 = spectra.cylinder_spectrum(box, "SN", 8)
print("\nfirst sloshing frequencies of the pi x pi x 1 box:")
print(" ", np.array2string(s3.values, precision=6))
