"""Special functions and semiclassical constants shared by every bound.

All quantities are evaluated in closed form: integer gamma values go through
exact factorials, real arguments through math.gamma (a Lanczos-class
implementation, accurate to ~1e-15 relative).  The upper incomplete gamma
function at integer order is the exact finite sum

    Gamma(n, x) = (n-1)! e^{-x} sum_{k=0}^{n-1} x^k / k!,

not a continued-fraction approximation.
"""

from __future__ import annotations

import math


def _gamma(x: float) -> float:
    """Gamma function; exact factorial path for integer arguments."""
    if x <= 0:
        raise ValueError(f"gamma argument must be positive, got {x}")
    if float(x).is_integer():
        return float(math.factorial(int(x) - 1))
    return math.gamma(x)


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in R^m: pi^{m/2} / Gamma(m/2 + 1).

    Evaluated by the stable recurrence vol(m) = 2*pi/m * vol(m-2) with
    vol(0) = 1, vol(1) = 2, so small dimensions come out bit-exact.
    """
    if not isinstance(m, (int,)) or isinstance(m, bool):
        raise ValueError(f"dimension must be an integer, got {m!r}")
    if m < 0:
        raise ValueError(f"dimension must be >= 0, got {m}")
    if m == 0:
        return 1.0
    if m == 1:
        return 2.0
    return 2.0 * math.pi / m * unit_ball_volume(m - 2)


def upper_incomplete_gamma(n: int, x: float) -> float:
    """Gamma(n, x) for integer n >= 1 via the exact finite sum.

    Gamma(n, x) = (n-1)! e^{-x} sum_{k=0}^{n-1} x^k / k!.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"order must be an integer >= 1, got {n!r}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    term = 1.0          # x^k / k! at k = 0
    acc = 1.0
    for k in range(1, n):
        term *= x / k
        acc += term
    return math.factorial(n - 1) * math.exp(-x) * acc


def lower_incomplete_gamma(n: int, x: float) -> float:
    """gamma(n, x) = Gamma(n) - Gamma(n, x) = integral_0^x t^{n-1} e^{-t} dt.

    For small x the complement loses all significant digits to cancellation,
    so that branch uses the ascending series
    gamma(n, x) = x^n e^{-x} sum_{k>=0} x^k / (n (n+1) ... (n+k)).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"order must be an integer >= 1, got {n!r}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x >= n + 1:
        return math.factorial(n - 1) - upper_incomplete_gamma(n, x)
    # ascending series; terms decay at least geometrically for x < n + 1
    term = 1.0 / n
    acc = term
    k = 1
    while True:
        term *= x / (n + k)
        acc += term
        if term < 1e-18 * acc:
            break
        k += 1
    return x ** n * math.exp(-x) * acc


def weyl_constant(n: int, gamma: float) -> float:
    """Leading Riesz-mean coefficient for an (n-1)-dimensional free surface:

        C_{n,gamma} = (4 pi)^{-(n-1)/2} Gamma(gamma+1) Gamma(n)
                      / (Gamma((n+1)/2) Gamma(n+gamma)).

    For n = 2 this collapses to 1 / (pi (gamma + 1)).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    if gamma < 0:
        raise ValueError(f"Riesz exponent must be >= 0, got {gamma}")
    return ((4.0 * math.pi) ** (-(n - 1) / 2.0)
            * _gamma(gamma + 1.0) * _gamma(float(n))
            / (_gamma((n + 1) / 2.0) * _gamma(n + gamma)))


def berezin_constant(n: int) -> float:
    """Semiclassical constant L^cl_{1,n-1} = 1 / ((4 pi)^{(n-1)/2} Gamma(1 + (n+1)/2)).

    Satisfies L^cl_{1,n-1} = (2n/(n+1)) * weyl_constant(n, 1).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    return 1.0 / ((4.0 * math.pi) ** ((n - 1) / 2.0) * _gamma((n + 3) / 2.0))


def semiclassical_scale(n: int, k: int, area: float) -> float:
    """Natural scale of the k-th surface eigenvalue:

        W = 2 pi * omega_{n-1}^{-1/(n-1)} * (k / area)^{1/(n-1)},

    where omega_{n-1} is the unit-ball volume in R^{n-1} and area = |F| is the
    (n-1)-dimensional measure of the free surface.  For n = 2: W = pi k / |F|.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValueError(f"index must be an integer >= 1, got {k!r}")
    if not area > 0:
        raise ValueError(f"free-surface measure must be positive, got {area}")
    m = n - 1
    return 2.0 * math.pi * unit_ball_volume(m) ** (-1.0 / m) * (k / area) ** (1.0 / m)
