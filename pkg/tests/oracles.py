"""Independent oracles used by the test suite.

Everything here deliberately avoids the library's own code paths: special
functions are checked against adaptive quadrature of integral
representations (scipy's QUADPACK), singular integrals against graded-mesh
Riemann sums, and spectral quantities against analytic antiderivatives.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _special

EULER_GAMMA = float(np.euler_gamma)


def bessel_quadrature(order: float, x: float) -> float:
    """Poisson integral representation, valid for order > -1/2:
    J_nu(x) = (x/2)^nu / (Gamma(nu+1/2) Gamma(1/2))
              * int_{-1}^{1} (1-t^2)^(nu-1/2) cos(x t) dt."""
    nu = float(order)
    prefactor = (0.5 * x) ** nu / (_special.gamma(nu + 0.5) * np.sqrt(np.pi))
    value, _ = _integrate.quad(
        lambda t: (1.0 - t * t) ** (nu - 0.5) * np.cos(x * t),
        -1.0,
        1.0,
        limit=800,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    return prefactor * value


def cosint_quadrature(x: float) -> float:
    """Ci via its defining integral: gamma + ln x + int_0^x (cos t - 1)/t dt."""
    value, _ = _integrate.quad(
        lambda t: (np.cos(t) - 1.0) / t if t > 0.0 else 0.0,
        0.0,
        x,
        limit=800,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    return EULER_GAMMA + np.log(x) + value


def sinint_quadrature(x: float) -> float:
    value, _ = _integrate.quad(
        lambda t: np.sinc(t / np.pi), 0.0, x, limit=800, epsabs=1e-13, epsrel=1e-12
    )
    return value


def graded_riemann_double_singular(points: int = 1_000_000) -> float:
    """Brute-force midpoint sum for int_0^1 x^(-1/2) |x - 1/2|^(-1/2) dx on a
    mesh graded into the three singular/endpoint locations."""
    u = (np.arange(points) + 0.5) / points
    pieces = []
    # [0, 1/4]: grade into 0;  [1/4, 1/2] and [1/2, 3/4]: grade into 1/2.
    for lo, hi, anchor in ((0.0, 0.25, 0.0), (0.5, 0.25, 0.5), (0.5, 0.75, 0.5), (0.75, 1.0, None)):
        if anchor is None:
            x = lo + (hi - lo) * u
            w = np.full_like(x, (hi - lo) / points)
        else:
            # x = anchor +/- span * u^2 concentrates points at the anchor.
            span = hi - lo
            x = anchor + np.sign(span) * abs(span) * u * u
            w = np.abs(span) * 2.0 * u / points
        pieces.append(np.sum(x**-0.5 * np.abs(x - 0.5) ** -0.5 * w))
    return float(sum(pieces))


def truncated_bessel_integral(envelope, order: float, upper: float = 1e4) -> float:
    """Segmented QUADPACK evaluation of int_0^upper envelope(x) J_order(x) dx
    (tail beyond `upper` is the caller's responsibility)."""
    edges = np.linspace(0.0, upper, int(upper) + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, _ = _integrate.quad(
            lambda x: envelope(x) * _special.jv(order, x), a, b, limit=100
        )
        total += value
    return total


def ball_indicator_transform(n: int, r: float, lam: float) -> float:
    """Forward transform of the ball indicator:
    (2 pi)^(n/2) r^n J_{n/2}(r lam) / (r lam)^(n/2)."""
    u = r * lam
    return (2.0 * np.pi) ** (0.5 * n) * r**n * _special.jv(0.5 * n, u) / u ** (0.5 * n)
