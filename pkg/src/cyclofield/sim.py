"""Monte Carlo simulation of the field by randomized harmonic superposition.

A realization is

    field(x) ~= sqrt(2 sigma^2 / M) * sum_m cos(<lambda_m, x> + U_m)

with frequencies lambda_m drawn from the normalized spectral measure
(radial part: rho**(n-1) phi(rho) / (sigma^2 / omega_n), directions uniform
on the sphere) and phases U_m iid uniform on [0, 2 pi).  For fixed
frequencies the phase average of field(x) field(y) is
(sigma^2 / M) sum_m cos(<lambda_m, x - y>), whose frequency average is
exactly the covariance B_n(|x - y|): drawing fresh frequencies per replicate
makes the empirical covariance estimator unbiased even though the density is
singular (no truncation of the spectral spikes).

Radial sampling inverts a tabulated CDF on a mesh graded into every singular
frequency, with exact local power-law inversion in the cells touching a
singular point; that is what keeps the spike mass intact.  All randomness is
drawn from generators derived from (seed, replicate index), so results do
not depend on evaluation order.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .quad import QuadratureSpec, integrate_singular, _panel_rule
from .spectral import CyclicalSpectralDensity, sphere_surface, spectral_mass
from .weights import WeightKernel, invert_to_weight
from .limits import NormalizedFunctionalSpec, v_constant

__all__ = [
    "FieldRealization",
    "HarmonicFieldSampler",
    "build_sampler",
    "empirical_cov",
    "evaluate",
    "jackknife_mean",
    "mc_functional",
]


@dataclass
class HarmonicFieldSampler:
    density: CyclicalSpectralDensity
    M: int
    seed: object
    frequencies: np.ndarray  # (M, n)
    phases: np.ndarray  # (M,)
    sigma2: float


@dataclass
class FieldRealization:
    points: np.ndarray  # (P, n)
    values: np.ndarray  # (P,)


@dataclass
class _RadialTable:
    """Graded-mesh representation of the normalized radial spectral CDF."""

    edges: np.ndarray  # cell boundaries, increasing
    masses: np.ndarray  # cell masses of rho**(n-1) phi
    cumulative: np.ndarray
    power_cells: dict  # cell index -> (anchor, width, inv_exponent, side)
    total: float

    def sample(self, u: np.ndarray) -> np.ndarray:
        target = u * self.total
        idx = np.searchsorted(self.cumulative, target, side="right")
        idx = np.clip(idx, 0, len(self.masses) - 1)
        prev = np.where(idx > 0, self.cumulative[idx - 1], 0.0)
        frac = (target - prev) / self.masses[idx]
        frac = np.clip(frac, 0.0, 1.0)
        left = self.edges[idx]
        width = self.edges[idx + 1] - left
        out = left + frac * width
        for cell, (anchor, w, inv_expo, side) in self.power_cells.items():
            mask = idx == cell
            if not np.any(mask):
                continue
            v = frac[mask] if side > 0 else 1.0 - frac[mask]
            out[mask] = anchor + side * w * v**inv_expo
        return out


_CELLS_PER_HALF = 600


def _segment_nodes(lo: float, hi: float, expo_lo: float, expo_hi: float) -> np.ndarray:
    """Cell edges on [lo, hi] graded into both endpoints so cell masses stay
    balanced under |x - endpoint|**exponent behavior."""
    mid = 0.5 * (lo + hi)
    u = np.linspace(0.0, 1.0, _CELLS_PER_HALF + 1)
    left = lo + (mid - lo) * u ** (1.0 / (1.0 + min(expo_lo, 0.0)))
    right = hi - (hi - lo) * 0.5 * u[::-1] ** (1.0 / (1.0 + min(expo_hi, 0.0)))
    return np.concatenate([left[:-1], right])


@functools.lru_cache(maxsize=64)
def _radial_table(density: CyclicalSpectralDensity) -> _RadialTable:
    support = density.support_end
    if not np.isfinite(support):
        # Truncate an infinite tail where its spectral mass is negligible.
        quad = QuadratureSpec()
        start = max(1.0, *(a for a, _ in density.singularities)) if density.singularities else 1.0
        total = integrate_singular(
            density.radial_weight, 0.0, start, density.quad_spec(quad)
        ).value
        hi = start
        while True:
            chunk = integrate_singular(density.radial_weight, hi, 2.0 * hi, quad).value
            total += chunk
            hi *= 2.0
            if chunk < 1e-10 * total or hi > 1e6:
                break
        support = hi

    exponents = {0.0: density.alpha0 - 1.0 if density.alpha0 < 1.0 else 0.0}
    exponents.update({a: alpha - 1.0 for a, alpha in density.singularities})
    boundaries = [0.0] + [a for a, _ in density.singularities if a < support] + [support]

    edges_list = []
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        nodes = _segment_nodes(lo, hi, exponents.get(lo, 0.0), exponents.get(hi, 0.0))
        edges_list.append(nodes[:-1] if hi != boundaries[-1] else nodes)
    edges = np.concatenate(edges_list)
    edges = np.unique(edges)

    lo_arr = edges[:-1]
    hi_arr = edges[1:]
    masses, _ = _panel_rule(density.radial_weight, lo_arr, hi_arr)

    # Cells that touch a singular point get exact treatment: the graded mesh
    # makes them microscopic, so the local pure-power model
    # weight ~ C |x - anchor|**expo is accurate to O(cell width); its mass is
    # integrated in closed form and sampling inverts the same power law.
    power_cells: dict[int, tuple] = {}
    for anchor, expo in exponents.items():
        if expo >= 0.0 or anchor > support:
            continue
        inv_expo = 1.0 / (1.0 + expo)
        right_idx = int(np.searchsorted(edges, anchor))
        if edges[right_idx] != anchor:
            continue
        if right_idx < len(masses):
            cell = right_idx
            width = edges[cell + 1] - anchor
            probe = anchor + width
            level = float(density.radial_weight(probe)) / width**expo
            masses[cell] = level * width ** (1.0 + expo) / (1.0 + expo)
            power_cells[cell] = (anchor, width, inv_expo, 1.0)
        if right_idx >= 1:
            cell = right_idx - 1
            width = anchor - edges[cell]
            probe = anchor - width
            if probe > 0.0:
                level = float(density.radial_weight(probe)) / width**expo
                masses[cell] = level * width ** (1.0 + expo) / (1.0 + expo)
                power_cells[cell] = (anchor, width, inv_expo, -1.0)

    masses = np.maximum(masses, 0.0)
    total = float(np.sum(masses))
    expected = spectral_mass(density) / sphere_surface(density.n)
    if abs(total - expected) > 1e-4 * expected:
        raise ValueError(
            "radial CDF tabulation failed its mass consistency check: "
            f"{total!r} vs {expected!r}"
        )
    return _RadialTable(
        edges=edges,
        masses=masses,
        cumulative=np.cumsum(masses),
        power_cells=power_cells,
        total=total,
    )


def build_sampler(
    density: CyclicalSpectralDensity, M: int, seed
) -> HarmonicFieldSampler:
    """Draw a harmonic representation: radial frequencies by inverse-CDF
    sampling from the tabulated spectral measure, directions isotropic,
    phases uniform.  Deterministic given the seed."""
    if M < 1:
        raise ValueError("M must be at least 1")
    table = _radial_table(density)
    sigma2 = spectral_mass(density)
    rng = np.random.default_rng(seed)
    radii = table.sample(rng.random(M))
    n = density.n
    direction = rng.standard_normal((M, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    phases = rng.uniform(0.0, 2.0 * math.pi, M)
    return HarmonicFieldSampler(
        density=density,
        M=int(M),
        seed=seed,
        frequencies=radii[:, None] * direction,
        phases=phases,
        sigma2=sigma2,
    )


def evaluate(sampler: HarmonicFieldSampler, points) -> FieldRealization:
    """Evaluate the harmonic superposition at the given points (P, n)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != sampler.density.n:
        raise ValueError(
            f"points must have shape (P, {sampler.density.n}), got {pts.shape}"
        )
    amplitude = math.sqrt(2.0 * sampler.sigma2 / sampler.M)
    values = amplitude * np.cos(pts @ sampler.frequencies.T + sampler.phases).sum(axis=1)
    return FieldRealization(points=pts, values=values)


def jackknife_mean(samples: np.ndarray) -> tuple[float, float]:
    """Mean and leave-one-out jackknife standard error."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    mean = float(np.mean(samples))
    loo = (np.sum(samples) - samples) / (n - 1)
    variance = (n - 1) / n * float(np.sum((loo - np.mean(loo)) ** 2))
    return mean, math.sqrt(variance)


def empirical_cov(
    density: CyclicalSpectralDensity,
    lags,
    M: int,
    replicates: int,
    seed: int,
) -> list[tuple[float, float, float]]:
    """Monte Carlo covariance estimates at the given lags.

    Every replicate draws an independent sampler (fresh frequencies and
    phases), so the per-replicate product field(0) * field(lag e_1) is an
    unbiased estimator of B_n(lag); jackknife standard errors over
    replicates.
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates for stable jackknife errors")
    lags = [float(l) for l in lags]
    n = density.n
    points = np.zeros((len(lags) + 1, n))
    for i, lag in enumerate(lags, start=1):
        points[i, 0] = lag
    products = np.empty((replicates, len(lags)))
    for rep in range(replicates):
        sampler = build_sampler(density, M, [int(seed), rep])
        values = evaluate(sampler, points).values
        products[rep] = values[0] * values[1:]
    out = []
    for i, lag in enumerate(lags):
        estimate, stderr = jackknife_mean(products[:, i])
        out.append((lag, estimate, stderr))
    return out


def mc_functional(
    density: CyclicalSpectralDensity,
    kernel: WeightKernel,
    r: float,
    t: float,
    M: int,
    replicates: int,
    seed: int,
    spatial_grid,
    alpha: float | None = None,
) -> tuple[float, float]:
    """Brute-force variance of the normalized weighted functional (n = 1).

    The weight f_{a,rt} is materialized on the uniform grid by Hankel
    inversion, each replicate integrates weight * field by the trapezoid
    rule, and the squared values are averaged.  The same normalization as
    the deterministic covariance path is applied: the constants of the
    non-degenerate scaling when the kernel sits on a singular frequency,
    unit constants (with the supplied alpha) otherwise.
    """
    if density.n != 1 or kernel.n != 1:
        raise ValueError("the brute-force functional check is desk-scale: n = 1 only")
    grid = np.asarray(spatial_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 16:
        raise ValueError("spatial_grid must be a 1-d array of at least 16 points")
    spacing = float(grid[1] - grid[0])
    if not np.allclose(np.diff(grid), spacing, rtol=1e-9):
        raise ValueError("spatial_grid must be uniform")
    limit = math.pi / (5.0 * (kernel.a * r + r))
    if spacing > limit:
        raise ValueError(
            f"grid spacing {spacing:g} too coarse for the oscillation at "
            f"a*r + r = {kernel.a * r + r:g}; need <= {limit:g}"
        )

    singular = dict(
        (a_i, idx + 1) for idx, (a_i, _) in enumerate(density.singularities)
    )
    if kernel.a in singular:
        j = singular[kernel.a]
        constant = v_constant(density, j) / (2.0 * float(density.h(kernel.a)))
        expo = density.singularities[j - 1][1]
    else:
        if alpha is None:
            raise ValueError("alpha is required when the kernel center is not singular")
        constant = 1.0
        expo = float(alpha)

    rt = r * t
    radial = np.unique(np.abs(grid))
    # The weight has a logarithmic spike at |x| = rt; keep grid nodes off it.
    radial = np.where(np.abs(radial - rt) < 1e-9, radial + 1e-6 * spacing, radial)
    weight_radial = np.array(
        [0.0 if x == 0.0 else invert_to_weight(kernel, rt, float(x)) for x in radial]
    )
    if np.any(radial == 0.0):
        zero_idx = int(np.where(radial == 0.0)[0][0])
        weight_radial[zero_idx] = 2.0 * weight_radial[zero_idx + 1] - weight_radial[zero_idx + 2]
    weight = np.interp(np.abs(grid), radial, weight_radial)

    norm = constant / r ** (2.0 * density.n - expo)
    squares = np.empty(replicates)
    pts = grid[:, None]
    for rep in range(replicates):
        sampler = build_sampler(density, M, [int(seed), rep])
        values = evaluate(sampler, pts).values
        functional = np.trapezoid(weight * values, grid)
        squares[rep] = norm * functional * functional
    return jackknife_mean(squares)
