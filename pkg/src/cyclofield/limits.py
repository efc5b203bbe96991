"""Covariance-convergence diagnostics for the scaled weighted functionals.

The object under study is the normalized functional process

    X_{r,a}(t) = sqrt(V_a) / (sqrt(2 h(a)) r**(n - alpha/2))
                 * int f_{a,rt}(x) field(x) dx,      t in (0, 1],

whose covariance is an explicit radial integral by the spectral isometry:

    Cov(X_{r,a}(t_p), X_{r,a}(t_q))
        = [V_a / (2 h(a))] (t_p t_q)**n r**alpha omega_n
          * int_0^inf rho**(n-1) g(r t_p (rho - a)) g(r t_q (rho - a))
            phi(rho) drho.

When a is one of the density's singular frequencies a_j and alpha = alpha_j,
these matrices converge as r -> inf to the covariance of the limit process,

    Cov(X_a(t_p), X_a(t_q))
        = (t_p t_q)**n omega_n int_0^inf rho**(alpha-1) g(rho t_p)
          g(rho t_q) drho,

and for zero-mean Gaussian processes finite-dimensional-distribution
convergence is *equivalent* to this entrywise matrix convergence, which is
what the diagnostics certify.  When a carries no singularity the same
variance with unit constants decays to zero for every normalization
exponent alpha in (0, 1) (degeneration); that decay is the second
diagnostic.  V_a collects the non-resonant singular factors at a_j:
V_{a_j} = a_j**(1-alpha_0) prod_{i != j} |a_j - a_i|**(1-alpha_i).

The finite-r integral concentrates in an O(1/r) window around a; all
integrals here are evaluated in the stretched variable s = r (rho - a),
where the window has unit width, the singular factor |rho - a|**(alpha-1)
sits at s = 0, and the kernel oscillations have r-independent periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .quad import QuadratureSpec, integrate_singular
from .spectral import CyclicalSpectralDensity, sphere_surface
from .weights import WeightKernel

__all__ = [
    "CovarianceMatrixResult",
    "ConvergenceReport",
    "DegenerationReport",
    "NormalizedFunctionalSpec",
    "convergence_diagnostic",
    "degeneration_diagnostic",
    "finite_r_cov",
    "limit_cov",
    "v_constant",
]

DEFAULT_TIMES = (0.25, 0.5, 1.0)


def v_constant(density: CyclicalSpectralDensity, j: int) -> float:
    """Normalization constant at the j-th singular frequency (1-based):
    a_j**(1-alpha0) * prod_{i != j} |a_j - a_i|**(1-alpha_i).

    j = 0 (the origin) is rejected: the constant would involve 0**(1-alpha0)
    and the non-degenerate normalization is only meaningful at the strictly
    positive singular frequencies.
    """
    k_minus_1 = len(density.singularities)
    if not 1 <= j <= k_minus_1:
        raise ValueError(
            f"singularity index must be in 1..{k_minus_1}; the origin (j = 0) "
            "has no non-degenerate normalization"
        )
    a_j = density.singularities[j - 1][0]
    value = a_j ** (1.0 - density.alpha0)
    for i, (a_i, alpha_i) in enumerate(density.singularities, start=1):
        if i != j:
            value *= abs(a_j - a_i) ** (1.0 - alpha_i)
    return value


@dataclass(frozen=True)
class NormalizedFunctionalSpec:
    """Density, weight kernel, and normalization of one diagnostic run.

    ``j`` selects a singular frequency (1-based) for a convergence run, in
    which case the kernel center must equal a_j and ``alpha`` must equal
    alpha_j.  ``j = None`` is a degeneration run with unit constants and a
    free alpha in (0, 1).
    """

    density: CyclicalSpectralDensity
    kernel: WeightKernel
    alpha: float
    j: int | None = None
    times: tuple[float, ...] = DEFAULT_TIMES

    def __post_init__(self):
        if self.kernel.n != self.density.n:
            raise ValueError("kernel and density dimensions differ")
        times = tuple(float(t) for t in self.times)
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("times must be strictly increasing")
        if any(not 0.0 <= t <= 1.0 for t in times):
            raise ValueError("times must lie in [0, 1]")
        object.__setattr__(self, "times", times)
        if self.j is not None:
            if not 1 <= self.j <= len(self.density.singularities):
                raise ValueError(f"no singular frequency with index {self.j}")
            a_j, alpha_j = self.density.singularities[self.j - 1]
            if self.kernel.a != a_j:
                raise ValueError(
                    f"kernel center {self.kernel.a} does not match singular "
                    f"frequency a_{self.j} = {a_j}"
                )
            if abs(self.alpha - alpha_j) > 1e-12:
                raise ValueError(
                    f"normalization exponent {self.alpha} does not match "
                    f"alpha_{self.j} = {alpha_j}"
                )
        else:
            if not 0.0 < self.alpha < 1.0:
                raise ValueError(
                    "degeneration runs need alpha strictly inside (0, 1); "
                    "alpha = 1 is the central-limit boundary and is excluded"
                )

    @property
    def center(self) -> float:
        return self.kernel.a

    def normalization_constant(self) -> float:
        if self.j is None:
            return 1.0
        a = self.center
        return v_constant(self.density, self.j) / (2.0 * float(self.density.h(a)))


@dataclass
class CovarianceMatrixResult:
    r: float  # inf for the limit matrix
    times: tuple[float, ...]
    matrix: np.ndarray
    error_estimates: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def to_dict(self) -> dict:
        return {
            "r": self.r if np.isfinite(self.r) else "inf",
            "times": list(self.times),
            "matrix": self.matrix.tolist(),
            "error_estimates": self.error_estimates.tolist(),
        }


def _phi_factors_in_s(density: CyclicalSpectralDensity, a: float, r: float):
    """rho**(n-1) phi(rho) expressed in s = r (rho - a), with the singular
    offsets computed exactly so a centered singularity becomes |s|/r."""
    n = density.n
    alpha0 = density.alpha0
    offsets = [(a - a_i, alpha_i) for a_i, alpha_i in density.singularities]

    def weight(s):
        rho = np.maximum(a + s / r, 1e-280)
        out = rho ** (alpha0 - 1.0) * np.asarray(density.h(rho), dtype=float)
        for offset, alpha_i in offsets:
            # |rho - a_i| = |s/r + (a - a_i)|, exact when the kernel is
            # centered on the singularity (offset == 0 -> |s|/r).
            out = out * np.abs(s / r + offset) ** (alpha_i - 1.0)
        return out

    return weight


def _entry_spec(
    density: CyclicalSpectralDensity,
    a: float,
    r: float,
    t_sum: float,
    base: QuadratureSpec,
) -> QuadratureSpec:
    sing = []
    if density.alpha0 < 1.0:
        sing.append((-r * a, density.alpha0 - 1.0))
    for a_i, alpha_i in density.singularities:
        sing.append((r * (a_i - a), alpha_i - 1.0))
    sing.sort()
    return base.with_(
        singular_points=tuple(sing),
        oscillation_period_hint=2.0 * math.pi / t_sum,
        max_subdivisions=max(base.max_subdivisions, 40000),
    )


def finite_r_cov(
    spec: NormalizedFunctionalSpec, r: float, quad: QuadratureSpec | None = None
) -> CovarianceMatrixResult:
    """Covariance matrix of the normalized functionals at finite r."""
    quad = quad or QuadratureSpec()
    if r <= 0.0:
        raise ValueError("r must be positive")
    density = spec.density
    a = spec.center
    n = density.n
    g = spec.kernel.g
    constant = spec.normalization_constant()
    omega_n = sphere_surface(n)
    support = density.support_end
    s_hi = r * (support - a) if np.isfinite(support) else np.inf
    s_lo = -r * a
    weight = _phi_factors_in_s(density, a, r)

    times = spec.times
    m = len(times)
    matrix = np.zeros((m, m))
    errors = np.zeros((m, m))
    for p in range(m):
        for q in range(p, m):
            t_p, t_q = times[p], times[q]
            if t_p == 0.0 or t_q == 0.0:
                continue  # the process is 0 at t = 0 by definition

            def integrand(s):
                return weight(s) * np.asarray(g(t_p * s)) * np.asarray(g(t_q * s))

            qs = _entry_spec(density, a, r, t_p + t_q, quad)
            result = integrate_singular(integrand, s_lo, s_hi, qs)
            result.require_converged(
                f"finite-r covariance entry (t={t_p}, t={t_q}) at r={r}"
            )
            scale = constant * (t_p * t_q) ** n * r ** (spec.alpha - 1.0) * omega_n
            matrix[p, q] = matrix[q, p] = scale * result.value
            errors[p, q] = errors[q, p] = abs(scale) * result.error_estimate
    return CovarianceMatrixResult(float(r), times, matrix, errors)


def limit_cov(
    spec: NormalizedFunctionalSpec, quad: QuadratureSpec | None = None
) -> CovarianceMatrixResult:
    """Covariance matrix of the limit process:
    (t_p t_q)**n omega_n int_0^inf rho**(alpha-1) g(rho t_p) g(rho t_q) drho.

    The integrand decays algebraically under the kernel decay certificate;
    the tail beyond the adaptive head is summed in octaves with a geometric
    residual estimate.
    """
    quad = quad or QuadratureSpec()
    alpha = spec.alpha
    if not 0.0 < alpha < 1.0:
        raise ValueError("the limit matrix requires alpha in (0, 1)")
    g = spec.kernel.g
    n = spec.density.n
    omega_n = sphere_surface(n)
    times = spec.times
    m = len(times)
    matrix = np.zeros((m, m))
    errors = np.zeros((m, m))
    for p in range(m):
        for q in range(p, m):
            t_p, t_q = times[p], times[q]
            if t_p == 0.0 or t_q == 0.0:
                continue

            def integrand(rho):
                return (
                    rho ** (alpha - 1.0)
                    * np.asarray(g(t_p * rho))
                    * np.asarray(g(t_q * rho))
                )

            head_end = 64.0 / min(t_p, t_q)
            qs = quad.with_(
                singular_points=((0.0, alpha - 1.0),),
                oscillation_period_hint=2.0 * math.pi / (t_p + t_q),
                max_subdivisions=max(quad.max_subdivisions, 20000),
            )
            res = integrate_singular(integrand, 0.0, head_end, qs)
            res.require_converged(f"limit covariance head (t={t_p}, t={t_q})")
            total, err = res.value, res.error_estimate
            chunk_lo = head_end
            prev = None
            for _ in range(24):
                chunk = integrate_singular(integrand, chunk_lo, 2.0 * chunk_lo, qs)
                chunk.require_converged("limit covariance tail octave")
                total += chunk.value
                err += chunk.error_estimate
                mag = abs(chunk.value)
                tol = max(quad.rel_tol * abs(total), quad.abs_tol)
                if prev is not None and mag < 0.25 * tol:
                    ratio = min(mag / prev, 0.9) if prev > 0 else 0.5
                    err += mag * ratio / (1.0 - ratio)
                    break
                prev = mag or prev
                chunk_lo *= 2.0
            scale = (t_p * t_q) ** n * omega_n
            matrix[p, q] = matrix[q, p] = scale * total
            errors[p, q] = errors[q, p] = scale * err
    return CovarianceMatrixResult(np.inf, times, matrix, errors)


# ---------------------------------------------------------------------------
# Ladder diagnostics
# ---------------------------------------------------------------------------


@dataclass
class ConvergenceReport:
    """Entrywise deviation of the finite-r matrices from the limit matrix
    along an r ladder, plus the measured convention factor kappa (the ratio
    of the finite-r and limit variances at the largest time)."""

    times: tuple[float, ...]
    alpha: float
    center: float
    ladder: list[float]
    deltas: list[float]
    ratios: list[float]
    kappas: list[float]
    kappa_stability: float
    limit: CovarianceMatrixResult
    finite: list[CovarianceMatrixResult]
    final_delta_threshold: float
    passed: bool
    classification: str

    def to_dict(self) -> dict:
        return {
            "reduction": (
                "zero-mean Gaussian processes: finite-dimensional convergence "
                "is equivalent to covariance-matrix convergence, which is "
                "what this report certifies"
            ),
            "times": list(self.times),
            "alpha": self.alpha,
            "center": self.center,
            "ladder": self.ladder,
            "deltas": self.deltas,
            "ratios": self.ratios,
            "kappas": self.kappas,
            "kappa_stability": self.kappa_stability,
            "limit_matrix": self.limit.to_dict(),
            "finite_matrices": [f.to_dict() for f in self.finite],
            "final_delta_threshold": self.final_delta_threshold,
            "passed": self.passed,
            "classification": self.classification,
        }

    def write_json(self, path: str, config_hash: str | None = None) -> None:
        _io.write_json(path, self.to_dict(), config_hash)

    def write_csv(self, path: str, config_hash: str | None = None) -> None:
        rows = [(float(r), float(d)) for r, d in zip(self.ladder, self.deltas)]
        _io.write_csv(path, ["r", "delta"], rows, config_hash)


def convergence_diagnostic(
    spec: NormalizedFunctionalSpec,
    r_ladder,
    quad: QuadratureSpec | None = None,
    final_delta_rel: float = 0.02,
) -> ConvergenceReport:
    """Certify convergence of the finite-r covariances to the limit matrix.

    Passes when the max-abs entrywise deviation strictly decreases along the
    ladder and the final deviation is below ``final_delta_rel`` times the
    largest limit entry.  A deviation that stalls or grows is classified as
    NORMALIZATION MISMATCH (the r-exponent does not match the singularity).
    """
    if spec.j is None:
        raise ValueError("convergence runs need a singularity index j")
    quad = quad or QuadratureSpec()
    ladder = [float(r) for r in r_ladder]
    if len(ladder) < 2 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("r_ladder must be strictly increasing with >= 2 rungs")
    limit = limit_cov(spec, quad)
    limit_scale = float(np.max(np.abs(limit.matrix)))
    finite = []
    deltas = []
    kappas = []
    for r in ladder:
        fr = finite_r_cov(spec, r, quad)
        finite.append(fr)
        deltas.append(float(np.max(np.abs(fr.matrix - limit.matrix))))
        kappas.append(float(fr.matrix[-1, -1] / limit.matrix[-1, -1]))
    ratios = [deltas[i + 1] / deltas[i] for i in range(len(deltas) - 1)]
    decreasing = all(d2 < d1 for d1, d2 in zip(deltas, deltas[1:]))
    threshold = final_delta_rel * limit_scale
    kappa_stability = abs(kappas[-1] / kappas[-2] - 1.0) if len(kappas) >= 2 else np.inf
    if decreasing and deltas[-1] <= threshold:
        classification = "CONVERGENT"
        passed = True
    elif not decreasing or deltas[-1] > 0.5 * deltas[0]:
        classification = "NORMALIZATION MISMATCH"
        passed = False
    else:
        classification = "NOT CONVERGED"
        passed = False
    return ConvergenceReport(
        times=spec.times,
        alpha=spec.alpha,
        center=spec.center,
        ladder=ladder,
        deltas=deltas,
        ratios=ratios,
        kappas=kappas,
        kappa_stability=kappa_stability,
        limit=limit,
        finite=finite,
        final_delta_threshold=threshold,
        passed=passed,
        classification=classification,
    )


@dataclass
class DegenerationReport:
    center: float
    alpha: float
    t: float
    ladder: list[float]
    variances: list[float]
    final_over_initial: float
    ratio_threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "center": self.center,
            "alpha": self.alpha,
            "t": self.t,
            "ladder": self.ladder,
            "variances": self.variances,
            "final_over_initial": self.final_over_initial,
            "ratio_threshold": self.ratio_threshold,
            "passed": self.passed,
        }

    def write_json(self, path: str, config_hash: str | None = None) -> None:
        _io.write_json(path, self.to_dict(), config_hash)

    def write_csv(self, path: str, config_hash: str | None = None) -> None:
        rows = [(float(r), float(v)) for r, v in zip(self.ladder, self.variances)]
        _io.write_csv(path, ["r", "variance"], rows, config_hash)


def degeneration_diagnostic(
    density: CyclicalSpectralDensity,
    a: float,
    alpha: float,
    kernel: WeightKernel,
    t: float,
    r_ladder,
    quad: QuadratureSpec | None = None,
    ratio_threshold: float = 0.1,
    allow_singular_center: bool = False,
) -> DegenerationReport:
    """Certify that the normalized variance dies along the r ladder when the
    weight is centered away from every singular frequency.

    The variance is the finite-r covariance diagonal with unit constants and
    the free normalization exponent alpha.  ``allow_singular_center`` admits
    control runs centered *at* a singular frequency, where the variance must
    not die; the default rejects such centers as a misuse.
    """
    quad = quad or QuadratureSpec()
    if not 0.0 < alpha < 1.0:
        raise ValueError(
            "alpha = 1 (and anything outside (0, 1)) is excluded: the "
            "degeneration normalization requires 0 < alpha < 1"
        )
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    singular = (0.0,) + density.singular_frequencies
    if not allow_singular_center and any(a == s for s in singular):
        raise ValueError(
            f"center frequency a = {a:g} coincides with a singular frequency; "
            "the degeneration diagnostic requires a center carrying no "
            "spectral singularity"
        )
    if kernel.a != a:
        raise ValueError("kernel center does not match the requested a")
    spec = NormalizedFunctionalSpec(
        density=density, kernel=kernel, alpha=alpha, j=None, times=(t,)
    )
    ladder = [float(r) for r in r_ladder]
    if len(ladder) < 2 or any(b <= c for c, b in zip(ladder, ladder[1:])):
        raise ValueError("r_ladder must be strictly increasing with >= 2 rungs")
    variances = [float(finite_r_cov(spec, r, quad).matrix[0, 0]) for r in ladder]
    final_over_initial = variances[-1] / variances[0]
    decreasing = all(v2 < v1 for v1, v2 in zip(variances, variances[1:]))
    passed = decreasing and final_over_initial < ratio_threshold
    return DegenerationReport(
        center=float(a),
        alpha=float(alpha),
        t=float(t),
        ladder=ladder,
        variances=variances,
        final_over_initial=final_over_initial,
        ratio_threshold=ratio_threshold,
        passed=passed,
    )
