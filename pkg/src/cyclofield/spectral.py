"""Cyclical spectral densities of homogeneous isotropic random fields.

The model is a radial spectral density on [0, inf) of the product form

    phi(rho) = h(rho) / rho**(n - alpha0) * prod_i |rho - a_i|**(alpha_i - 1)

with 0 < alpha0 < n, singular frequencies 0 < a_1 < ... < a_{k-1}, exponents
alpha_i in (0, 1), and a bounded nonnegative factor h that is continuous and
nonzero at 0 and at each a_i.  Any such density is long-range dependent; each
a_i adds a cyclical component.  The spectral function is

    Phi(u) = omega_n * int_0^u rho**(n-1) phi(rho) drho,

omega_n = 2 pi**(n/2) / Gamma(n/2), and the total mass sigma^2 = Phi(inf) is
the field variance.  Integrability of rho**(n-1) phi is the validity gate; it
is certified numerically by ``spectral_mass``.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .quad import IntegralResult, QuadratureSpec, integrate_singular
from .specfun import gamma_fn

__all__ = [
    "CyclicalSpectralDensity",
    "LrdClassification",
    "RadialProfile",
    "SpectralFunctionValue",
    "eval_Phi",
    "eval_phi",
    "from_json",
    "lrd_diagnostic",
    "make_density",
    "registry",
    "sphere_surface",
    "spectral_mass",
    "to_json",
]

MAX_DIMENSION = 4


def sphere_surface(n: int) -> float:
    """Surface area of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (0.5 * n) / gamma_fn(0.5 * n)


# ---------------------------------------------------------------------------
# Bounded radial factors h
# ---------------------------------------------------------------------------

_BUILTIN_PROFILES = ("two_plus_cos", "one_plus_sin", "example3", "const", "gaussian")


@dataclass(frozen=True)
class RadialProfile:
    """Bounded nonnegative factor h on [0, inf).

    ``kind`` is "builtin" or "table".  Builtins:

    two_plus_cos(a)   (2 + cos rho) on [0, a], 0 beyond
    one_plus_sin(a)   (1 + sin rho) on [0, a], 0 beyond
    example3          2(2 + cos rho) on [0, 1], (1 + sin rho) on (1, 2]
    const(support, value)
    gaussian(scale)   exp(-(rho/scale)^2), infinite support

    Tables are linearly interpolated on their grid and 0 beyond it; the grid
    must start at 0.  ``support`` (possibly inf) bounds where h can be
    nonzero, which is what makes the spectral-mass integral certifiable.
    """

    kind: str
    name: str = ""
    params: tuple[tuple[str, float], ...] = ()
    table_x: tuple[float, ...] = ()
    table_values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "builtin":
            if self.name not in _BUILTIN_PROFILES:
                raise ValueError(
                    f"unknown builtin profile {self.name!r}; available: "
                    f"{_BUILTIN_PROFILES}"
                )
        elif self.kind == "table":
            x = np.asarray(self.table_x, dtype=float)
            v = np.asarray(self.table_values, dtype=float)
            if x.size < 2 or x.size != v.size:
                raise ValueError("table profile needs matching grids of length >= 2")
            if x[0] != 0.0 or np.any(np.diff(x) <= 0.0):
                raise ValueError("table grid must start at 0 and increase strictly")
            if np.any(v < 0.0):
                raise ValueError("profile values must be nonnegative")
        else:
            raise ValueError(f"profile kind must be 'builtin' or 'table', got {self.kind!r}")

    def _param(self, key: str, default: float | None = None) -> float:
        for k, v in self.params:
            if k == key:
                return v
        if default is None:
            raise ValueError(f"profile {self.name!r} requires parameter {key!r}")
        return default

    @property
    def support(self) -> float:
        if self.kind == "table":
            return float(self.table_x[-1])
        if self.name in ("two_plus_cos", "one_plus_sin"):
            return self._param("a", 1.0)
        if self.name == "example3":
            return 2.0
        if self.name == "const":
            return self._param("support")
        return np.inf  # gaussian

    def __call__(self, rho):
        x = np.atleast_1d(np.asarray(rho, dtype=float))
        if self.kind == "table":
            out = np.interp(x, self.table_x, self.table_values, left=0.0, right=0.0)
            out = np.where(x > self.table_x[-1], 0.0, out)
        elif self.name == "two_plus_cos":
            a = self._param("a", 1.0)
            out = np.where(x <= a, 2.0 + np.cos(x), 0.0)
        elif self.name == "one_plus_sin":
            a = self._param("a", 1.0)
            out = np.where(x <= a, 1.0 + np.sin(x), 0.0)
        elif self.name == "example3":
            out = np.where(
                x <= 1.0,
                2.0 * (2.0 + np.cos(x)),
                np.where(x <= 2.0, 1.0 + np.sin(x), 0.0),
            )
        elif self.name == "const":
            out = np.where(x <= self._param("support"), self._param("value", 1.0), 0.0)
        else:  # gaussian
            scale = self._param("scale", 1.0)
            out = np.exp(-((x / scale) ** 2))
        return out if np.ndim(rho) else float(out[0])


# ---------------------------------------------------------------------------
# The density itself
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralFunctionValue:
    u: float
    phi_of_u: float


@dataclass(frozen=True)
class LrdClassification:
    lrd_at_zero: bool
    cyclical_frequencies: tuple[float, ...]

    @property
    def label(self) -> str:
        parts = ["LRD at 0"] if self.lrd_at_zero else []
        if self.cyclical_frequencies:
            freqs = ", ".join(f"{a:g}" for a in self.cyclical_frequencies)
            parts.append(f"cyclical LRD at {freqs}")
        return "; ".join(parts) if parts else "short-range"


@dataclass(frozen=True)
class CyclicalSpectralDensity:
    """Validated parameters of the product-form singular spectral density."""

    n: int
    alpha0: float
    singularities: tuple[tuple[float, float], ...]
    h: RadialProfile

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIMENSION:
            raise ValueError(f"dimension n must be in 1..{MAX_DIMENSION}")
        if not 0.0 < self.alpha0 < self.n:
            raise ValueError("alpha0 must lie strictly in (0, n)")
        sing = tuple((float(a), float(alpha)) for a, alpha in self.singularities)
        locs = [a for a, _ in sing]
        if any(a <= 0.0 for a in locs):
            raise ValueError("singular frequencies must be strictly positive")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ValueError("singular frequencies must be strictly increasing")
        if any(not 0.0 < alpha < 1.0 for _, alpha in sing):
            raise ValueError("singularity exponents alpha_i must lie strictly in (0, 1)")
        object.__setattr__(self, "singularities", sing)
        # h must be continuous and nonzero at 0 and at every singular
        # frequency; a vanishing h would cancel the singularity and leave
        # the density outside the model class.
        for a in (0.0, *locs):
            value = float(self.h(a))
            if value == 0.0:
                raise ValueError(f"h must be nonzero at singular frequency {a:g}")
            probes = [a + 1e-9] if a == 0.0 else [a - 1e-9, a + 1e-9]
            for p in probes:
                if abs(float(self.h(p)) - value) > 1e-6 * (1.0 + abs(value)):
                    raise ValueError(f"h must be continuous near singular frequency {a:g}")
        grid = np.linspace(0.0, min(self.support_end, 1e3), 257)
        if np.any(np.asarray(self.h(grid)) < -1e-12):
            raise ValueError("h must be nonnegative")

    @property
    def support_end(self) -> float:
        return self.h.support

    @property
    def singular_frequencies(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.singularities)

    def radial_singular_points(self) -> tuple[tuple[float, float], ...]:
        """Declared singular structure of rho**(n-1) * phi(rho).

        The rho**(n-1) volume factor absorbs most of the origin singularity:
        the exponent there is alpha0 - 1, singular only when alpha0 < 1.
        """
        pts = []
        if self.alpha0 < 1.0:
            pts.append((0.0, self.alpha0 - 1.0))
        pts.extend((a, alpha - 1.0) for a, alpha in self.singularities)
        return tuple(pts)

    def phi(self, rho):
        """Pointwise phi; rejects rho = 0 and the singular frequencies."""
        x = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(x <= 0.0):
            raise ValueError("phi is evaluated for rho > 0 only")
        for a, _ in self.singularities:
            if np.any(x == a):
                raise ValueError(
                    f"phi is singular at rho = {a:g}; integrate across it with "
                    "the quadrature engine instead of evaluating pointwise"
                )
        out = np.asarray(self.h(x), dtype=float) / x ** (self.n - self.alpha0)
        for a, alpha in self.singularities:
            out = out * np.abs(x - a) ** (alpha - 1.0)
        return out if np.ndim(rho) else float(out[0])

    def radial_weight(self, rho):
        """rho**(n-1) * phi(rho), the integrand of the spectral measure."""
        x = np.asarray(rho, dtype=float)
        return x ** (self.n - 1) * self.phi(rho)

    def quad_spec(self, base: QuadratureSpec | None = None) -> QuadratureSpec:
        base = base or QuadratureSpec()
        return base.with_(singular_points=self.radial_singular_points())


def eval_phi(density: CyclicalSpectralDensity, rho):
    return density.phi(rho)


@functools.lru_cache(maxsize=256)
def _mass_result(density: CyclicalSpectralDensity, spec: QuadratureSpec) -> IntegralResult:
    qs = density.quad_spec(spec)
    result = integrate_singular(density.radial_weight, 0.0, density.support_end, qs)
    result.value *= sphere_surface(density.n)
    result.error_estimate *= sphere_surface(density.n)
    return result


def spectral_mass(
    density: CyclicalSpectralDensity, spec: QuadratureSpec | None = None
) -> float:
    """Total spectral mass sigma^2; raises if the integral fails to converge
    (this is the numerical integrability gate of the model)."""
    result = _mass_result(density, spec or QuadratureSpec())
    result.require_converged("spectral mass")
    return result.value


def eval_Phi(
    density: CyclicalSpectralDensity, u: float, spec: QuadratureSpec | None = None
) -> SpectralFunctionValue:
    """Spectral function Phi(u) = omega_n int_0^u rho^(n-1) phi drho."""
    if u < 0.0:
        raise ValueError("Phi is defined for u >= 0")
    if u == 0.0:
        return SpectralFunctionValue(0.0, 0.0)
    spec = spec or QuadratureSpec()
    hi = min(u, density.support_end)
    if hi <= 0.0:
        return SpectralFunctionValue(float(u), 0.0)
    result = integrate_singular(density.radial_weight, 0.0, hi, density.quad_spec(spec))
    result.require_converged("spectral function")
    return SpectralFunctionValue(float(u), sphere_surface(density.n) * result.value)


def lrd_diagnostic(density: CyclicalSpectralDensity) -> LrdClassification:
    """Classify the long-range dependence of a valid density.

    Every density in the class is unbounded at the origin (alpha0 < n and
    h(0) != 0 are construction invariants), so the zero-frequency flag is
    always set; singular frequencies add cyclical components.
    """
    return LrdClassification(
        lrd_at_zero=True,
        cyclical_frequencies=density.singular_frequencies,
    )


# ---------------------------------------------------------------------------
# Registry of built-in densities and the generic constructor
# ---------------------------------------------------------------------------


def make_density(
    n: int,
    alpha0: float,
    singularities=(),
    h: RadialProfile | None = None,
) -> CyclicalSpectralDensity:
    if h is None:
        raise ValueError("make_density requires a radial profile h")
    return CyclicalSpectralDensity(
        n=int(n),
        alpha0=float(alpha0),
        singularities=tuple((float(a), float(alpha)) for a, alpha in singularities),
        h=h,
    )


def _example1(a: float = 1.0) -> CyclicalSpectralDensity:
    profile = RadialProfile("builtin", "two_plus_cos", (("a", float(a)),))
    return CyclicalSpectralDensity(n=3, alpha0=2.0, singularities=(), h=profile)


def _example2(a: float = 1.0) -> CyclicalSpectralDensity:
    profile = RadialProfile("builtin", "one_plus_sin", (("a", float(a)),))
    return CyclicalSpectralDensity(n=3, alpha0=2.0, singularities=(), h=profile)


def _example3() -> CyclicalSpectralDensity:
    profile = RadialProfile("builtin", "example3")
    return CyclicalSpectralDensity(n=3, alpha0=2.0, singularities=(), h=profile)


def registry() -> dict:
    """Named built-in densities; values are constructor callables."""
    return {"example1": _example1, "example2": _example2, "example3": _example3}


def get_density(name: str, **kwargs) -> CyclicalSpectralDensity:
    reg = registry()
    if name not in reg:
        raise ValueError(f"unknown density {name!r}; registry has {sorted(reg)}")
    return reg[name](**kwargs)


# ---------------------------------------------------------------------------
# JSON round trip (the canonical CLI config fragment)
# ---------------------------------------------------------------------------


def _profile_to_dict(profile: RadialProfile) -> dict:
    if profile.kind == "builtin":
        return {
            "kind": "builtin",
            "name": profile.name,
            "params": {k: v for k, v in profile.params},
        }
    return {
        "kind": "table",
        "x": list(profile.table_x),
        "values": list(profile.table_values),
    }


def _profile_from_dict(doc: dict) -> RadialProfile:
    kind = doc.get("kind")
    if kind == "builtin":
        params = tuple(sorted((str(k), float(v)) for k, v in doc.get("params", {}).items()))
        return RadialProfile("builtin", str(doc["name"]), params)
    if kind == "table":
        return RadialProfile(
            "table",
            table_x=tuple(float(v) for v in doc["x"]),
            table_values=tuple(float(v) for v in doc["values"]),
        )
    raise ValueError(f"h profile kind must be 'builtin' or 'table', got {kind!r}")


def to_json(density: CyclicalSpectralDensity) -> str:
    doc = {
        "n": density.n,
        "alpha0": density.alpha0,
        "singularities": [
            {"a": a, "alpha": alpha} for a, alpha in density.singularities
        ],
        "h": _profile_to_dict(density.h),
    }
    return json.dumps(doc, sort_keys=True)


def density_from_dict(doc: dict) -> CyclicalSpectralDensity:
    if "registry" in doc:
        name = doc["registry"]
        kwargs = {k: v for k, v in doc.items() if k != "registry"}
        return get_density(str(name), **kwargs)
    required = {"n", "alpha0", "singularities", "h"}
    missing = required - set(doc)
    if missing:
        raise ValueError(f"density document is missing keys {sorted(missing)}")
    return CyclicalSpectralDensity(
        n=int(doc["n"]),
        alpha0=float(doc["alpha0"]),
        singularities=tuple(
            (float(s["a"]), float(s["alpha"])) for s in doc["singularities"]
        ),
        h=_profile_from_dict(doc["h"]),
    )


def from_json(text: str) -> CyclicalSpectralDensity:
    return density_from_dict(json.loads(text))
