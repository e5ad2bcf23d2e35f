"""Structural hypotheses on the flux: ellipticity, growth, coefficient oscillation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SampleFailure(AssertionError):
    def __init__(self, message, violations):
        super().__init__(message)
        self.violations = violations


@dataclass(frozen=True)
class CoefficientLaw:
    """Degeneracy law Phi with bounds on [0, sigma0] and (sigma0, inf)."""

    phi: Callable[[np.ndarray], np.ndarray]
    m: float
    gamma1: float
    gamma2: float
    psi1: float
    psi2: float
    sigma0: float

    def __post_init__(self):
        if not (0 < self.gamma1 <= self.gamma2 and 0 < self.psi1 <= self.psi2 and self.sigma0 > 0):
            raise ValueError("need 0 < gamma1 <= gamma2, 0 < psi1 <= psi2, sigma0 > 0")

    def check(self, s_max: float = 10.0, n: int = 2001) -> bool:
        s = np.linspace(0.0, s_max, n)
        v = self.phi(s)
        low = s <= self.sigma0
        pw = s[low] ** (self.m - 1)
        ok_low = np.all(self.gamma1 * pw <= v[low] * (1 + 1e-12) + 1e-300) and \
            np.all(v[low] <= self.gamma2 * pw * (1 + 1e-12) + 1e-300)
        ok_high = np.all(self.psi1 <= v[~low] * (1 + 1e-12)) and \
            np.all(v[~low] <= self.psi2 * (1 + 1e-12))
        return bool(ok_low and ok_high)

    @classmethod
    def power(cls, m: float, sigma0: float = 1.0, s_max: float = 10.0) -> "CoefficientLaw":
        """Phi(s) = m s^{m-1}; psi bounds taken over (sigma0, s_max]."""
        lo, hi = m * sigma0 ** (m - 1), m * s_max ** (m - 1)
        return cls(phi=lambda s: m * np.abs(s) ** (m - 1), m=m, gamma1=m, gamma2=m,
                   psi1=min(lo, hi), psi2=max(lo, hi), sigma0=sigma0)


def prototype_flux(m: float, p: float) -> Callable:
    """A(x, t, s, xi) = m |s|^{m-1} |xi|^{p-2} xi, zero where s = 0 or xi = 0."""

    def flux(x, t, s, xi):
        xi = np.asarray(xi, dtype=float)
        s = np.asarray(s, dtype=float)
        norm = np.linalg.norm(xi, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            su = np.where(s == 0, 0.0, np.abs(s) ** (m - 1)) if m != 1 else np.ones_like(s)
            gk = np.where(norm == 0, 0.0, norm ** (p - 2)) if p != 2 else np.ones_like(norm)
        return (m * su * gk)[..., None] * xi

    return flux


def scaled_flux(base: Callable, coef: Callable) -> Callable:
    """Multiply a flux by a scalar coefficient a(x, t)."""

    def flux(x, t, s, xi):
        a = np.asarray(coef(x, t), dtype=float)
        return a[..., None] * base(x, t, s, xi)

    return flux


@dataclass(frozen=True)
class FluxField:
    a_fn: Callable
    c1: float
    c2: float
    law: CoefficientLaw
    p: float
    osc_modulus: Callable[[float], float] = field(default=lambda rho: 0.0)
    c_osc: float = 1.0


@dataclass
class SampleSpec:
    n_dim: int = 1
    s_max: float = 2.0
    n_s: int = 21
    xi_radii: tuple = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
    n_dirs: int = 8
    n_points: int = 16
    seed: int = 0


@dataclass
class StructureReport:
    min_ellipticity_ratio: float
    max_growth_ratio: float
    c1: float
    c2: float
    passed: bool
    n_samples: int
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "min_ellipticity_ratio": self.min_ellipticity_ratio,
            "max_growth_ratio": self.max_growth_ratio,
            "c1": self.c1, "c2": self.c2, "passed": self.passed,
            "n_samples": self.n_samples,
            "violations": self.violations[:20],
        }


def _samples(spec: SampleSpec):
    rng = np.random.default_rng(spec.seed)
    # points in Q_1^- = B_1 x (-1, 0]
    x = rng.uniform(-1, 1, size=(spec.n_points, spec.n_dim))
    x /= np.maximum(1.0, np.linalg.norm(x, axis=1))[:, None]
    t = -rng.uniform(0, 1, size=spec.n_points)
    s = np.linspace(-spec.s_max, spec.s_max, spec.n_s)
    s = s[s != 0]
    dirs = rng.normal(size=(spec.n_dirs, spec.n_dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    xi = np.concatenate([r * dirs for r in spec.xi_radii])
    return x, t, s, xi


def validate_structure(flux: FluxField, spec: SampleSpec | None = None,
                       raise_on_failure: bool = False) -> StructureReport:
    """Worst-case ellipticity and growth ratios over a deterministic sample set.

    Sample points with s = 0 are excluded (both sides vanish there).
    """
    spec = spec or SampleSpec()
    x, t, s, xi = _samples(spec)
    p = flux.p
    X = np.repeat(x, len(s) * len(xi), axis=0)
    T = np.repeat(t, len(s) * len(xi))
    S = np.tile(np.repeat(s, len(xi)), len(x))
    XI = np.tile(xi, (len(x) * len(s), 1))
    A = flux.a_fn(X, T, S, XI)
    phi = flux.law.phi(np.abs(S))
    nxi = np.linalg.norm(XI, axis=1)
    ell = np.einsum("ij,ij->i", A, XI) / (phi * nxi ** p)
    gro = np.linalg.norm(A, axis=1) / (phi * nxi ** (p - 1))
    tol = 1e-12
    bad = np.flatnonzero((ell < flux.c1 * (1 - tol)) | (gro > flux.c2 * (1 + tol)))
    violations = [
        {"x": X[i].tolist(), "t": float(T[i]), "s": float(S[i]), "xi": XI[i].tolist(),
         "ellipticity": float(ell[i]), "growth": float(gro[i])}
        for i in bad[:100]
    ]
    report = StructureReport(
        min_ellipticity_ratio=float(ell.min()), max_growth_ratio=float(gro.max()),
        c1=flux.c1, c2=flux.c2, passed=bad.size == 0, n_samples=int(ell.size),
        violations=violations,
    )
    if raise_on_failure and not report.passed:
        raise SampleFailure(f"{bad.size} samples violate the structure bounds", violations)
    return report


def oscillation_theta(flux: FluxField, m: float, point, point0, n_dim: int | None = None,
                      s_values=None, n_dirs: int = 16, seed: int = 0) -> float:
    """Sampled coefficient oscillation between two space-time points.

    The sup runs over s != 0 and unit directions |xi| = 1, where the two
    possible normalisations |xi|^p and |xi|^{p-1} coincide.
    """
    x, t = point
    x0, t0 = point0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dim = n_dim or x.size
    if s_values is None:
        s_values = np.concatenate([-np.logspace(-2, 1, 16), np.logspace(-2, 1, 16)])
    s_values = np.asarray(s_values, dtype=float)
    s_values = s_values[s_values != 0]
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_dirs, dim))
    if dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    S = np.repeat(s_values, len(dirs))
    XI = np.tile(dirs, (len(s_values), 1))
    n = len(S)
    A = flux.a_fn(np.tile(x, (n, 1)), np.full(n, float(t)), S, XI)
    A0 = flux.a_fn(np.tile(x0, (n, 1)), np.full(n, float(t0)), S, XI)
    ratio = np.linalg.norm(A - A0, axis=1) / np.abs(S) ** (m - 1)
    return float(ratio.max())


def oscillation_bound(flux: FluxField, point, point0) -> float:
    """C_A * omega_A(|(x, t) - (x0, t0)|)."""
    x, t = point
    x0, t0 = point0
    d = np.linalg.norm(np.append(np.atleast_1d(x) - np.atleast_1d(x0), t - t0))
    return flux.c_osc * flux.osc_modulus(float(d))


def flux_from_config(cfg: dict) -> FluxField:
    """Build a flux from {"kind": "prototype" | "scaled", "m", "p", ...}.

    The scaled kind multiplies the prototype by a coefficient sampled on a
    1D grid ("coef_x", "coef_values"), linearly interpolated in x[0].
    """
    kind = cfg.get("kind", "prototype")
    m, p = float(cfg["m"]), float(cfg["p"])
    base = prototype_flux(m, p)
    law = CoefficientLaw.power(m, sigma0=float(cfg.get("sigma0", 1.0)),
                               s_max=float(cfg.get("s_max", 10.0)))
    if kind == "prototype":
        return FluxField(a_fn=base, c1=float(cfg.get("c1", 1.0)), c2=float(cfg.get("c2", 1.0)),
                         law=law, p=p)
    if kind == "scaled":
        xs = np.asarray(cfg["coef_x"], dtype=float)
        vals = np.asarray(cfg["coef_values"], dtype=float)
        lip = float(np.max(np.abs(np.diff(vals) / np.diff(xs)))) if xs.size > 1 else 0.0

        def coef(x, t):
            return np.interp(np.asarray(x)[..., 0], xs, vals)

        return FluxField(a_fn=scaled_flux(base, coef),
                         c1=float(cfg.get("c1", vals.min())), c2=float(cfg.get("c2", vals.max())),
                         law=law, p=p, osc_modulus=lambda rho: rho, c_osc=m * lip)
    raise ValueError(f"unknown flux kind {kind!r}")
