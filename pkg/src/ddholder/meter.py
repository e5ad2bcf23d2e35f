"""Empirical intrinsic Hölder regularity of discrete space-time fields.

Oscillations are taken over backward cylinders

    Q_rho(x0, t0) = [x0 - rho, x0 + rho] x (t0 - rho^theta, t0]

using grid-point sup/inf only. Cylinders are clipped to the field extent and
the covered fraction is recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exponents import INF, _inv
from .solver import Grid1D, SpaceTimeField

_T_TOL = 1e-12


class EmptyCylinder(ValueError):
    pass


class NonPositiveKappa(ValueError):
    pass


class OutOfExtent(ValueError):
    pass


@dataclass(frozen=True)
class IntrinsicCylinder:
    x0: float
    t0: float
    rho: float
    theta: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def height(self) -> float:
        return math.exp(self.theta * math.log(self.rho))


@dataclass
class CylinderSample:
    values: np.ndarray
    coverage: float

    @property
    def n_points(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def cylinder_sample(fld: SpaceTimeField, cyl: IntrinsicCylinder) -> CylinderSample:
    x, t = fld.x, fld.times
    h = cyl.height
    xm = np.abs(x - cyl.x0) <= cyl.rho * (1 + 1e-12)
    tm = (t > cyl.t0 - h) & (t <= cyl.t0 + _T_TOL * max(1.0, abs(cyl.t0)))
    lo_x, hi_x = fld.grid.x_min, fld.grid.x_max
    cov_x = max(0.0, min(hi_x, cyl.x0 + cyl.rho) - max(lo_x, cyl.x0 - cyl.rho)) / (2 * cyl.rho)
    cov_t = max(0.0, min(t[-1], cyl.t0) - max(t[0], cyl.t0 - h)) / h
    return CylinderSample(fld.values[np.ix_(tm, xm)], cov_x * cov_t)


def oscillation(fld: SpaceTimeField, cyl: IntrinsicCylinder, min_points: int = 4) -> float:
    s = cylinder_sample(fld, cyl)
    if s.n_points < min_points:
        raise EmptyCylinder(f"cylinder {cyl} holds {s.n_points} grid points")
    return float(s.values.max() - s.values.min())


def holder_seminorm(fld: SpaceTimeField, alpha: float, theta: float, rho0: float,
                    centers=None, n_radii: int = 8, min_points: int = 4) -> float:
    """sup over radii rho0 2^-j and centers of osc(Q_rho) / rho^alpha.

    Each cylinder is divided by the power of its own radius. Default centers
    are every 8th cell on every 8th time row.
    """
    if not (0 < alpha < 1) or not theta > 0:
        raise ValueError("need alpha in (0, 1) and theta > 0")
    if centers is None:
        centers = [(x0, t0) for t0 in fld.times[::8] for x0 in fld.x[::8]]
    best, measured = 0.0, 0
    for j in range(n_radii):
        rho = rho0 * 2.0 ** (-j)
        for x0, t0 in centers:
            try:
                osc = oscillation(fld, IntrinsicCylinder(x0, t0, rho, theta), min_points)
            except EmptyCylinder:
                continue
            measured += 1
            best = max(best, osc / rho ** alpha)
    if measured == 0:
        raise EmptyCylinder("no sampled cylinder holds enough grid points")
    return best


@dataclass
class OscillationSeries:
    lam: float
    rho0: float
    k_max: int
    radii: np.ndarray
    osc: np.ndarray
    truncated: bool = False

    def to_rows(self):
        return [(k, float(r), float(o)) for k, (r, o) in enumerate(zip(self.radii, self.osc))]


def lambda_adic_series(fld: SpaceTimeField, center, lam: float, rho0: float, k_max: int,
                       theta: float, min_x: int = 3, min_t: int = 2) -> OscillationSeries:
    """osc over Q_{lam^k rho0}(center) for k = 0..k_max, stopping at grid resolution.

    A level is resolved when its cylinder holds at least ``min_x`` cells and
    ``min_t`` time rows.
    """
    if not (0 < lam <= 0.25):
        raise ValueError("lambda must lie in (0, 1/4]")
    x0, t0 = center
    radii, osc = [], []
    truncated = False
    for k in range(k_max + 1):
        rho = rho0 * lam ** k
        smp = cylinder_sample(fld, IntrinsicCylinder(x0, t0, rho, theta))
        nt, nx = smp.shape
        if nx < min_x or nt < min_t:
            truncated = True
            break
        radii.append(rho)
        osc.append(float(smp.values.max() - smp.values.min()))
    if not radii:
        raise EmptyCylinder("the outermost cylinder is already below grid resolution")
    return OscillationSeries(lam, rho0, k_max, np.array(radii), np.array(osc), truncated)


@dataclass
class ExponentFit:
    alpha_emp: float
    theta_used: float
    r_squared: float
    iterations: int
    converged: bool
    no_decay: bool = False
    series: OscillationSeries | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"alpha_emp": self.alpha_emp, "theta": self.theta_used,
                "r_squared": self.r_squared, "iterations": self.iterations,
                "converged": self.converged, "no_decay": self.no_decay}


def _loglog_fit(series: OscillationSeries):
    keep = series.osc > 0
    if keep.sum() < 3:
        return None
    lx, ly = np.log(series.radii[keep]), np.log(series.osc[keep])
    slope, icpt = np.polyfit(lx, ly, 1)
    pred = slope * lx + icpt
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def fit_alpha_theta(fld: SpaceTimeField, center, m: float, p: float, lam: float = 0.25,
                    rho0: float = 1.0, k_max: int = 30, tol: float = 1e-6,
                    max_iter: int = 50, min_x: int = 3, min_t: int = 2) -> ExponentFit:
    """Fixed point of (alpha from log-log decay, theta = p - alpha (m + p - 3)).

    Seeded at theta = p. Fewer than three positive oscillation levels or a
    non-positive slope is reported as no_decay.
    """
    th = float(p)
    alpha, r2, series = 0.0, 0.0, None
    for it in range(1, max_iter + 1):
        series = lambda_adic_series(fld, center, lam, rho0, k_max, th, min_x, min_t)
        res = _loglog_fit(series)
        if res is None or res[0] <= 0:
            return ExponentFit(res[0] if res else 0.0, th, res[1] if res else 0.0,
                               it, False, True, series)
        alpha, r2 = res
        new_th = p - alpha * (m + p - 3)
        if new_th <= 0:
            return ExponentFit(alpha, th, r2, it, False, False, series)
        if abs(new_th - th) < tol:
            return ExponentFit(alpha, new_th, r2, it, True, False, series)
        th = new_th
    return ExponentFit(alpha, th, r2, max_iter, False, False, series)


@dataclass(frozen=True)
class NormalizationParams:
    s: float
    mu0: float
    kappa0: float
    pi0: float
    tau: float


def normalization_params(m: float, p: float, n: int, q: float, r: float, s: float,
                         delta: float, norm_u: float, norm_f: float,
                         include_omega: bool = False, omega_inv=None,
                         c_osc: float = 1.0) -> NormalizationParams:
    """Scaling factor mu0 that brings (u, f) into the smallness regime.

    The coefficient-oscillation term is only used with ``include_omega``;
    ``omega_inv`` is then the inverse of the modulus of continuity.
    """
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    iq, ir = _inv(q), _inv(r)
    kappa0 = s * (2 * (p - 1) + m) - (s * n * iq + ((2 * p - 1) * s + s * (m - 1)) * ir)
    if kappa0 <= 0:
        raise NonPositiveKappa(f"kappa0 = {kappa0:.6g} <= 0")
    pi0 = s * (2 * p + m - 3)
    tau = s * (m - 1) + 2 * s * (p - 1)
    terms = [1.0, (delta / (norm_f + 1)) ** (1 / kappa0)]
    if norm_u > 0:
        terms.append(norm_u ** (-1 / s))
    if include_omega:
        if omega_inv is None:
            raise ValueError("include_omega needs omega_inv")
        terms.append((delta / omega_inv(delta / (c_osc + 1))) ** (1 / pi0))
    return NormalizationParams(s=s, mu0=min(terms), kappa0=kappa0, pi0=pi0, tau=tau)


def rescale_field(fld: SpaceTimeField, x0: float, t0: float, rho: float, alpha: float,
                  theta: float, subtract: float = 0.0, out_grid: Grid1D | None = None,
                  out_times=None) -> SpaceTimeField:
    """v(x, t) = (u(x0 + rho x, t0 + rho^theta t) - subtract) / rho^alpha.

    Bilinear interpolation; by default v lives on the unit cylinder
    [-1, 1] x [-1, 0] at the resolution of the input.
    """
    out_grid = out_grid or Grid1D(-1.0, 1.0, fld.grid.n_cells)
    if out_times is None:
        out_times = np.linspace(-1.0, 0.0, fld.times.size)
    out_times = np.asarray(out_times, dtype=float)
    xs = x0 + rho * out_grid.centers
    ts = t0 + rho ** theta * out_times
    x, t = fld.x, fld.times
    slack_x = 1e-9 * max(1.0, abs(x[0]), abs(x[-1]))
    slack_t = 1e-9 * max(1.0, abs(t[0]), abs(t[-1]))
    if xs.min() < x[0] - slack_x or xs.max() > x[-1] + slack_x or \
            ts.min() < t[0] - slack_t or ts.max() > t[-1] + slack_t:
        raise OutOfExtent("rescaled cylinder leaves the field extent")
    xs = np.clip(xs, x[0], x[-1])
    ts = np.clip(ts, t[0], t[-1])
    interp = RegularGridInterpolator((t, x), fld.values, method="linear")
    T, X = np.meshgrid(ts, xs, indexing="ij")
    vals = interp(np.stack([T.ravel(), X.ravel()], axis=-1)).reshape(T.shape)
    return SpaceTimeField(out_grid, out_times, (vals - subtract) / rho ** alpha)


def f_rescale_threshold(m: float, p: float, n: int, q: float, r: float) -> float:
    """Largest alpha for which the rescaled sources do not grow."""
    iq, ir = _inv(q), _inv(r)
    return (p - n * iq - p * ir) / ((m + p - 2) - (m + p - 3) * ir)


def f_rescale_exponent(m: float, p: float, n: int, q: float, r: float, alpha: float,
                       k: int = 1, lam: float | None = None) -> float:
    """Power of lambda bounding ||f_k||^r by ||f||^r after k rescalings.

    ``lam`` only validates the range; the exponent does not depend on it.
    """
    if lam is not None and not (0 < lam < 1):
        raise ValueError("lambda must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be >= 1")
    th = p - alpha * (m + p - 3)
    inner = (-k * alpha * (m + p - 2) + k * (p - 1) + k) * q - n * k if not math.isinf(q) else None
    if inner is not None and not math.isinf(r):
        return inner * (r / q) - k * th
    # limit branches: divide the bracket by q first
    per_q = -k * alpha * (m + p - 2) + k * (p - 1) + k - n * k * _inv(q)
    if math.isinf(r):
        return math.copysign(INF, per_q) if per_q != 0 else -k * th
    return per_q * r - k * th


def rho0_lower_bound(gamma: float, alpha0: float, theta: float, m: float, p: float) -> float:
    """(1/(16 gamma))^{p_m / (alpha0 theta)}."""
    if not gamma > 0 or not (0 < alpha0 <= 1) or not theta > 0:
        raise ValueError("need gamma > 0, alpha0 in (0, 1], theta > 0")
    pm = 2.0 if m == 1 else p
    return (1 / (16 * gamma)) ** (pm / (alpha0 * theta))


def _weights(a: np.ndarray) -> np.ndarray:
    """Quadrature weights for samples at increasing points (cell-width midpoint rule)."""
    if a.size == 1:
        return np.ones(1)
    edges = np.concatenate([[a[0] - (a[1] - a[0]) / 2], (a[:-1] + a[1:]) / 2,
                            [a[-1] + (a[-1] - a[-2]) / 2]])
    return np.diff(edges)


def lqr_norm(values, q: float, r: float, dx: float, dt) -> float:
    """(sum_t (sum_x |f|^q dx)^{r/q} dt)^{1/r} with sup branches for q, r = inf.

    ``values`` is (time x space); ``dt`` is a scalar or per-row weights.
    Samples are treated as midpoints of their cells.
    """
    f = np.abs(np.atleast_2d(np.asarray(values, dtype=float)))
    if math.isinf(q):
        inner = f.max(axis=1)
    else:
        inner = (np.sum(f ** q, axis=1) * dx) ** (1 / q)
    if math.isinf(r):
        return float(inner.max())
    w = np.broadcast_to(np.asarray(dt, dtype=float), inner.shape)
    return float(np.sum(inner ** r * w) ** (1 / r))


def field_lqr_norm(fld: SpaceTimeField, q: float, r: float) -> float:
    return lqr_norm(fld.values, q, r, fld.grid.dx, _weights(fld.times))


def _bump(s: np.ndarray):
    """1 on [0, 1/2], smoothstep down to 0 at 1; returns value and d/ds."""
    y = np.clip((s - 0.5) / 0.5, 0.0, 1.0)
    val = 1 - (3 * y ** 2 - 2 * y ** 3)
    dval = np.where((s > 0.5) & (s < 1), -(6 * y - 6 * y ** 2) / 0.5, 0.0)
    return val, dval


@dataclass
class EnergyReport:
    lhs_terms: dict
    rhs_terms: dict
    lhs: float
    rhs: float
    ratio: float
    undefined: bool

    def to_dict(self) -> dict:
        return {"lhs_terms": self.lhs_terms, "rhs_terms": self.rhs_terms, "lhs": self.lhs,
                "rhs": self.rhs, "ratio": self.ratio, "undefined": self.undefined}


def energy_diagnostic(fld: SpaceTimeField, m: float, p: float, f=None, cutoff: dict | None = None,
                      q: float = 2.0, r: float = 2.0) -> EnergyReport:
    """Both sides of the level-zero Caccioppoli inequality on a discrete field.

    The cutoff is a product of polynomial bumps, equal to 1 on the inner half
    of [x_center -/+ x_half] x [t_start, t_end] and 0 at its boundary. ``f``
    is a (time x space) array or a callable f(x, t); None means zero.
    """
    x, t, u = fld.x, fld.times, fld.values
    cutoff = cutoff or {}
    xc = cutoff.get("x_center", 0.5 * (fld.grid.x_min + fld.grid.x_max))
    xh = cutoff.get("x_half", 0.5 * (fld.grid.x_max - fld.grid.x_min))
    ta, tb = cutoff.get("t_start", t[0]), cutoff.get("t_end", t[-1])
    tc, th = 0.5 * (ta + tb), 0.5 * (tb - ta)
    bx, dbx = _bump(np.abs(x - xc) / xh)
    dbx = dbx * np.sign(x - xc) / xh
    bt, dbt = _bump(np.abs(t - tc) / th)
    dbt = dbt * np.sign(t - tc) / th
    xi = bt[:, None] * bx[None, :]
    xi_t = dbt[:, None] * bx[None, :]
    xi_x = bt[:, None] * dbx[None, :]
    dx, wt = fld.grid.dx, _weights(t)
    ux = np.gradient(u, dx, axis=1)
    au = np.abs(u)
    phi = m * au ** (m - 1) if m != 1 else np.ones_like(u)
    sup_mass = float(np.max(np.sum(u ** 2 * xi ** p, axis=1) * dx))
    grad_energy = float(np.sum(np.sum(phi * np.abs(ux) ** p * xi ** p, axis=1) * dx * wt))
    time_cut = float(np.sum(np.sum(u ** 2 * xi ** (p - 1) * np.abs(xi_t), axis=1) * dx * wt))
    space_cut = float(np.sum(np.sum(phi * au ** p * np.abs(xi_x) ** p, axis=1) * dx * wt))
    if f is None:
        f_norm = 0.0
    else:
        fv = np.array([np.asarray(f(x, tk), dtype=float) for tk in t]) if callable(f) \
            else np.asarray(f, dtype=float)
        f_norm = lqr_norm(fv, q, r, dx, wt)
    lhs = sup_mass + grad_energy
    rhs = time_cut + space_cut + f_norm ** 2
    undefined = rhs == 0
    ratio = 0.0 if undefined else lhs / rhs
    return EnergyReport(
        lhs_terms={"sup_mass": sup_mass, "gradient_energy": grad_energy},
        rhs_terms={"time_cutoff": time_cut, "space_cutoff": space_cut, "source": f_norm ** 2},
        lhs=lhs, rhs=rhs, ratio=ratio, undefined=undefined)
