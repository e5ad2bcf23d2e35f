"""Self-similar Barenblatt profile of the homogeneous (m, p) equation.

The normalisation is

    B(x, t) = t^{-lam0} [1 - b (|x| / t^{1/lam0})^{p/(p-1)}]_+^{(p-1)/(m+p-3)},  t > 0,

with lam0 = n(m+p-3) and b = (p-1)/p * (m+p-3) / ((m+p-2) lam0^{1/(p-1)}),
and B = 0 for t <= 0. It is implemented as written; ``residual_diagnostic``
measures how well it satisfies the discrete equation instead of assuming it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import Grid1D, SolverConfig, SpaceTimeField, residual


class DegenerateFamily(ValueError):
    """m + p <= 3: the profile exponents are undefined."""


@dataclass(frozen=True)
class BarenblattParams:
    m: float
    p: float
    n: int
    lambda0: float
    b: float


def barenblatt_params(m: float, p: float, n: int) -> BarenblattParams:
    d = m + p - 3
    if d <= 0:
        raise DegenerateFamily(f"m + p - 3 = {d} <= 0")
    lam0 = n * d
    b = (p - 1) / p * d / ((m + p - 2) * lam0 ** (1 / (p - 1)))
    return BarenblattParams(m=m, p=p, n=n, lambda0=lam0, b=b)


def _radius(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n == 1:
        return np.abs(x[..., 0]) if x.ndim >= 2 and x.shape[-1] == 1 else np.abs(x)
    if x.shape[-1:] != (n,):
        raise ValueError(f"points must have trailing dimension {n}, got shape {x.shape}")
    return np.linalg.norm(x, axis=-1)


def support_radius(bp: BarenblattParams, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return t ** (1 / bp.lambda0) * bp.b ** (-(bp.p - 1) / bp.p)


def evaluate(bp: BarenblattParams, x, t, radial: bool = False):
    """B(x, t); points are rows of ``x`` (or radii when ``radial``)."""
    r = np.abs(np.asarray(x, dtype=float)) if radial else _radius(x, bp.n)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    out = np.zeros(r.shape)
    live = t > 0
    if np.any(live):
        tl, rl = t[live], r[live]
        z = rl / tl ** (1 / bp.lambda0)
        bracket = np.clip(1 - bp.b * z ** (bp.p / (bp.p - 1)), 0.0, None)
        # exact zero on and outside the support sphere
        bracket[rl >= support_radius(bp, tl)] = 0.0
        out[live] = tl ** (-bp.lambda0) * bracket ** ((bp.p - 1) / (bp.m + bp.p - 3))
    return out if out.ndim else float(out)


def self_similarity_check(bp: BarenblattParams, x, t, sigma: float) -> float:
    """max |B(sigma^{1/lam0} x, sigma t) - sigma^{-lam0} B(x, t)| over samples."""
    x = np.asarray(x, dtype=float)
    lhs = evaluate(bp, sigma ** (1 / bp.lambda0) * x, sigma * np.asarray(t, dtype=float))
    rhs = sigma ** (-bp.lambda0) * evaluate(bp, x, t)
    return float(np.max(np.abs(lhs - rhs)))


def sample_points(bp: BarenblattParams, n_samples: int, seed: int = 0,
                  t_range=(0.5, 2.0)):
    """Random (x, t) inside the support, x in R^n."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(*t_range, size=n_samples)
    d = rng.normal(size=(n_samples, bp.n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    r = rng.uniform(0, 0.99, size=n_samples) * support_radius(bp, t)
    return d * r[:, None], t


def sample_field(bp: BarenblattParams, grid: Grid1D, times) -> SpaceTimeField:
    """B sampled at the cell centres of a 1D grid (radial coordinate |x|)."""
    times = np.asarray(times, dtype=float)
    vals = np.array([evaluate(bp, grid.centers, tk, radial=True) for tk in times])
    return SpaceTimeField(grid, times, vals)


@dataclass
class ResidualReport:
    n_cells: tuple
    linf: tuple
    ratio: float
    notes: str = ""

    def to_dict(self) -> dict:
        return {"n_cells": list(self.n_cells), "residual_linf": list(self.linf),
                "ratio": self.ratio, "notes": self.notes}


def residual_diagnostic(bp: BarenblattParams, grid_spec: dict, field_fn=None) -> ResidualReport:
    """Discrete-operator residual of B on an interior band at two resolutions.

    ``grid_spec`` holds x_min, x_max, t_min, t_max, n_cells and n_times; the
    second resolution halves both dx and dt. ``field_fn(grid, times)``
    replaces B, e.g. for zero or affine control fields. Report only.
    """
    cfg = SolverConfig(eps_u=0.0, eps_g=0.0)
    n0 = int(grid_spec.get("n_cells", 64))
    nt0 = int(grid_spec.get("n_times", 64))
    t0, t1 = float(grid_spec.get("t_min", 1.0)), float(grid_spec.get("t_max", 1.5))
    x0, x1 = float(grid_spec.get("x_min", 0.1)), float(grid_spec.get("x_max", 0.5))
    notes = []
    if field_fn is None and bp.n == 1:
        if x1 >= float(support_radius(bp, t0)) or x0 * x1 <= 0:
            notes.append("band touches the free boundary or the origin")
    norms = []
    sizes = (n0, 2 * n0)
    for k, n in enumerate(sizes):
        grid = Grid1D(x0, x1, n)
        times = np.linspace(t0, t1, nt0 * 2 ** k + 1)
        fld = field_fn(grid, times) if field_fn else sample_field(bp, grid, times)
        res = residual(fld, bp.m, bp.p, None, cfg)
        norms.append(float(np.max(np.abs(res))))
    ratio = norms[0] / norms[1] if norms[1] > 0 else (1.0 if norms[0] == 0 else float("inf"))
    return ResidualReport(sizes, tuple(norms), ratio, "; ".join(notes))
