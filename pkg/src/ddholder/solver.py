"""Explicit finite-volume solver for u_t = (m|u|^{m-1}|u_x|^{p-2}u_x)_x + f in 1D.

The degenerate diffusivity is regularised as

    m (ubar^2 + eps_u^2)^{(m-1)/2} (g^2 + eps_g^2)^{(p-2)/2}

at each cell face, where ubar is the arithmetic face average and g the face
gradient. Boundary values enter through one ghost cell on each side.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

TINY = np.finfo(float).tiny


class NonFinite(FloatingPointError):
    """A time step produced NaN or Inf."""


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 8:
            raise ValueError("n_cells must be >= 8")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_cells": self.n_cells}


@dataclass(frozen=True)
class Dirichlet:
    left: Union[float, Callable[[float], float]] = 0.0
    right: Union[float, Callable[[float], float]] = 0.0

    def values(self, t: float) -> tuple[float, float]:
        gl = self.left(t) if callable(self.left) else self.left
        gr = self.right(t) if callable(self.right) else self.right
        return float(gl), float(gr)


@dataclass(frozen=True)
class ZeroFlux:
    pass


@dataclass
class SolverConfig:
    t_end: float = 1.0
    eps_u: float = 1e-8
    eps_g: float = 1e-8
    cfl: float = 0.4
    dt_max: float | None = None
    bc: Union[Dirichlet, ZeroFlux] = field(default_factory=ZeroFlux)
    output_every: float | None = None

    def __post_init__(self):
        if not (0 < self.cfl < 1):
            raise ValueError("cfl must lie in (0, 1)")
        if self.eps_u < 0 or self.eps_g < 0:
            raise ValueError("regularisation parameters must be non-negative")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")

    @property
    def dt_cap(self) -> float:
        return self.dt_max if self.dt_max is not None else self.t_end / 1000.0


@dataclass
class SpaceTimeField:
    grid: Grid1D
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape != (self.times.size, self.grid.n_cells):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.times.size}, {self.grid.n_cells})")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def scaled(self, c: float) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.times.copy(), c * self.values)


SourceTerm = Callable[[np.ndarray, float], np.ndarray]


def face_diffusivity(uL, uR, dx: float, m: float, p: float, cfg: SolverConfig):
    ubar = 0.5 * (uL + uR)
    g = (uR - uL) / dx
    d = m * np.ones_like(ubar, dtype=float)
    if m != 1:
        d = d * (ubar * ubar + cfg.eps_u ** 2) ** ((m - 1) / 2)
    if p != 2:
        d = d * (g * g + cfg.eps_g ** 2) ** ((p - 2) / 2)
    return d


def _padded(row: np.ndarray, t: float, bc) -> np.ndarray:
    out = np.empty(row.size + 2)
    out[1:-1] = row
    if isinstance(bc, Dirichlet):
        gl, gr = bc.values(t)
        out[0] = 2 * gl - row[0]
        out[-1] = 2 * gr - row[-1]
    else:
        out[0] = row[0]
        out[-1] = row[-1]
    return out


def _face_coef(coef, grid: Grid1D, t: float):
    if coef is None:
        return 1.0
    faces = grid.x_min + np.arange(grid.n_cells + 1) * grid.dx
    return np.asarray(coef(faces, t), dtype=float)


def stable_dt(row, grid: Grid1D, m: float, p: float, cfg: SolverConfig,
              t: float = 0.0, coef=None) -> float:
    """cfl * dx^2 / ((p-1) D_max), capped by dt_max.

    Dirichlet boundary faces sit half a cell from the boundary value, so
    their diffusivity counts twice.
    """
    u = _padded(np.asarray(row, dtype=float), t, cfg.bc)
    d = face_diffusivity(u[:-1], u[1:], grid.dx, m, p, cfg) * np.abs(_face_coef(coef, grid, t))
    if isinstance(cfg.bc, Dirichlet):
        d[0] *= 2
        d[-1] *= 2
    d_max = max(float(np.max(d)), TINY)
    return min(cfg.dt_cap, cfg.cfl * grid.dx ** 2 / ((p - 1) * d_max))


def face_flux(row, grid: Grid1D, t: float, m: float, p: float, cfg: SolverConfig, coef=None):
    u = _padded(np.asarray(row, dtype=float), t, cfg.bc)
    g = np.diff(u) / grid.dx
    flux = face_diffusivity(u[:-1], u[1:], grid.dx, m, p, cfg) * g * _face_coef(coef, grid, t)
    if isinstance(cfg.bc, ZeroFlux):
        flux[0] = 0.0
        flux[-1] = 0.0
    return flux


def step(row, grid: Grid1D, t: float, dt: float, m: float, p: float,
         f: SourceTerm | None, cfg: SolverConfig, coef=None) -> np.ndarray:
    flux = face_flux(row, grid, t, m, p, cfg, coef)
    new = row + (dt / grid.dx) * (flux[1:] - flux[:-1])
    if f is not None:
        new = new + dt * np.asarray(f(grid.centers, t), dtype=float)
    if not np.all(np.isfinite(new)):
        raise NonFinite(f"non-finite values at t={t:.6g}, dt={dt:.3g}")
    return new


def solve(u0, grid: Grid1D, m: float, p: float, f: SourceTerm | None,
          cfg: SolverConfig, coef=None) -> SpaceTimeField:
    """March from t = 0 to cfg.t_end with dt = stable_dt at every step.

    Rows are stored at t = 0, at every multiple of ``output_every`` and at
    t_end. A NonFinite step is retried once with half the time step.
    """
    row = np.asarray(u0(grid.centers) if callable(u0) else u0, dtype=float).copy()
    if row.shape != (grid.n_cells,):
        raise ValueError("initial data does not match the grid")
    t = 0.0
    t_end = cfg.t_end
    if cfg.output_every:
        n_out = int(math.floor(t_end / cfg.output_every + 1e-9))
        targets = [k * cfg.output_every for k in range(1, n_out + 1)]
        if not targets or targets[-1] < t_end * (1 - 1e-12):
            targets.append(t_end)
    else:
        targets = [t_end]
    times, rows = [0.0], [row.copy()]
    n_steps = 0
    max_abs = float(np.max(np.abs(row)))
    for target in targets:
        while t < target * (1 - 1e-14) and target - t > 1e-300:
            dt = min(stable_dt(row, grid, m, p, cfg, t, coef), target - t)
            try:
                new = step(row, grid, t, dt, m, p, f, cfg, coef)
            except NonFinite:
                logger.warning("non-finite step at t=%.6g, retrying with dt/2", t)
                dt *= 0.5
                new = step(row, grid, t, dt, m, p, f, cfg, coef)
            row = new
            max_abs = max(max_abs, float(np.max(np.abs(row))))
            t = t + dt if target - (t + dt) > 1e-15 * max(1.0, target) else target
            n_steps += 1
        times.append(t)
        rows.append(row.copy())
    logger.info("solve: %d steps to t=%.6g, max|u|=%.6g", n_steps, t, max_abs)
    return SpaceTimeField(grid, np.array(times), np.array(rows),
                          meta={"n_steps": n_steps, "max_abs": max_abs})


def _d4(g: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h)


def mms_source(u_star: Callable, m: float, p: float, x: np.ndarray, t: float,
               h: float | None = None) -> np.ndarray:
    """f = d_t u* - d_x(m|u*|^{m-1}|d_x u*|^{p-2} d_x u*) by 4th-order central differences.

    The default step is a quarter of the grid spacing of ``x``.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = (x[1] - x[0]) / 4 if x.size > 1 else 1e-3

    # u* on the stencil x + i h, i = -4..4
    U = {i: u_star(x + i * h, t) for i in range(-4, 5)}

    def flux_at(k):
        ux = (-U[k + 2] + 8 * U[k + 1] - 8 * U[k - 1] + U[k - 2]) / (12 * h)
        return m * np.abs(U[k]) ** (m - 1) * np.abs(ux) ** (p - 2) * ux

    div = (-flux_at(2) + 8 * flux_at(1) - 8 * flux_at(-1) + flux_at(-2)) / (12 * h)
    ut = _d4(lambda s: u_star(x, t + s), h)
    return ut - div


def mms_forcing(u_star: Callable, m: float, p: float) -> SourceTerm:
    return lambda x, t: mms_source(u_star, m, p, x, t)


MANUFACTURED = {
    "exp_sin": lambda x, t: np.exp(-t) * (2 + np.sin(x)),
}


def residual(fld: SpaceTimeField, m: float, p: float, f: SourceTerm | None = None,
             cfg: SolverConfig | None = None) -> np.ndarray:
    """Discrete d_t u - div(flux) - f on interior cells and interior times."""
    if fld.times.size < 3:
        raise ValueError("residual needs at least 3 time rows")
    cfg = cfg or SolverConfig(eps_u=0.0, eps_g=0.0)
    u, t, dx = fld.values, fld.times, fld.grid.dx
    ut = (u[2:, 1:-1] - u[:-2, 1:-1]) / (t[2:] - t[:-2])[:, None]
    mid = u[1:-1]
    g = np.diff(mid, axis=1) / dx
    d = face_diffusivity(mid[:, :-1], mid[:, 1:], dx, m, p, cfg)
    flux = d * g
    div = (flux[:, 1:] - flux[:, :-1]) / dx
    res = ut - div
    if f is not None:
        xs = fld.x[1:-1]
        res = res - np.array([np.asarray(f(xs, tk), dtype=float) for tk in t[1:-1]])
    return res


@dataclass
class ConvergenceResult:
    n_cells: list
    err_linf: list
    err_l1: list
    order_linf: list
    order_l1: list
    flags: list

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("n_cells", "err_linf", "err_l1", "order_linf", "order_l1", "flags")}


def observed_orders(errors: Sequence[float]) -> tuple[list, list]:
    """log2 of successive error ratios; non-decreasing pairs give 0 and a flag."""
    orders, flags = [], []
    for coarse, fine in zip(errors[:-1], errors[1:]):
        if fine <= 0 or coarse <= 0 or fine >= coarse:
            orders.append(0.0 if fine == coarse or fine <= 0 or coarse <= 0
                          else math.log2(coarse / fine))
            flags.append("degenerate")
        else:
            orders.append(math.log2(coarse / fine))
            flags.append("")
    return orders, flags


def heat_case(n_cells: int, t_end: float = 0.1):
    grid = Grid1D(0.0, 1.0, n_cells)
    cfg = SolverConfig(t_end=t_end, bc=Dirichlet(0.0, 0.0), dt_max=t_end)
    fld = solve(lambda x: np.sin(np.pi * x), grid, 1.0, 2.0, None, cfg)
    exact = np.exp(-np.pi ** 2 * t_end) * np.sin(np.pi * grid.centers)
    return fld, exact


def mms_case(n_cells: int, m: float = 2.0, p: float = 3.0, u_star: str = "exp_sin",
             t_end: float = 0.005, x_min: float = 0.0, x_max: float = 1.0):
    us = MANUFACTURED[u_star]
    grid = Grid1D(x_min, x_max, n_cells)
    bc = Dirichlet(lambda t: float(us(np.array(x_min), t)), lambda t: float(us(np.array(x_max), t)))
    cfg = SolverConfig(t_end=t_end, bc=bc, dt_max=t_end)
    fld = solve(lambda x: us(x, 0.0), grid, m, p, mms_forcing(us, m, p), cfg)
    return fld, us(grid.centers, t_end)


def convergence_study(case_spec: dict, refinements: Sequence[int]) -> ConvergenceResult:
    """Observed orders against an exact ("heat") or manufactured ("mms") oracle."""
    if len(refinements) < 3:
        raise ValueError("need at least 3 refinement levels")
    if any(b != 2 * a for a, b in zip(refinements[:-1], refinements[1:])):
        raise ValueError("each refinement must double n_cells")
    kind = case_spec.get("kind", "heat")
    errs_inf, errs_l1 = [], []
    for n in refinements:
        if kind == "heat":
            fld, exact = heat_case(n, t_end=case_spec.get("t_end", 0.1))
        elif kind == "mms":
            fld, exact = mms_case(n, m=case_spec.get("m", 2.0), p=case_spec.get("p", 3.0),
                                  u_star=case_spec.get("u_star", "exp_sin"),
                                  t_end=case_spec.get("t_end", 0.005),
                                  x_min=case_spec.get("x_min", 0.0),
                                  x_max=case_spec.get("x_max", 1.0))
        else:
            raise ValueError(f"unknown case kind {kind!r}")
        e = np.abs(fld.values[-1] - exact)
        errs_inf.append(float(e.max()))
        errs_l1.append(float(e.sum() * fld.grid.dx))
    o_inf, f_inf = observed_orders(errs_inf)
    o_l1, f_l1 = observed_orders(errs_l1)
    flags = [a or b for a, b in zip(f_inf, f_l1)]
    return ConvergenceResult(list(refinements), errs_inf, errs_l1, o_inf, o_l1, flags)
