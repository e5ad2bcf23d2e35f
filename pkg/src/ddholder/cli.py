"""Batch front door: ``ddholder <verb> --config FILE --out DIR --seed N``.

One JSON document describes an experiment. Command-line flags override the
top-level ``command``, ``output_dir`` and ``seed`` fields of that document.
Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import barenblatt as bb
from . import exponents as ex
from . import io
from . import meter
from . import solver as sv
from . import structure as st

logger = logging.getLogger("ddholder")

COMMANDS = ("exponents", "sweep", "solve", "measure", "validate", "barenblatt")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: ex.ProblemParams | None = None
    alpha_hom: float | None = None
    solver: dict | None = None
    measure: dict | None = None
    sweep: dict | None = None
    validate: dict | None = None
    barenblatt: dict | None = None
    output_dir: str = "out"
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config: top level must be a JSON object")
        d = copy.deepcopy(d)
        command = d.pop("command", None)
        if command not in COMMANDS:
            raise ConfigError(f"command: expected one of {COMMANDS}, got {command!r}")
        params = None
        if d.get("params") is not None:
            try:
                params = ex.ProblemParams.from_dict(d.pop("params"))
            except KeyError as e:
                raise ConfigError(f"params.{e.args[0]}: missing") from None
            except (TypeError, ValueError) as e:
                raise ConfigError(f"params: {e}") from None
        else:
            d.pop("params", None)
        seed = d.pop("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError(f"seed: expected an integer, got {seed!r}")
        alpha_hom = d.pop("alpha_hom", None)
        if alpha_hom is not None and not (isinstance(alpha_hom, (int, float)) and 0 < alpha_hom <= 1):
            raise ConfigError(f"alpha_hom: expected a number in (0, 1], got {alpha_hom!r}")
        sections = {}
        for key in ("solver", "measure", "sweep", "validate", "barenblatt"):
            val = d.pop(key, None)
            if val is not None and not isinstance(val, dict):
                raise ConfigError(f"{key}: expected an object")
            sections[key] = val
        output_dir = d.pop("output_dir", "out")
        if not isinstance(output_dir, str):
            raise ConfigError("output_dir: expected a string")
        return cls(command=command, params=params, alpha_hom=alpha_hom, output_dir=output_dir,
                   seed=seed, extra=d, **sections)

    def to_dict(self) -> dict:
        d = {"command": self.command, "output_dir": self.output_dir, "seed": self.seed}
        if self.params is not None:
            d["params"] = self.params.to_dict()
        if self.alpha_hom is not None:
            d["alpha_hom"] = self.alpha_hom
        for key in ("solver", "measure", "sweep", "validate", "barenblatt"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        d.update(self.extra)
        return d


def _need_params(cfg: ExperimentConfig) -> ex.ProblemParams:
    if cfg.params is None:
        raise ConfigError("params: required for this command")
    return cfg.params


def _num(section: dict, key: str, default=None, name: str = ""):
    val = section.get(key, default)
    if val is None:
        raise ConfigError(f"{name}{key}: missing")
    if isinstance(val, str):
        try:
            return ex._decode_inf(val)
        except ValueError:
            raise ConfigError(f"{name}{key}: expected a number, got {val!r}") from None
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{name}{key}: expected a number, got {val!r}")
    return float(val)


# -- commands ---------------------------------------------------------------

def cmd_exponents(cfg: ExperimentConfig, out: Path) -> int:
    params = _need_params(cfg)
    try:
        rep = ex.alpha_sharp(params, cfg.alpha_hom)
    except ex.NonPositiveExponent as e:
        raise ConfigError(f"params: {e}") from None
    doc = rep.to_dict()
    doc["p_m"] = ex.p_m(params)
    if params.m > 1:
        reg = ex.improved_region_member(params.m, params.p, rep.alpha_hom)
        doc["improved_region"] = {"member": reg.member, "item3_sufficient": reg.item3_sufficient,
                                  "item4_window": reg.item4_window}
    io.write_json(out / "exponents.json", doc, "exponents")
    logger.info("exponents: alpha=%.6g theta=%.6g", rep.alpha, rep.theta)
    return 0


def _axis(section: dict, key: str, default):
    lo, hi = section.get(key, default)
    step = float(section.get("step", 0.1))
    if step <= 0:
        raise ConfigError("sweep.step: must be positive")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(k + 1)]


def _sweep_row(m, p, n, q, r, alpha_hom):
    a_hom = alpha_hom if alpha_hom is not None else ex.alpha_hom_default(m, p)
    ms = ex.m_sharp(m, p, a_hom)
    try:
        src = ex.source_exponent(ex.ProblemParams(m, p, n, q, r))
        alpha = min(ms, src)
        theta = ex.theta(alpha, m, p)
    except ex.NonPositiveExponent:
        src = alpha = theta = None
    if m > 1:
        reg = ex.improved_region_member(m, p, a_hom)
        member, i3, i4 = reg.member, reg.item3_sufficient, reg.item4_window
    else:
        member = i3 = i4 = None
    return [m, p, a_hom, ms, src, alpha, theta, member, i3, i4]


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    sec = cfg.sweep or {}
    base = cfg.params or ex.ProblemParams(1.0, 2.0)
    ms = _axis(sec, "m", (1.0, 4.0))
    ps = _axis(sec, "p", (2.0, 4.0))
    if ms[0] < 1 or ps[0] < 2:
        raise ConfigError("sweep.m/p: ranges must satisfy m >= 1 and p >= 2")
    rows = [_sweep_row(m, p, base.n, base.q, base.r, cfg.alpha_hom) for m in ms for p in ps]
    header = ["m", "p", "alpha_hom", "m_sharp", "source_exponent", "alpha", "theta",
              "member", "item3_sufficient", "item4_window"]
    io.write_rows(out / "sweep.csv", header, rows)
    logger.info("sweep: %d grid points", len(rows))
    return 0


def _bc(sec: dict, m: float, p: float, u_star=None):
    bc = sec.get("bc", {"kind": "zero_flux"})
    kind = bc.get("kind", "zero_flux") if isinstance(bc, dict) else bc
    if kind == "zero_flux":
        return sv.ZeroFlux()
    if kind == "dirichlet":
        if u_star is not None and bc.get("from_exact", False):
            x0, x1 = sec["x_min"], sec["x_max"]
            return sv.Dirichlet(lambda t: float(u_star(np.array(x0), t)),
                                lambda t: float(u_star(np.array(x1), t)))
        return sv.Dirichlet(float(bc.get("left", 0.0)), float(bc.get("right", 0.0)))
    raise ConfigError(f"solver.bc.kind: unknown {kind!r}")


def _initial(sec: dict, grid: sv.Grid1D, m: float, p: float, u_star=None):
    init = sec.get("initial", {"kind": "sin"})
    kind = init.get("kind", "sin")
    x = grid.centers
    if kind == "sin":
        return np.sin(np.pi * x)
    if kind == "constant":
        return np.full(grid.n_cells, float(init.get("value", 1.0)))
    if kind == "bump":
        c, w = float(init.get("center", 0.0)), float(init.get("width", 0.5))
        return np.clip(1 - ((x - c) / w) ** 2, 0.0, None)
    if kind == "barenblatt":
        try:
            bp = bb.barenblatt_params(m, p, 1)
        except bb.DegenerateFamily as e:
            raise ConfigError(f"solver.initial: {e}") from None
        return bb.evaluate(bp, x, float(init.get("t0", 1.0)), radial=True)
    if kind == "mms":
        if u_star is None:
            raise ConfigError("solver.initial: mms initial data needs an mms source")
        return u_star(x, 0.0)
    if kind == "table":
        vals = np.asarray(init.get("values"), dtype=float)
        if vals.shape != (grid.n_cells,):
            raise ConfigError("solver.initial.values: length must equal n_cells")
        return vals
    raise ConfigError(f"solver.initial.kind: unknown {kind!r}")


def _source(sec: dict, m: float, p: float):
    src = sec.get("source", "zero")
    if src in (None, "zero"):
        return None, None
    if isinstance(src, str) and src.startswith("mms:"):
        name = src[4:]
        if name not in sv.MANUFACTURED:
            raise ConfigError(f"solver.source: unknown manufactured solution {name!r}")
        us = sv.MANUFACTURED[name]
        return sv.mms_forcing(us, m, p), us
    if isinstance(src, dict) and src.get("kind") == "table":
        xs = np.asarray(src["x"], dtype=float)
        vals = np.asarray(src["values"], dtype=float)
        return (lambda x, t: np.interp(x, xs, vals)), None
    raise ConfigError(f"solver.source: unknown selector {src!r}")


def build_solve(cfg: ExperimentConfig):
    params = _need_params(cfg)
    sec = cfg.solver
    if sec is None:
        raise ConfigError("solver: required for this command")
    m, p = params.m, params.p
    try:
        grid = sv.Grid1D(_num(sec, "x_min", 0.0, "solver."), _num(sec, "x_max", 1.0, "solver."),
                         int(sec.get("n_cells", 128)))
    except ValueError as e:
        raise ConfigError(f"solver: {e}") from None
    sec = dict(sec, x_min=grid.x_min, x_max=grid.x_max)
    f, us = _source(sec, m, p)
    try:
        scfg = sv.SolverConfig(
            t_end=_num(sec, "t_end", 0.1, "solver."),
            eps_u=_num(sec, "eps_u", 1e-8, "solver."),
            eps_g=_num(sec, "eps_g", 1e-8, "solver."),
            cfl=_num(sec, "cfl", 0.4, "solver."),
            dt_max=sec.get("dt_max"),
            bc=_bc(sec, m, p, us),
            output_every=sec.get("output_every"),
        )
    except ValueError as e:
        raise ConfigError(f"solver: {e}") from None
    u0 = _initial(sec, grid, m, p, us)
    return u0, grid, m, p, f, scfg


def cmd_solve(cfg: ExperimentConfig, out: Path) -> int:
    u0, grid, m, p, f, scfg = build_solve(cfg)
    fld = sv.solve(u0, grid, m, p, f, scfg)
    io.write_field_csv(out / "field.csv", fld)
    io.write_field_bin(out / "field.bin", fld)
    io.write_json(out / "run_log.json", {
        "m": m, "p": p, "grid": grid.to_dict(), "t_end": scfg.t_end,
        "n_rows": int(fld.times.size), "n_steps": fld.meta["n_steps"],
        "max_abs": fld.meta["max_abs"]}, "solve")
    logger.info("solve: %d steps, max|u|=%.6g", fld.meta["n_steps"], fld.meta["max_abs"])
    return 0


def _synthetic_field(syn: dict, m: float, p: float) -> sv.SpaceTimeField:
    a = float(syn.get("alpha", 0.5))
    n = int(syn.get("n_cells", 512))
    dx = 2.0 / n
    grid = sv.Grid1D(-1 - dx / 2, 1 - dx / 2, n)
    times = np.concatenate([-np.logspace(0, -10, int(syn.get("n_times", 500))), [0.0]])
    th = ex.theta(a, m, p)
    vals = np.abs(grid.centers)[None, :] ** a + np.abs(times)[:, None] ** (a / th)
    return sv.SpaceTimeField(grid, times, vals)


def cmd_measure(cfg: ExperimentConfig, out: Path) -> int:
    params = _need_params(cfg)
    sec = cfg.measure or {}
    m, p = params.m, params.p
    if sec.get("field"):
        try:
            fld = io.read_field(sec["field"])
        except (OSError, ValueError) as e:
            raise ConfigError(f"measure.field: {e}") from None
    elif sec.get("synthetic") is not None:
        fld = _synthetic_field(sec["synthetic"], m, p)
    else:
        u0, grid, m, p, f, scfg = build_solve(cfg)
        fld = sv.solve(u0, grid, m, p, f, scfg)
    center = sec.get("center", [float(fld.x[fld.x.size // 2]), float(fld.times[-1])])
    if not (isinstance(center, list) and len(center) == 2):
        raise ConfigError("measure.center: expected [x0, t0]")
    lam = _num(sec, "lambda", 0.25, "measure.")
    rho0 = _num(sec, "rho0", 1.0, "measure.")
    try:
        fit = meter.fit_alpha_theta(fld, tuple(center), m, p, lam=lam, rho0=rho0)
    except (meter.EmptyCylinder, ValueError) as e:
        raise ConfigError(f"measure: {e}") from None
    doc = {"center": center, "lambda": lam, "rho0": rho0, **fit.to_dict(),
           "series": fit.series.to_rows() if fit.series else [],
           "truncated": bool(fit.series.truncated) if fit.series else False}
    io.write_json(out / "fit.json", doc, "measure")
    if fit.series is not None:
        io.write_series_csv(out / "series.csv", fit.series)
    logger.info("measure: alpha_emp=%.4g theta=%.4g converged=%s",
                fit.alpha_emp, fit.theta_used, fit.converged)
    return 0


def cmd_validate(cfg: ExperimentConfig, out: Path) -> int:
    params = cfg.params or ex.ProblemParams(2.0, 3.0, 2)
    sec = cfg.validate or {}
    ok = True
    m, p, n = params.m, params.p, params.n

    flux_cfg = dict(sec.get("flux", {"kind": "prototype"}))
    flux_cfg.setdefault("m", m)
    flux_cfg.setdefault("p", p)
    try:
        flux = st.flux_from_config(flux_cfg)
    except (KeyError, ValueError) as e:
        raise ConfigError(f"validate.flux: {e}") from None
    rep = st.validate_structure(flux, st.SampleSpec(n_dim=n, seed=cfg.seed))
    io.write_json(out / "structure.json", rep.to_dict(), "structure")
    ok &= rep.passed

    if m + p > 3:
        bp = bb.barenblatt_params(m, p, n)
        x, t = bb.sample_points(bp, int(sec.get("n_samples", 100)), seed=cfg.seed)
        errs = {str(s): bb.self_similarity_check(bp, x, t, s) for s in (0.5, 2.0, 10.0)}
        passed = all(e <= 1e-12 for e in errs.values())
        io.write_json(out / "self_similarity.json",
                      {"lambda0": bp.lambda0, "b": bp.b, "max_abs_error": errs,
                       "passed": passed}, "self_similarity")
        ok &= passed

    conv = {}
    for case in sec.get("cases", ["heat", "mms"]):
        spec = {"kind": case}
        if case == "mms":
            spec.update(m=m, p=p)
        res = sv.convergence_study(spec, sec.get("refinements", [32, 64, 128]))
        conv[case] = res.to_dict()
        ok &= min(res.order_linf) >= float(sec.get("min_order", 0.8))
    io.write_json(out / "convergence.json", conv, "convergence")
    logger.info("validate: %s", "pass" if ok else "FAIL")
    return 0 if ok else 1


def cmd_barenblatt(cfg: ExperimentConfig, out: Path) -> int:
    params = _need_params(cfg)
    sec = cfg.barenblatt or {}
    try:
        bp = bb.barenblatt_params(params.m, params.p, params.n)
    except bb.DegenerateFamily as e:
        raise ConfigError(f"params: {e}") from None
    xs = np.linspace(*sec.get("x", [0.0, 3.0]), int(sec.get("n_x", 61)))
    ts = sec.get("t", [0.5, 1.0, 2.0])
    rows = [(float(x), float(t), float(bb.evaluate(bp, x, t, radial=True)))
            for t in ts for x in xs]
    io.write_rows(out / "barenblatt.csv", ["x", "t", "value"], rows)
    return 0


HANDLERS = {
    "exponents": cmd_exponents,
    "sweep": cmd_sweep,
    "solve": cmd_solve,
    "measure": cmd_measure,
    "validate": cmd_validate,
    "barenblatt": cmd_barenblatt,
}


def run(cfg: ExperimentConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    # the echo omits output_dir so runs into different directories compare equal
    echo = {k: v for k, v in cfg.to_dict().items() if k != "output_dir"}
    io.write_json(out / "config.json", echo, "config")
    return HANDLERS[cfg.command](cfg, out)


def load_config(path: str | None, verb: str, out: str | None, seed: int | None) -> ExperimentConfig:
    doc = {}
    if path:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"config: cannot read {path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config: malformed JSON ({e})") from None
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be a JSON object")
        doc.pop("schema_version", None)
        doc.pop("kind", None)
    doc["command"] = verb
    if out is not None:
        doc["output_dir"] = out
    if seed is not None:
        doc["seed"] = seed
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ddholder", description=__doc__.splitlines()[0])
    ap.add_argument("verb", choices=COMMANDS)
    ap.add_argument("--config", help="JSON experiment file")
    ap.add_argument("--out", help="output directory (overrides output_dir)")
    ap.add_argument("--seed", type=int, help="sampling seed (overrides seed)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.verb, args.out, args.seed)
        return run(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
