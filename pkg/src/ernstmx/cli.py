"""Command line driver: grid sweeps over D_delta, exact-family export, boundary checks.

    ernstmx solve|verify|exact|boundary-check --config run.json [--out DIR]
"""
from __future__ import annotations

import argparse
import csv
import functools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import exact, reconstruct, rh, verify
from .boundary import load_profile
from .errors import ErnstMaxwellError, ValidationError

log = logging.getLogger("ernstmx")

FIELDS_HEADER = ["x", "y", "reE", "imE", "reH", "imH", "f", "chi", "cond", "method",
                 "defect_det", "defect_sym"]
MODES = ("solve", "verify", "exact", "boundary-check")
INVARIANT_TOL = 1e-8


@dataclass
class RunConfig:
    boundary: dict
    delta: float = 0.1
    grid: dict = field(default_factory=lambda: {"nx": 21, "ny": 21})
    contour: dict = field(default_factory=lambda: {"N": 64, "gamma": 1.5})
    tolerances: dict = field(default_factory=lambda: {"volterra": 1e-10, "rh": 1e-10})
    outputs: dict = field(default_factory=lambda: {"dir": "out"})
    mode: str = "solve"
    method: str = "auto"
    exact: dict | None = None
    checks: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValidationError([f"unknown config keys: {sorted(unknown)}"])
        cfg = cls(**{k: v for k, v in d.items()}, )
        if "base_dir" not in d:
            cfg.base_dir = str(base_dir)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ValidationError([f"cannot read config {path}: {exc}"]) from exc
        return cls.from_dict(d, base_dir=path.parent)

    def validate(self) -> None:
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode {self.mode!r} not one of {MODES}")
        if not (0.0 < self.delta < 1.0):
            problems.append(f"delta = {self.delta} not in (0, 1)")
        if int(self.grid.get("nx", 0)) < 2 or int(self.grid.get("ny", 0)) < 2:
            problems.append("grid needs nx, ny >= 2")
        for k, v in self.tolerances.items():
            if not float(v) > 0.0:
                problems.append(f"tolerance {k} = {v} must be positive")
        if not {"x", "y"} <= set(self.boundary):
            problems.append("boundary needs descriptors for 'x' and 'y'")
        if self.method not in ("auto", "direct", "neumann"):
            problems.append(f"method {self.method!r} unknown")
        if problems:
            raise ValidationError(problems)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    # derived settings
    def profiles(self):
        return (load_profile(self.boundary["x"], "x", self.base_dir),
                load_profile(self.boundary["y"], "y", self.base_dir))

    def solve_kwargs(self) -> dict:
        c = self.contour
        return {"N": int(c.get("N", 64)), "gamma": float(c.get("gamma", 1.5)),
                "spacing": c.get("spacing", "hyperbolic"),
                "adaptive": bool(c.get("adaptive", True)),
                "n_max": int(c.get("n_max", rh.N_MAX)),
                "tol": float(self.tolerances.get("volterra", 1e-10)),
                "resolution_tol": float(self.tolerances.get("rh", 1e-10)),
                "method": self.method}

    def grid_points(self):
        """Grid nodes of [0, 1 - delta]^2 with x + y < 1 - delta, row-major in x."""
        xs = np.linspace(0.0, 1.0 - self.delta, int(self.grid["nx"]))
        ys = np.linspace(0.0, 1.0 - self.delta, int(self.grid["ny"]))
        lim = 1.0 - self.delta - 1e-12
        pts = [(i, j, float(x), float(y)) for i, x in enumerate(xs) for j, y in enumerate(ys)
               if x + y < lim]
        return xs, ys, pts


# ------------------------------------------------------------------ per-point pipeline

def solve_one(profiles, x: float, y: float, solve_kw: dict) -> dict:
    """buildContour -> assembleJump -> solve -> recover, with invariant defects."""
    sol = rh.solve_point(profiles[0], profiles[1], x, y, **solve_kw)
    ps = reconstruct.recover(sol.m_at_zero, (x, y))
    d = rh.invariant_defects(sol.m_at_zero)
    sym = max(v for k, v in d.items() if k != "det")
    row = {"x": x, "y": y, "E": ps.E, "H": ps.H, "f": ps.f, "chi": ps.chi,
           "cond": sol.conditioning, "method": sol.method, "defect_det": d["det"],
           "defect_sym": sym, "N": sol.contour.nodes_per_circle, "tail": sol.resolution,
           "branch": ps.branch, "f_check": float(ps.E.real - abs(ps.H) ** 2)}
    if d["det"] > INVARIANT_TOL or sym > INVARIANT_TOL or ps.f <= 0.0:
        row["error"] = f"invariant defect det={d['det']:.2e} sym={sym:.2e}"
    return row


_WORKER = {}


def _init_worker(cfg_dict):
    cfg = RunConfig.from_dict(cfg_dict)
    _WORKER["profiles"] = cfg.profiles()
    _WORKER["kw"] = cfg.solve_kwargs()


def _point_task(xy):
    x, y = xy
    try:
        return solve_one(_WORKER["profiles"], x, y, _WORKER["kw"])
    except ErnstMaxwellError as exc:
        return {"x": x, "y": y, "error": f"{type(exc).__name__}: {exc}"}


def worker_count() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get("ERNSTMX_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring non-integer ERNSTMX_THREADS=%r", cap)
    return n


def _run_points(cfg: RunConfig, coords):
    """Solve all points; results come back in input order whatever the worker count."""
    cfg_dict = cfg.as_dict()
    workers = worker_count()
    if workers <= 1 or len(coords) < 2:
        _init_worker(cfg_dict)
        return [_point_task(c) for c in coords]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(cfg_dict,)) as pool:
        return list(pool.map(_point_task, coords, chunksize=max(1, len(coords) // (4 * workers))))


def _field_grid(xs, ys, pts, rows) -> verify.FieldGrid:
    E = np.full((len(xs), len(ys)), np.nan, complex)
    H = np.full((len(xs), len(ys)), np.nan, complex)
    for (i, j, _, _), r in zip(pts, rows):
        if "error" not in r:
            E[i, j], H[i, j] = r["E"], r["H"]
    return verify.FieldGrid(xs, ys, E, H)


def _residual_summary(grid: verify.FieldGrid, report: verify.ResidualReport) -> None:
    try:
        r1, r2 = verify.pde_residual(grid)
    except ErnstMaxwellError as exc:
        report.pde_residual1 = report.pde_residual2 = {"skipped": str(exc)}
        return
    report.pde_residual1 = verify.summarize(r1)
    report.pde_residual2 = verify.summarize(r2)


def run_solve(cfg: RunConfig):
    """Sweep the grid; returns (rows, FieldGrid, ResidualReport)."""
    xs, ys, pts = cfg.grid_points()
    rows = _run_points(cfg, [(x, y) for _, _, x, y in pts])
    grid = _field_grid(xs, ys, pts, rows)
    report = verify.ResidualReport(grid={"nx": len(xs), "ny": len(ys), "delta": cfg.delta,
                                         "points": len(pts), "contour": cfg.contour})
    _residual_summary(grid, report)
    report.failures = [{"x": r["x"], "y": r["y"], "error": r["error"]} for r in rows if "error" in r]
    ok = [r for r in rows if "error" not in r]
    if ok:
        report.invariants = {
            "max_defect_det": max(r["defect_det"] for r in ok),
            "max_defect_sym": max(r["defect_sym"] for r in ok),
            "max_N": max(r["N"] for r in ok),
            "max_cond": max(r["cond"] for r in ok),
            "methods": sorted({r["method"] for r in ok}),
        }
    return rows, grid, report


def compare_with_family(rows, params: exact.FamilyParams) -> dict:
    errE, errH = 0.0, 0.0
    for r in rows:
        if "error" in r:
            continue
        E, H, _ = exact.potentials(params, r["x"], r["y"])
        errE = max(errE, abs(r["E"] - complex(E)))
        errH = max(errH, abs(r["H"] - complex(H)))
    return {"max_err_E": errE, "max_err_H": errH}


def run_verify(cfg: RunConfig):
    rows, grid, report = run_solve(cfg)
    seed = int(cfg.checks.get("seed", 0))
    n_z = int(cfg.checks.get("inversion_points", 5))
    profiles = cfg.profiles()
    kw = cfg.solve_kwargs()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for r in rows:
        if "error" in r:
            continue
        sol = rh.solve_point(profiles[0], profiles[1], r["x"], r["y"], **kw)
        zs = random_outer_points(sol.contour, rng, n_z)
        worst = max(worst, rh.inversion_defect(sol, zs))
    report.invariants["max_inversion_defect"] = worst
    if cfg.exact:
        report.invariants.update(compare_with_family(
            rows, exact.FamilyParams(float(cfg.exact["p"]), float(cfg.exact["q"]))))
    try:
        report.zero_curvature = verify.zero_curvature(grid, complex(cfg.checks.get("k", 2.0)))
    except ErnstMaxwellError as exc:
        report.zero_curvature = None
        log.info("zero-curvature check skipped: %s", exc)
    return rows, grid, report


def random_outer_points(contour, rng, n: int, radius: float = 3.0):
    """n points off both circles and their images under z -> 1/z."""
    out = []
    while len(out) < n:
        z = complex(*(rng.uniform(-radius, radius, 2)))
        ok = True
        for zz in (z, 1.0 / z if z != 0 else None):
            if zz is None:
                ok = False
                continue
            for c in contour.circles:
                if abs(abs(zz - c.center) - c.radius) < 0.05 * c.radius:
                    ok = False
        if ok:
            out.append(z)
    return np.array(out)


def run_exact(cfg: RunConfig):
    if not cfg.exact:
        raise ValidationError(["mode 'exact' needs an 'exact': {p, q} entry"])
    params = exact.FamilyParams(float(cfg.exact["p"]), float(cfg.exact["q"]))
    xs, ys, pts = cfg.grid_points()
    rows = []
    for _, _, x, y in pts:
        E, H, f = exact.potentials(params, x, y)
        mh = reconstruct.forward(complex(E), complex(H))
        d = rh.invariant_defects(mh)
        rows.append({"x": x, "y": y, "E": complex(E), "H": complex(H), "f": float(f),
                     "chi": (1.0 - x - y) / float(f), "cond": 1.0, "method": "exact",
                     "defect_det": d["det"], "defect_sym": max(v for k, v in d.items() if k != "det")})
    grid = _field_grid(xs, ys, pts, rows)
    report = verify.ResidualReport(grid={"nx": len(xs), "ny": len(ys), "delta": cfg.delta,
                                         "points": len(pts), "source": "exact"})
    _residual_summary(grid, report)
    m1, n1, m2, n2, _ = exact.boundary_constants(params)
    ok, v1, v2 = verify.admissibility(m1, n1, m2, n2)
    report.admissible, report.admissibility_values = ok, (v1, v2)
    return rows, grid, report


def make_evaluator(profiles, solve_kw):
    @functools.lru_cache(maxsize=None)
    def evaluate(x, y):
        sol = rh.solve_point(profiles[0], profiles[1], float(x), float(y), **solve_kw)
        ps = reconstruct.recover(sol.m_at_zero, (x, y))
        return ps.E, ps.H
    return evaluate


def run_boundary_check(cfg: RunConfig, evaluator=None):
    """Edge-limit identities, wave functionals and admissibility at sampled positions."""
    profiles = cfg.profiles()
    evaluator = evaluator or make_evaluator(profiles, cfg.solve_kwargs())
    ts = [float(t) for t in cfg.checks.get("t", [0.2, 0.36, 0.5])]
    axes = cfg.checks.get("axes", ["x", "y"])
    pts = verify.approach_points(float(cfg.checks.get("s0", 0.05)),
                                 int(cfg.checks.get("levels", 8)))
    report = verify.ResidualReport(grid={"t": ts, "axes": axes, "approach": list(pts)})
    table = []
    functionals = {"x": [], "y": []}
    for axis in axes:
        prof_n = profiles[0] if axis == "x" else profiles[1]
        for t in ts:
            entry = {"axis": axis, "t": t}
            try:
                th = verify.edge_limit_check(profiles, evaluator, t, axis, pts)
                entry.update({"defect_E": th["defect_E"], "defect_H": th["defect_H"],
                              "band_E": th["band_E"], "band_H": th["band_H"],
                              "limit_H": th["limit_H"].value, "rhs_H": th["rhs_H"]})
                if abs(prof_n.alpha - 0.5) < 1e-12:
                    fe = verify.boundary_functional(evaluator, profiles, t, axis, pts)
                    entry["functional"] = fe.value.real
                    entry["functional_band"] = fe.uncertainty
                    functionals[axis].append(fe)
            except ErnstMaxwellError as exc:
                entry["error"] = f"{type(exc).__name__}: {exc}"
                report.failures.append(entry)
            table.append(entry)
    report.edge_limit_defects = {"table": table}
    for axis, attr in (("x", "functional_x"), ("y", "functional_y")):
        ests = functionals[axis]
        if ests:
            vals = np.array([e.value.real for e in ests])
            band = max(e.uncertainty for e in ests)
            setattr(report, attr, verify.Estimate(float(vals.mean()), max(band, float(np.ptp(vals)))))
    m1, n1 = verify.data_constants(profiles[0])
    m2, n2 = verify.data_constants(profiles[1])
    ok, v1, v2 = verify.admissibility(m1, n1, m2, n2)
    report.admissible, report.admissibility_values = ok, (v1, v2)
    return report


# ------------------------------------------------------------------ output

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def write_fields(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELDS_HEADER)
        for r in rows:
            if "error" in r:
                # failed points are flagged in the method column, never filled in
                name = r["error"].split(":", 1)[0]
                w.writerow([_fmt(r["x"]), _fmt(r["y"])] + ["nan"] * 7 + [f"failed:{name}", "nan", "nan"])
                continue
            E, H = complex(r["E"]), complex(r["H"])
            w.writerow([_fmt(v) for v in (r["x"], r["y"], E.real, E.imag, H.real, H.imag,
                                          r["f"], r["chi"], r["cond"])]
                       + [r["method"], _fmt(r["defect_det"]), _fmt(r["defect_sym"])])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ernstmx", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")
    ap.add_argument("--nutku-halil", action="store_true",
                    help="exact mode: also write (1+H)/(1-H) to nutku_halil.csv")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config)
    except ValidationError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2
    cfg.mode = args.mode
    out = Path(args.out or cfg.outputs.get("dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.mode == "boundary-check":
            report = run_boundary_check(cfg)
            rows = None
        else:
            runner = {"solve": run_solve, "verify": run_verify, "exact": run_exact}[args.mode]
            rows, _, report = runner(cfg)
    except ValidationError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return 2
    except ErnstMaxwellError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if rows is not None:
        write_fields(out / cfg.outputs.get("fields", "fields.csv"), rows)
    if args.nutku_halil and args.mode == "exact":
        params = exact.FamilyParams(float(cfg.exact["p"]), float(cfg.exact["q"]))
        with open(out / "nutku_halil.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "reEps", "imEps"])
            for r in rows:
                v = complex(exact.nutku_halil(params, r["x"], r["y"]))
                w.writerow([_fmt(r["x"]), _fmt(r["y"]), _fmt(v.real), _fmt(v.imag)])
    report.to_json(out / cfg.outputs.get("report", "report.json"))
    n_fail = len(report.failures)
    if n_fail:
        print(f"{n_fail} point(s) failed; see report.json", file=sys.stderr)
    return 0 if n_fail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
