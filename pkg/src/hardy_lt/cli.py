"""Batch front end: ``hardy-lt optimize | oracle | verify | sweep | spectrum``.

Settings come from defaults, then an optional ``--config`` file, then the
command line (later wins). The config file is plain text with one
``key = value`` per line; ``#`` starts a comment, blank lines are ignored
and keys may use ``-`` or ``_``. Recognized keys:

    d, s, N, c, grid, out, seed, max_iters, tol_obj, tol_res, workers,
    multistart, alpha0, run, potential, s_list, N_list, c_list

``c`` accepts a number or ``critical``; ``grid`` is ``tmin,tmax,n``; the
sweep lists are comma separated.

Exit codes: 0 ok, 1 internal or check failure, 2 non-convergence,
3 oracle bracket failure, 64 usage, 66 missing input.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import itertools
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__
from .core import (
    DegeneratePotentialError,
    ProblemParams,
    SupportEscapesGridError,
    objective,
    assemble_min_max_levels,
    potential_lt_norm,
    scale_potential,
)
from .diagnostics import decay_check, duality_check, flat_comparison, gap_check
from .grid import LogGrid, RadialPotential, build_grid
from .groundstate import (
    DEFAULT_GRID,
    BracketError,
    ShootingAmbiguityError,
    c1_from_ground_state,
    shoot_ground_state,
)
from .scf import (
    NoBoundStatesError,
    SCFConfig,
    SingularOccupationError,
    evaluate_candidate,
    hlt_quotient,
    scf_optimize,
)
from .spectral import (
    SpectralError,
    SpectrumCaps,
    dense_eigenvalues,
    discretize_channel,
    lowest_eigenpairs,
    negative_spectrum,
)

log = logging.getLogger("hardy_lt")

EXIT_OK, EXIT_ERROR, EXIT_NOCONV, EXIT_BRACKET, EXIT_USAGE, EXIT_NOINPUT = 0, 1, 2, 3, 64, 66
SUBCOMMANDS = ("optimize", "oracle", "verify", "sweep", "spectrum")
NORM_TOL = 1e-8
SCALING_TOL = 1e-8
DENSE_TOL = 1e-10
ORACLE_RES_TOL = 1e-8
LAMBDA1_TOL = 1e-6


class UsageError(Exception):
    pass


class MissingInputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    d: int = 3
    s: float = 1.0
    N: int = 1
    c: str = "critical"
    grid: tuple | None = None
    out: str = "run"
    seed: int = 0
    max_iters: int = 500
    tol_obj: float = 1e-10
    tol_res: float = 1e-6
    workers: int = 1
    multistart: int = 1
    alpha0: float = 0.5
    run: str | None = None
    potential: str | None = None
    s_list: tuple | None = None
    N_list: tuple | None = None
    c_list: tuple | None = None

    def params(self, **over) -> ProblemParams:
        kw = dict(d=self.d, s=self.s, N=self.N, c=self.c)
        kw.update(over)
        return ProblemParams(**kw)

    def scf_config(self) -> SCFConfig:
        grid = self.grid or SCFConfig().grid
        return SCFConfig(alpha0=self.alpha0, max_iters=self.max_iters, tol_obj=self.tol_obj,
                         tol_residual=self.tol_res, grid=tuple(grid), multistart=self.multistart,
                         seed=self.seed, workers=self.workers)

    def as_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out


# ---------------------------------------------------------------- parsing

def _parse_c(text):
    text = str(text).strip()
    if text.lower() == "critical":
        return "critical"
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"c must be a number or 'critical', got {text!r}") from None


def _parse_grid(text):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise UsageError(f"grid must be tmin,tmax,n, got {text!r}")
    try:
        tmin, tmax, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be tmin,tmax,n, got {text!r}") from None
    if not (tmin < tmax and n >= 16):
        raise UsageError("grid needs tmin < tmax and n >= 16")
    return (tmin, tmax, n)


def _parse_list(conv):
    def parse(text):
        items = [p.strip() for p in str(text).split(",") if p.strip()]
        if not items:
            raise UsageError("empty sweep list")
        return tuple(conv(p) for p in items)
    return parse


def _int(text):
    try:
        return int(str(text).strip())
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _float(text):
    try:
        return float(str(text).strip())
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


CONVERTERS = {
    "d": _int, "s": _float, "N": _int, "c": _parse_c, "grid": _parse_grid, "out": str,
    "seed": _int, "max_iters": _int, "tol_obj": _float, "tol_res": _float, "workers": _int,
    "multistart": _int, "alpha0": _float, "run": str, "potential": str,
    "s_list": _parse_list(_float), "N_list": _parse_list(_int), "c_list": _parse_list(_parse_c),
}


def _canonical_key(key: str) -> str:
    key = key.strip().replace("-", "_")
    if key not in CONVERTERS:
        raise UsageError(f"unknown config key {key!r}")
    return key


def read_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise MissingInputError(f"config file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            key = _canonical_key(key)
            out[key] = CONVERTERS[key](value.strip())
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hardy-lt", description="Finite-rank Hardy-Lieb-Thirring lower bounds")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--d", type=_int)
        p.add_argument("--s", type=_float)
        p.add_argument("--N", type=_int)
        p.add_argument("--c", type=_parse_c)
        p.add_argument("--grid", type=_parse_grid)
        p.add_argument("--out")
        p.add_argument("--seed", type=_int)
        p.add_argument("--max-iters", dest="max_iters", type=_int)
        p.add_argument("--tol-obj", dest="tol_obj", type=_float)
        p.add_argument("--tol-res", dest="tol_res", type=_float)
        p.add_argument("--workers", type=_int)
        p.add_argument("--multistart", type=_int)
        p.add_argument("--alpha0", type=_float)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            p.add_argument("--run", help="directory of a stored optimize run")
        if name == "spectrum":
            p.add_argument("--potential", help="potential.csv to analyse")
        if name == "sweep":
            p.add_argument("--s-list", dest="s_list", type=_parse_list(_float))
            p.add_argument("--N-list", dest="N_list", type=_parse_list(_int))
            p.add_argument("--c-list", dest="c_list", type=_parse_list(_parse_c))
    return parser


def resolve_config(argv) -> tuple[RunConfig, bool]:
    """Merge defaults, config file and flags, then validate."""
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError(f"a subcommand is required: {' | '.join(SUBCOMMANDS)}")
    values = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in CONVERTERS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(command=ns.command, **values)
    validate(cfg)
    return cfg, bool(getattr(ns, "verbose", False))


def validate(cfg: RunConfig):
    try:
        cfg.params()
        cfg.scf_config()
        if cfg.command == "sweep":
            for s in cfg.s_list or ():
                cfg.params(s=s)
            for N in cfg.N_list or ():
                cfg.params(N=N)
            for c in cfg.c_list or ():
                cfg.params(c=c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.workers < 1:
        raise UsageError("workers must be >= 1")
    if cfg.command == "sweep" and not (cfg.s_list or cfg.N_list or cfg.c_list):
        raise UsageError("empty sweep: give at least one of --s-list, --N-list, --c-list")
    if cfg.command == "spectrum" and not cfg.potential:
        raise UsageError("spectrum needs --potential FILE")


# ---------------------------------------------------------------- files

def _fmt(x) -> str:
    return format(float(x), ".17g")


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path, text):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default, allow_nan=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_potential(path, V: RadialPotential):
    g = V.grid
    _atomic_write(path, _csv(["t", "r", "V"], zip(g.t, g.r, V.values)))


def read_potential(path) -> RadialPotential:
    if not os.path.exists(path):
        raise MissingInputError(f"potential file not found: {path}")
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None or not {"t", "V"} <= set(data.dtype.names):
        raise UsageError(f"{path}: expected header t,r,V")
    t = np.atleast_1d(data["t"])
    grid = build_grid(float(t[0]), float(t[-1]), int(t.size))
    if not np.allclose(grid.t, t, rtol=0, atol=1e-9 * max(1.0, float(np.abs(t).max()))):
        raise UsageError(f"{path}: t column is not a uniform grid")
    return RadialPotential(grid, np.atleast_1d(data["V"]))


def levels_payload(levels):
    out = []
    for lam, tag in zip(levels.levels, levels.tags):
        out.append({
            "lambda": float(lam),
            "ell": None if tag is None else tag.ell,
            "index": None if tag is None else tag.index,
            "multiplicity_slot": None if tag is None else tag.slot,
        })
    return out


def write_manifest(out_dir, cfg: RunConfig, started, summary, files):
    inventory = {name: _sha256_file(os.path.join(out_dir, name)) for name in files}
    resolved = cfg.as_dict()
    manifest = {
        "tool": "hardy-lt",
        "version": __version__,
        "config": resolved,
        "config_sha256": hashlib.sha256(json.dumps(resolved, sort_keys=True).encode()).hexdigest(),
        "started": started,
        "finished": _now(),
        "summary": summary,
        "files": inventory,
    }
    _atomic_write(os.path.join(out_dir, "manifest.json"), _json(manifest))
    return manifest


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _prepare_out(path):
    os.makedirs(path, exist_ok=True)
    stale = os.path.join(path, "manifest.json")
    if os.path.exists(stale):
        os.unlink(stale)  # an interrupted rerun must not look valid


# ---------------------------------------------------------------- commands

def _run_summary(report):
    return {
        "C_hat": report.C_hat,
        "converged": report.converged,
        "status": report.status,
        "iterations": report.iterations,
        "residual": report.residual,
        "gap": report.gap,
        "levels": [float(x) for x in report.levels.levels],
        "negative_count": report.levels.M,
        "contamination": report.contamination,
        "flags": list(report.flags),
        "note": report.note,
    }


def write_run(out_dir, report):
    write_potential(os.path.join(out_dir, "potential.csv"), report.V)
    _atomic_write(os.path.join(out_dir, "levels.json"), _json(levels_payload(report.levels)))
    _atomic_write(os.path.join(out_dir, "trace.csv"),
                  _csv(["iteration", "objective", "residual", "alpha"],
                       [(it, float(S), float(r), float(a)) for it, S, r, a in report.trace]))
    return ["potential.csv", "levels.json", "trace.csv"]


def cmd_optimize(cfg: RunConfig) -> int:
    started = _now()
    _prepare_out(cfg.out)
    params = cfg.params()
    report = scf_optimize(params, cfg.scf_config())
    files = write_run(cfg.out, report)
    summary = _run_summary(report)
    summary["diagnostics"] = _quick_diagnostics(report)
    write_manifest(cfg.out, cfg, started, summary, files)
    print(f"C_hat = {_fmt(report.C_hat)}  converged={report.converged}  status={report.status}")
    return EXIT_OK if report.converged else EXIT_NOCONV


def _quick_diagnostics(report):
    out = {}
    g = gap_check(report)
    out["gap"] = g.passed
    try:
        out["decay"] = decay_check(report).passed
    except ValueError:
        out["decay"] = None
    out["duality"] = duality_check(report).passed
    return out


def cmd_oracle(cfg: RunConfig) -> int:
    started = _now()
    _prepare_out(cfg.out)
    params = cfg.params(N=1)
    grid = build_grid(*(cfg.grid or DEFAULT_GRID))
    try:
        gs = shoot_ground_state(params, grid, tol=ORACLE_RES_TOL)
    except BracketError as exc:
        print(f"bracket failure: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    rep = c1_from_ground_state(gs, params)
    g = gs.grid
    _atomic_write(os.path.join(cfg.out, "groundstate.csv"),
                  _csv(["t", "w", "Q", "V"], zip(g.t, gs.w_values, gs.Q, gs.V.values)))
    payload = {
        "C1": rep.C1, "C_HGN": rep.C_HGN, "lambda1_check": rep.lambda1_check,
        "decay_rate_fit": rep.decay_rate_fit, "K": rep.K, "a": gs.a,
        "ode_residual": gs.ode_residual, "int_Qm": gs.int_Qm, "int_Q2": gs.int_Q2,
    }
    _atomic_write(os.path.join(cfg.out, "ground_report.json"), _json(payload))
    ok = gs.ode_residual <= ORACLE_RES_TOL and abs(rep.lambda1_check + 1.0) <= LAMBDA1_TOL
    payload["passed"] = ok
    write_manifest(cfg.out, cfg, started, payload, ["groundstate.csv", "ground_report.json"])
    print(f"C1 = {_fmt(rep.C1)}  C_HGN = {_fmt(rep.C_HGN)}  lambda1_check = {_fmt(rep.lambda1_check)}")
    return EXIT_OK if ok else EXIT_ERROR


def _check(status, margin=None, **detail):
    out = {"status": status}
    if margin is not None:
        out["margin"] = margin
    out.update(detail)
    return out


def _hardy_positivity(grid: LogGrid, params: ProblemParams, max_ell=8):
    zero = RadialPotential(grid, np.zeros(grid.n))
    worst = math.inf
    for ell in range(max_ell + 1):
        spec = lowest_eigenpairs(discretize_channel(zero, ell, params), 1)
        if spec.eigenvalues.size:
            worst = min(worst, float(spec.eigenvalues[0]))
    ok = not worst < -1e-12
    return _check("pass" if ok else "fail", None if math.isinf(worst) else worst,
                  channels=max_ell + 1)


def _scaling(V, params, S, shift):
    """Quotient after shifting by ``-shift`` and ``+shift`` nodes; a side whose
    shift pushes support off the grid is skipped."""
    devs, used, skipped = [], [], []
    for k in (-shift, shift):
        try:
            devs.append(abs(hlt_quotient(scale_potential(V, k, params), params) - S))
            used.append(k)
        except SupportEscapesGridError as exc:
            skipped.append(str(exc))
    if not devs:
        return _check("skipped: support at grid edge", detail="; ".join(skipped))
    dev = max(devs)
    return _check("pass" if dev < SCALING_TOL else "fail", dev, shifts=used)


def _padding(V, params):
    S = [evaluate_candidate(V, params.replace(N=n))[0] for n in (params.N, params.N + 1)]
    return _check("pass" if S[1] >= S[0] - 1e-14 else "fail", S[1] - S[0])


def _dense_oracle(V, params, n=200, t_range=(-5.0, 4.0)):
    coarse = build_grid(t_range[0], t_range[1], n)
    W = RadialPotential(coarse, np.interp(coarse.t, V.grid.t, V.values))
    worst = 0.0
    for ell in range(3):
        op = discretize_channel(W, ell, params)
        spec = lowest_eigenpairs(op, 8)
        dense = dense_eigenvalues(op)
        ref = dense[dense < 0][: spec.eigenvalues.size]
        if ref.size != spec.eigenvalues.size:
            return _check("fail", None, detail=f"count mismatch in channel {ell}")
        if ref.size:
            worst = max(worst, float(np.max(np.abs(ref - spec.eigenvalues))))
    return _check("pass" if worst <= DENSE_TOL else "fail", worst)


def verify_run(params, V, report, cfg: RunConfig, converged: bool):
    checks = {}
    checks["converged"] = _check("pass" if converged else "fail")
    norm = potential_lt_norm(V, params)
    checks["normalization"] = _check("pass" if abs(norm - 1.0) <= NORM_TOL else "fail", norm - 1.0)
    checks["hardy_positivity"] = _hardy_positivity(V.grid, params)
    checks["scaling_invariance"] = _scaling(V, params, hlt_quotient(V, params), 20)
    checks["padding_monotonicity"] = _padding(V, params)
    checks["dense_oracle"] = _dense_oracle(V, params)
    g = gap_check(report)
    if g.flagged:
        checks["gap"] = _check("fail", g.margin, detail=g.message)
    else:
        checks["gap"] = _check("pass" if g.passed else "fail", g.margin, simple=g.simple,
                               applicable=g.applicable, detail=g.message)
    try:
        dec = decay_check(report)
        checks["decay"] = _check("pass" if dec.passed else "fail", dec.margin,
                                 fitted=dec.fitted_rate, theory=dec.theory_rate,
                                 window=list(dec.window))
    except ValueError as exc:
        checks["decay"] = _check("fail", detail=str(exc))
    dual = duality_check(report, params)
    if dual.passed is None:
        checks["duality"] = _check(dual.status, detail=dual.message)
    else:
        checks["duality"] = _check("pass" if dual.passed else "fail",
                                   None if dual.relative is None else dual.relative - 1.0,
                                   D_implied=dual.D_implied, rank1=dual.rank1_ratio)
    if params.c > 0:
        fc = flat_comparison(params, cfg.scf_config())
        if fc.passed is None:
            checks["flat_comparison"] = _check("skipped: not converged", fc.margin)
        else:
            checks["flat_comparison"] = _check("pass" if fc.passed else "fail", fc.margin,
                                               critical=fc.C_hat_critical, flat=fc.C_hat_flat)
    else:
        checks["flat_comparison"] = _check("skipped: c is already 0")
    return checks


class _StoredReport:
    """Minimal report view rebuilt from a stored run directory."""

    def __init__(self, params, V, summary):
        self.params = params
        self.V = V
        spectra = negative_spectrum(V, params, SpectrumCaps(max_levels=params.N + 1))
        self.levels = assemble_min_max_levels(spectra, params)
        self.objective = objective(self.levels, params.s)
        self.C_hat = self.objective
        self.converged = bool(summary.get("converged", False))
        self.partial_shell = "gap violation suspected" in summary.get("flags", [])
        lv = self.levels
        self.gap = (None if lv.next_level is None or lv.N_prime < lv.N
                    else float(lv.next_level - lv.levels[-1]))


def cmd_verify(cfg: RunConfig) -> int:
    started = _now()
    if cfg.run:
        manifest_path = os.path.join(cfg.run, "manifest.json")
        pot_path = os.path.join(cfg.run, "potential.csv")
        for path in (manifest_path, pot_path):
            if not os.path.exists(path):
                raise MissingInputError(f"missing artifact: {path}")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        stored = manifest.get("config", {})
        params = ProblemParams(d=stored.get("d", cfg.d), s=stored.get("s", cfg.s),
                               N=stored.get("N", cfg.N), c=stored.get("c", cfg.c))
        V = read_potential(pot_path)
        report = _StoredReport(params, V, manifest.get("summary", {}))
        out_dir = cfg.out if cfg.out != RunConfig.out else cfg.run
        cfg = replace(cfg, d=params.d, s=params.s, N=params.N, c=params.c,
                      grid=stored.get("grid") and tuple(stored["grid"]) or cfg.grid)
    else:
        params = cfg.params()
        report = scf_optimize(params, cfg.scf_config())
        V = report.V
        out_dir = cfg.out
    os.makedirs(out_dir, exist_ok=True)
    checks = verify_run(params, V, report, cfg, report.converged)
    failed = [k for k, v in checks.items() if v["status"] == "fail"]
    payload = {"params": {"d": params.d, "s": params.s, "N": params.N, "c": params.c},
               "C_hat": report.C_hat, "checks": checks, "failed": failed,
               "all_passed": not failed, "started": started, "finished": _now()}
    _atomic_write(os.path.join(out_dir, "verify_report.json"), _json(payload))
    for name, res in checks.items():
        print(f"{name:22s} {res['status']}")
    return EXIT_OK if not failed else EXIT_ERROR


def _failure_code(exc) -> str:
    if isinstance(exc, NoBoundStatesError):
        return "no_bound_states"
    if isinstance(exc, DegeneratePotentialError):
        return "degenerate_potential"
    if isinstance(exc, SingularOccupationError):
        return "singular_occupation"
    if isinstance(exc, SpectralError):
        return "spectral_error"
    return "error:" + type(exc).__name__


def _sweep_chain(cfg, base, Ns, cells_dir):
    """Cells sharing ``(s, c)``; ascending ``N`` warm starts from the last good optimizer."""
    rows = []
    warm = None
    for N in Ns:
        params = base.replace(N=N)
        label = f"s{_fmt(params.s)}_N{N}_c{_fmt(params.c)}"
        row = {"d": params.d, "s": params.s, "N": N, "c": params.c}
        try:
            report = scf_optimize(params, cfg.scf_config(), warm)
        except Exception as exc:  # recorded per cell, never fatal
            row.update(C_hat="", levels="", converged=False, status="failed",
                       residual="", failure_code=_failure_code(exc))
            rows.append(row)
            continue
        if report.status == "no bound states":
            row.update(C_hat="", levels="", converged=False, status=report.status,
                       residual="", failure_code="no_bound_states")
            rows.append(row)
            continue
        cell = os.path.join(cells_dir, label)
        os.makedirs(cell, exist_ok=True)
        write_run(cell, report)
        code = "" if report.converged else f"not_converged:{report.status}"
        row.update(C_hat=report.C_hat, levels=";".join(_fmt(x) for x in report.levels.levels),
                   converged=report.converged, status=report.status, residual=report.residual,
                   failure_code=code)
        rows.append(row)
        if report.converged:
            warm = report.V
    return rows


def cmd_sweep(cfg: RunConfig) -> int:
    started = _now()
    _prepare_out(cfg.out)
    s_values = cfg.s_list or (cfg.s,)
    c_values = cfg.c_list or (cfg.c,)
    N_values = tuple(sorted(set(cfg.N_list or (cfg.N,))))
    cells_dir = os.path.join(cfg.out, "cells")
    chains = [cfg.params(s=s, c=c, N=N_values[0]) for s, c in itertools.product(s_values, c_values)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(lambda b: _sweep_chain(cfg, b, N_values, cells_dir), chains))
    else:
        results = [_sweep_chain(cfg, b, N_values, cells_dir) for b in chains]
    rows = [r for chain in results for r in chain]
    header = ["d", "s", "N", "c", "C_hat", "levels", "converged", "status", "residual", "failure_code"]
    _atomic_write(os.path.join(cfg.out, "sweep.csv"),
                  _csv(header, [[r[k] for k in header] for r in rows]))
    ok = all(r["converged"] for r in rows)
    summary = {"cells": len(rows), "converged": sum(bool(r["converged"]) for r in rows),
               "C_hat": [r["C_hat"] if r["C_hat"] != "" else None for r in rows]}
    write_manifest(cfg.out, cfg, started, summary, ["sweep.csv"])
    print(f"{summary['converged']}/{summary['cells']} cells converged")
    return EXIT_OK if ok else EXIT_NOCONV


def cmd_spectrum(cfg: RunConfig) -> int:
    V = read_potential(cfg.potential)
    params = cfg.params()
    spectra = negative_spectrum(V, params, SpectrumCaps(max_levels=max(params.N, 8)))
    print("ell  index  multiplicity  lambda")
    for spec in spectra:
        for i, lam in enumerate(spec.eigenvalues):
            print(f"{spec.ell:3d}  {i:5d}  {spec.multiplicity:12d}  {_fmt(lam)}")
    if not spectra:
        print("no negative eigenvalues")
    return EXIT_OK


COMMANDS = {"optimize": cmd_optimize, "oracle": cmd_oracle, "verify": cmd_verify,
            "sweep": cmd_sweep, "spectrum": cmd_spectrum}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg, verbose = resolve_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingInputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NOINPUT
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[cfg.command](cfg)
    except MissingInputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NOINPUT
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BracketError as exc:
        print(f"bracket failure: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except ShootingAmbiguityError as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - top-level guard
        log.exception("internal error")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
