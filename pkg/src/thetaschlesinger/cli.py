"""Batch front end: ``thetaschlesinger <command> --job job.json --out dir/``.

Writes ``results.json`` (and ``samples.csv`` for grid jobs) once at the end.
Exit codes: 0 success, 1 input error, 2 an invariant exceeded its tolerance.
The number of worker processes for t-grids is read from
``THETASCHLESINGER_THREADS`` (default 1).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import painleve6 as p6
from . import verification as vf
from .curve import BranchConfiguration, abel_at_infinity, branch_abel_value, riemann_matrix
from .errors import ConfigurationError, ThetaSchlesingerError
from .monodromy import verify_monodromies
from .schlesinger import cylinder_condition_defect, dlog_tau, monodromy_data, solve, tau
from .theta import Characteristic, theta_full

COMMANDS = ("periods", "theta", "solve", "tau", "monodromy", "pvi", "verify")
THREADS_ENV = "THETASCHLESINGER_THREADS"
PVI_FORMS = ("y_theta", "y_alt", "y_from_tau", "picard", "okamoto", "hitchin")

Pair = tuple[float, float]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CharacteristicSpec(_Strict):
    p: list[float] = Field(min_length=1)
    q: list[float] = Field(min_length=1)


class Tolerances(_Strict):
    theta: float = 1e-14
    ode: float = 1e-10
    invariant: float = 1e-6
    pvi_residual: float = 1e-5


class PviOptions(_Strict):
    form: Literal[PVI_FORMS] = "y_theta"
    c1: float = 0.3
    c2: float = 0.2


class JobSpec(_Strict):
    command: Literal[COMMANDS]
    curve: list[Pair] | None = None
    genus: int | None = Field(default=None, ge=1, le=4)
    characteristic: CharacteristicSpec | None = None
    tolerances: Tolerances = Tolerances()
    grid: list[Pair] | None = None
    z: list[Pair] | None = None
    pvi: PviOptions = PviOptions()
    suites: list[Literal[vf.SUITES]] | None = None
    seed: int = 0

    @field_validator("curve")
    @classmethod
    def _even_points(cls, v):
        if v is not None and (len(v) < 4 or len(v) % 2):
            raise ValueError(f"need an even number >= 4 of branch points, got {len(v)}")
        return v


class InputError(Exception):
    pass


# --- serialization ------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int, bool, np.bool_)):
        return x if isinstance(x, bool) else int(x)
    return x


def write_results(out: Path, payload: dict):
    out.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=True)
    (out / "results.json").write_text(text + "\n")


def write_samples(out: Path, rows):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_re", "t_im", "y_re", "y_im", "residual"])
        for t, y, r in rows:
            w.writerow([f"{v:.17g}" for v in (t.real, t.imag, y.real, y.imag, r)])


# --- job helpers ------------------------------------------------------------

def _rng(job: JobSpec):
    return np.random.default_rng(job.seed)


def _curve(job: JobSpec) -> BranchConfiguration:
    if job.curve is not None:
        return BranchConfiguration([complex(a, b) for a, b in job.curve])
    return vf.random_configuration(job.genus or 1, _rng(job))


def _characteristic(job: JobSpec, g: int) -> Characteristic:
    if job.characteristic is None:
        rng = _rng(job)
        rng.random(16)  # decouple from the curve draw
        return vf.random_characteristic(g, rng)
    ch = Characteristic(job.characteristic.p, job.characteristic.q)
    if ch.genus != g:
        raise InputError(f"characteristic has length {ch.genus}, curve has genus {g}")
    return ch


def _ch_dict(ch: Characteristic) -> dict:
    return {"p": [c.real for c in ch.p], "q": [c.real for c in ch.q]}


def _provenance(job: JobSpec, cfg=None, ch=None) -> dict:
    out = {"job": job.model_dump(mode="json"), "seed": job.seed}
    if cfg is not None:
        out["branch_points"] = list(cfg.points)
    if ch is not None:
        out["characteristic"] = _ch_dict(ch)
    return out


# --- commands ---------------------------------------------------------------

def cmd_periods(job: JobSpec):
    cfg = _curve(job)
    per = riemann_matrix(cfg)
    uinf = abel_at_infinity(cfg, per)
    res = {
        "B": per.B, "A": per.A, "Bcal": per.Bcal,
        "branch": {"a_side": per.a_side, "a_side_meaning": "+1 left, -1 right boundary value on the cuts"},
        "errors": {"quadrature": per.quad_error, "symmetry_defect": per.symmetry_defect,
                   "abel_infinity": uinf.error},
        "abel_branch_points": [branch_abel_value(per, j) for j in range(1, len(cfg.points) + 1)],
        "abel_infinity": uinf.u,
        "_context": (cfg, None),
    }
    return res, [], 0 if per.symmetry_defect < job.tolerances.invariant else 2


def cmd_theta(job: JobSpec):
    cfg = _curve(job)
    per = riemann_matrix(cfg)
    ch = _characteristic(job, cfg.genus)
    zs = job.z or [(0.0, 0.0)]
    if len(zs) % cfg.genus:
        raise InputError(f"z must hold a multiple of g = {cfg.genus} coordinates")
    values = []
    for k in range(0, len(zs), cfg.genus):
        z = np.array([complex(a, b) for a, b in zs[k:k + cfg.genus]])
        r = theta_full(z, per.B, ch, tol=job.tolerances.theta, derivs=1)
        values.append({"z": z, "value": r.value, "grad": r.grad,
                       "error": r.truncation_error, "lattice_radius": r.radius_used})
    return {"B": per.B, "values": values, "errors": {"quadrature": per.quad_error},
            "_context": (cfg, ch)}, [], 0


def cmd_solve(job: JobSpec):
    cfg = _curve(job)
    ch = _characteristic(job, cfg.genus)
    sol = solve(cfg, ch)
    defects = sol.invariant_defects()
    res = {"A": sol.A, "H": sol.H, "B": sol.periods.B, "invariants": defects,
           "errors": {"quadrature": sol.periods.quad_error, **defects},
           "branch": {"gauge_subset": "last g-1 branch points"}, "_context": (cfg, ch)}
    bad = defects["sum_A"] > 1e-10 or defects["eigenvalues"] > 1e-9
    return res, [], 2 if bad else 0


def cmd_tau(job: JobSpec):
    cfg = _curve(job)
    ch = _characteristic(job, cfg.genus)
    info = tau(cfg, ch)
    sol = solve(cfg, ch)
    dl = [dlog_tau(cfg, ch, j) for j in range(1, len(cfg.points) + 1)]
    defect = max(abs(a - b) for a, b in zip(dl, sol.H))
    res = {"tau": info["tau"], "log_tau": info["log_tau"], "branch": info["branches"],
           "H": sol.H, "dlog_tau": dl, "errors": {"dlog_tau_vs_H": defect}, "_context": (cfg, ch)}
    return res, [], 0 if defect < job.tolerances.invariant else 2


def cmd_monodromy(job: JobSpec):
    cfg = _curve(job)
    ch = _characteristic(job, cfg.genus)
    sol = solve(cfg, ch)
    md = monodromy_data(cfg.genus, ch)
    rep = verify_monodromies(sol, md, tol=job.tolerances.ode)
    d = rep.as_dict()
    res = {"m": md.m, "M_predicted": md.M, "M_transported": rep.M_num, "report": d,
           "base": rep.base, "cylinder_defect": cylinder_condition_defect(md),
           "errors": {"ode_step": rep.step_error}, "_context": (cfg, ch)}
    tol = job.tolerances.invariant
    ok = max(rep.max_trace, rep.pair_trace_defect, rep.cyclic_defect, rep.eigenvalue_defect) < tol
    return res, [], 0 if ok else 2


def _pvi_sample(args):
    t, form, p, q, c1, c2 = args
    coeffs = p6.HALF_EXPONENTS
    if form == "y_theta":
        s = p6.y_theta(t, p, q)
    elif form == "y_alt":
        s = p6.y_alt(t, p, q)
    elif form == "y_from_tau":
        s = p6.y_from_tau(t, p, q)
    elif form == "picard":
        s, coeffs = p6.picard_solution(t, c1, c2), p6.PICARD_CASE
    elif form == "okamoto":
        s = p6.okamoto_picard_solution(t, c1, c2)
    else:
        s = p6.hitchin_solution(p6.sigma_from_t(t).sigma, c1, c2).sample
    if s.singular:
        return s.t, s.y, float("nan"), s.error, True
    return s.t, s.y, p6.pvi_residual(s, coeffs), s.error, False


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


def cmd_pvi(job: JobSpec):
    ts = [complex(a, b) for a, b in job.grid] if job.grid else vf.t_grid(50, _rng(job))
    for t in ts:
        p6.TParam(t)
    opt = job.pvi
    if opt.form in ("y_theta", "y_alt", "y_from_tau"):
        if job.characteristic is None:
            p, q = 0.31, 0.17
        else:
            if len(job.characteristic.p) != 1 or len(job.characteristic.q) != 1:
                raise InputError("the genus-one reduction needs scalar p and q")
            p, q = job.characteristic.p[0], job.characteristic.q[0]
        p6._check_pq(p, q)
    else:
        p = q = 0.0
    tasks = [(t, opt.form, p, q, opt.c1, opt.c2) for t in ts]
    n = _threads()
    if n > 1:
        with ProcessPoolExecutor(n) as ex:
            out = list(ex.map(_pvi_sample, tasks))
    else:
        out = [_pvi_sample(a) for a in tasks]
    rows = [(t, y, r) for t, y, r, _, _ in out]
    samples = [{"t": t, "y": y, "residual": r, "error": e, "singular": s} for t, y, r, e, s in out]
    finite = [r for _, _, r, _, s in out if not s]
    worst = max(finite) if finite else float("nan")
    res = {"form": opt.form, "p": p, "q": q, "samples": samples,
           "coefficients": (p6.PICARD_CASE if opt.form == "picard" else p6.HALF_EXPONENTS).as_tuple(),
           "max_residual": worst, "singular_samples": sum(s for *_, s in out),
           "errors": {"max_derivative_error": max((e for *_, e, s in out if not s), default=0.0)}}
    ok = bool(finite) and worst < job.tolerances.pvi_residual
    return res, rows, 0 if ok else 2


def cmd_verify(job: JobSpec):
    suites = job.suites or list(vf.SUITES)
    cfg = _curve(job)
    ch = _characteristic(job, cfg.genus)
    rng = _rng(job)
    report = {}
    for name in suites:
        if name == "periods":
            checks = vf.periods_suite(cfg)
        elif name == "abel":
            checks = vf.abel_suite(cfg)
        elif name == "theta":
            checks = vf.theta_suite(cfg, ch, rng)
        elif name == "schlesinger":
            checks = vf.schlesinger_suite(cfg, ch)
        elif name == "invariants":
            checks = vf.invariants_suite(cfg, ch)
        elif name == "tau":
            checks = vf.tau_suite(cfg, ch)
        elif name == "monodromy":
            checks = vf.monodromy_suite(cfg, ch)
        elif name == "pvi":
            ts = [complex(a, b) for a, b in job.grid] if job.grid else vf.t_grid(10, rng)
            checks = vf.pvi_suite(ts, 0.31, 0.17)
        else:
            checks = vf.reducible_suite(cfg)
        report[name] = [c.as_dict() for c in checks]
    ok = all(c["passed"] for cs in report.values() for c in cs)
    res = {"suites": report, "passed": ok,
           "errors": {"max_defect": max(c["defect"] for cs in report.values() for c in cs)},
           "_context": (cfg, ch)}
    return res, [], 0 if ok else 2


HANDLERS = {"periods": cmd_periods, "theta": cmd_theta, "solve": cmd_solve, "tau": cmd_tau,
            "monodromy": cmd_monodromy, "pvi": cmd_pvi, "verify": cmd_verify}


# --- entry point ------------------------------------------------------------

def load_job(path: Path, command: str | None = None) -> JobSpec:
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}")
    if not isinstance(raw, dict):
        raise InputError(f"{path}: the job must be a JSON object")
    if command is not None:
        if raw.setdefault("command", command) != command:
            raise InputError(f"job command {raw['command']!r} does not match {command!r}")
    try:
        return JobSpec.model_validate(raw)
    except ValidationError as exc:
        lines = [f"{'.'.join(map(str, e['loc'])) or '<job>'}: {e['msg']}" for e in exc.errors()]
        raise InputError(f"{path}: invalid job\n  " + "\n  ".join(lines))


def run(job: JobSpec, out: Path) -> int:
    try:
        res, rows, code = HANDLERS[job.command](job)
    except (InputError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ThetaSchlesingerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    res["command"] = job.command
    res["provenance"] = _provenance(job, *res.pop("_context", (None, None)))
    res["exit_code"] = code
    write_results(out, res)
    if rows:
        write_samples(out, rows)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="thetaschlesinger", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--job", required=True, type=Path, help="JSON job description")
    ap.add_argument("--out", required=True, type=Path, help="output directory")
    args = ap.parse_args(argv)
    try:
        _threads()
        job = load_job(args.job, args.command)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(job, args.out)


if __name__ == "__main__":
    sys.exit(main())
