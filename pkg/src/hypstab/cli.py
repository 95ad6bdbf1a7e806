"""Batch runner: ``hypstab run <config.json> --out <dir>`` and ``hypstab builders``.

Exit codes: 0 all asserted checks pass, 1 an asserted check fails, 2 the
config does not parse or validate, 3 numerical failure.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import curvalg, tensorid
from .errors import (DomainError, InvalidInput, NumericalFailure, PreconditionViolation,
                     UnsupportedPrecision)
from .graphgeo.export import export_field_csv
from .graphgeo.geometry import covariant_da, geometry_arrays, s1_divform, shape_field
from .graphgeo.operators import eqn16_residual, reilly_residual
from .graphgeo.patches import builder_catalog, patch_from_descriptor
from .graphgeo.refinement import observed_orders, refinement_study
from .io import to_jsonable, write_csv, write_dat, write_json
from .stability.assembly import index_estimate
from .stability.cutoff import CutoffProfile
from .stability.growth import graph_growth_bound_check, growth_scan, lemma32_certificate

__all__ = ["main", "run", "Check", "RunReport", "COMMANDS", "THREADS_ENV"]

THREADS_ENV = "HYPSTAB_THREADS"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_MIN_ORDER = 1.9


class ConfigError(InvalidInput):
    pass


@dataclass
class Check:
    name: str
    status: str  # pass | fail | report-only | skipped
    values: dict = field(default_factory=dict)
    message: str = ""

    def to_json(self):
        return {"name": self.name, "status": self.status, "values": self.values,
                "message": self.message}


@dataclass
class RunReport:
    scenario: str
    command: str
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    wall_time: float = 0.0
    error: str = ""

    @property
    def failed(self):
        return [c for c in self.checks if c.status == "fail"]

    def to_json(self):
        return {"scenario": self.scenario, "command": self.command,
                "checks": [c.to_json() for c in self.checks],
                "artifacts": sorted(self.artifacts), "wall_time": self.wall_time,
                "error": self.error}


class Recorder:
    """Collects checks, applying per-scenario asserted/report-only overrides."""

    def __init__(self, report, cfg, out):
        self.report = report
        self.out = Path(out)
        self.report_only = set(_opt(cfg, "report_only", list, []))
        self.force_assert = set(_opt(cfg, "asserted", list, []))
        self._names = set()

    def _base(self, name):
        return name.split("[", 1)[0]

    def check(self, name, ok, values=None, asserted=True, message=""):
        if name in self._names:
            raise RuntimeError(f"duplicate check {name}")
        self._names.add(name)
        base = self._base(name)
        if base in self.report_only or name in self.report_only:
            asserted = False
        elif base in self.force_assert or name in self.force_assert:
            asserted = True
        status = ("pass" if ok else "fail") if asserted else "report-only"
        self.report.checks.append(Check(name, status, to_jsonable(values or {}), message))

    def skip(self, name, message, values=None):
        self._names.add(name)
        self.report.checks.append(Check(name, "skipped", to_jsonable(values or {}), message))

    def csv(self, fname, header, rows):
        write_csv(self.out / fname, header, rows)
        self.report.artifacts.append(fname)

    def dat(self, fname, xs, ys, comment=None):
        write_dat(self.out / fname, xs, ys, comment)
        self.report.artifacts.append(fname)


# ---- config helpers -------------------------------------------------------

def _req(cfg, key, typ):
    if key not in cfg:
        raise ConfigError(f"missing required field {key!r}")
    return _typed(cfg[key], key, typ)


def _opt(cfg, key, typ, default):
    return default if key not in cfg else _typed(cfg[key], key, typ)


def _typed(v, key, typ):
    if typ is float and isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if typ is int and isinstance(v, int) and not isinstance(v, bool):
        return v
    if typ in (list, dict, str) and isinstance(v, typ):
        return v
    raise ConfigError(f"field {key!r} must be {typ.__name__}, got {type(v).__name__}")


def _float_list(cfg, key, decreasing=False, min_len=1):
    vals = _req(cfg, key, list)
    if len(vals) < min_len or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                      for v in vals):
        raise ConfigError(f"{key!r} must be a list of at least {min_len} numbers")
    vals = [float(v) for v in vals]
    if decreasing and any(b >= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(f"{key!r} must be strictly decreasing, got {vals}")
    if any(v <= 0 for v in vals):
        raise ConfigError(f"{key!r} entries must be positive")
    return vals


def _patch(cfg):
    patch, _ = patch_from_descriptor(_req(cfg, "patch", dict))
    return patch


def _point(cfg, key, n):
    p = _req(cfg, key, list)
    if len(p) != n:
        raise ConfigError(f"{key!r} must have {n} coordinates")
    return np.array(p, dtype=float)


def _order_check(rec, name, study, min_order, extra=None):
    vals = study.to_json()
    if extra:
        vals.update(extra)
    rec.check(name, study.min_order >= min_order, vals,
              message=f"observed order {vals['min_order']} (need >= {min_order})")


def _refinement_rows(study):
    orders = (float("nan"),) + study.orders
    return [(h, r, o) for h, r, o in zip(study.hs, study.residuals, orders)]


# ---- scenarios --------------------------------------------------------------

def random_symmetric(rng, count, n):
    """Gaussian symmetric matrices with spectrum of order one (about [-2, 2])."""
    a = rng.standard_normal((count, n, n))
    return (a + np.swapaxes(a, 1, 2)) / np.sqrt(2.0 * n)


def _brute_elem_sym(lam):
    n = lam.shape[-1]
    S = np.zeros(lam.shape[:-1] + (n + 1,))
    scale = np.zeros_like(S)
    S[..., 0] = scale[..., 0] = 1.0
    for r in range(1, n + 1):
        for idx in combinations(range(n), r):
            p = np.prod(lam[..., list(idx)], axis=-1)
            S[..., r] += p
            scale[..., r] += np.abs(p)
    return S, scale


def _rejection_spectra(rng, count, n):
    out = []
    while sum(len(o) for o in out) < count:
        lam = rng.standard_normal((4 * count, n))
        S = curvalg.elem_sym_values(lam)
        out.append(lam[(S[:, 2] >= 0) & (S[:, 1] > 0)])
    return np.concatenate(out)[:count]


def scenario_identities(cfg, rec):
    seed = _req(cfg, "seed", int)
    samples = _req(cfg, "samples", int)
    n_min, n_max = _req(cfg, "n_min", int), _req(cfg, "n_max", int)
    mac_samples = _opt(cfg, "maclaurin_samples", int, samples)
    if not 2 <= n_min <= n_max <= 12 or samples < 1:
        raise ConfigError("need 2 <= n_min <= n_max <= 12 and samples >= 1")
    rng = np.random.default_rng(seed)
    rows = []
    worst = {"trace": 0.0, "elem_sym": 0.0, "ssy": 0.0, "ssy_min": np.inf, "p1": 0.0}
    mac_total, mac_viol = 0, 0
    for n in range(n_min, n_max + 1):
        As = random_symmetric(rng, samples, n)
        tr = float(curvalg.trace_identity_batch(As).max())
        lam = rng.standard_normal((samples, n))
        S = curvalg.elem_sym_values(lam)
        Sb, scale = _brute_elem_sym(lam)
        es = float(np.max(np.abs(S - Sb) / scale))
        p1 = 0.0
        for A in As:
            cv = curvalg.elem_sym(np.linalg.eigvalsh(A))
            s3 = cv.S[3] if n >= 3 else 0.0
            target = cv.S[1] * cv.S[2] - 3 * s3
            p1 = max(p1, abs(tensorid.p1_contraction(A) - target) / (1 + abs(target)))
        ssy, ssy_min = float("nan"), float("nan")
        if n <= 5:
            ssy, ssy_min = 0.0, np.inf
            for _ in range(samples):
                h = rng.standard_normal(n)
                while np.linalg.norm(h) < 0.1:
                    h = rng.standard_normal(n)
                C = tensorid.CubicSymTensor(rng.standard_normal((n, n, n)))
                left, right = tensorid.ssy_left(h, C), tensorid.ssy_right(h, C)
                ssy = max(ssy, abs(left - right) / max(float(np.sum(C.entries ** 2)), 1e-300))
                ssy_min = min(ssy_min, right)
            worst["ssy"] = max(worst["ssy"], ssy)
            worst["ssy_min"] = min(worst["ssy_min"], ssy_min)
        hyp, viol = 0, {}
        if n >= 3:
            hyp, viol = curvalg.maclaurin_batch(_rejection_spectra(rng, mac_samples, n))
            mac_total += hyp
            mac_viol += sum(viol.values())
        worst["trace"] = max(worst["trace"], tr)
        worst["elem_sym"] = max(worst["elem_sym"], es)
        worst["p1"] = max(worst["p1"], p1)
        rows.append((n, tr, es, ssy, ssy_min, p1, hyp, sum(viol.values())))
    rec.csv("identities.csv", ["n", "trace_max", "elem_sym_max", "ssy_max", "ssy_right_min",
                               "p1_contraction_max", "maclaurin_samples",
                               "maclaurin_violations"], rows)
    rec.check("trace_identities", worst["trace"] <= curvalg.IDENTITY_RTOL,
              {"max_residual": worst["trace"]})
    rec.check("elem_sym_bruteforce", worst["elem_sym"] <= 1e-12,
              {"max_relative_error": worst["elem_sym"]})
    rec.check("p1_contraction", worst["p1"] <= curvalg.IDENTITY_RTOL,
              {"max_residual": worst["p1"]})
    if n_min <= 5:
        rec.check("ssy_identity", worst["ssy"] <= 1e-10, {"max_relative_gap": worst["ssy"]})
        rec.check("ssy_nonnegative", worst["ssy_min"] >= -1e-12,
                  {"min_right": worst["ssy_min"]})
    if n_max >= 3:
        rec.check("maclaurin", mac_viol == 0,
                  {"samples": mac_total, "violations": mac_viol})


def scenario_audit(cfg, rec):
    spectra = _req(cfg, "spectra", list)
    rows = []
    for i, lam in enumerate(spectra):
        spec = curvalg.PrincipalSpectrum(lam)
        au = curvalg.estima_audit(spec)
        mc = curvalg.maclaurin_check(spec)
        orient = curvalg.orient_p1_psd(np.diag(spec.lam))
        vals = {"lambda": spec.lam, "max_eig_p1": au.max_eig_p1, "s1": au.s1,
                "min_eig_p1": au.min_eig_p1}
        if au.precondition_met:
            rec.check(f"estima_weak[{i}]", au.weak_holds, vals)
            rec.check(f"estima_strong[{i}]", au.strong_holds,
                      dict(vals, strong_holds=au.strong_holds), asserted=False)
        else:
            rec.skip(f"estima_weak[{i}]", "P1 not positive semidefinite", vals)
            rec.skip(f"estima_strong[{i}]", "P1 not positive semidefinite", vals)
        rec.check(f"maclaurin[{i}]", mc.all_hold,
                  {"hypotheses_met": mc.hypotheses_met, "holds": mc.holds,
                   "slack": mc.slack})
        sign = 0 if orient is None else orient[0]
        rows.append((i, spec.n, au.s1, au.max_eig_p1, au.min_eig_p1, au.precondition_met,
                     au.strong_holds, au.weak_holds, mc.hypotheses_met, mc.all_hold, sign))
    rec.csv("audit.csv", ["index", "n", "S1", "max_eig_P1", "min_eig_P1", "p1_psd",
                          "strong_holds", "weak_holds", "maclaurin_hypotheses",
                          "maclaurin_all_hold", "psd_orientation_sign"], rows)


def scenario_curvature(cfg, rec):
    patch = _patch(cfg)
    hs = _float_list(cfg, "grid_h", decreasing=True)
    min_order = _opt(cfg, "min_order", float, DEFAULT_MIN_ORDER)
    fieldc = shape_field(patch, hs[0])
    export_field_csv(fieldc, rec.out / "field.csv")
    rec.report.artifacts.append("field.csv")
    valid = fieldc["valid"]
    S, lam = fieldc["S"][valid], fieldc["lam"][valid]
    scale = 1.0 + np.max(np.abs(lam)) ** 2
    gauss = float(np.max(np.abs(S[:, 1] ** 2 - np.sum(lam ** 2, axis=1) - 2 * S[:, 2]))) / scale
    rec.check("gauss_identity", gauss <= 1e-10, {"max_relative_residual": gauss})
    P1 = fieldc["P1"][valid]
    p1eig = np.sort(np.linalg.eigvalsh(P1), axis=1)
    expect = np.sort(S[:, 1:2] - lam, axis=1)
    p1err = float(np.max(np.abs(p1eig - expect))) / scale
    rec.check("p1_spectrum", p1err <= 1e-10, {"max_relative_error": p1err})
    s2 = S[:, 2]
    rec.check("s2_range", True, {"s2_min": float(s2.min()), "s2_max": float(s2.max())},
              asserted=False)
    if not patch.is_graph:
        rec.skip("normal_w", "not a graph patch")
        rec.skip("divform_order", "not a graph patch")
        return
    nw = float(np.max(np.abs(fieldc["N"][valid][:, -1] * fieldc["W"][valid] - 1.0)))
    rec.check("normal_w", nw <= 1e-12, {"max_abs_error": nw})
    points = np.atleast_2d(np.array(_req(cfg, "points", list), dtype=float))
    if points.shape[1] != patch.n:
        raise ConfigError(f"points must have {patch.n} coordinates")
    patch.check_inside(points)
    trace = geometry_arrays(patch, points, order=2)["S"][:, 1]
    res = [max(abs(s1_divform(patch, x, h) - t) for x, t in zip(points, trace)) for h in hs]
    orders = observed_orders(hs, res)
    rows = [(h, r, o) for h, r, o in zip(hs, res, (float("nan"),) + orders)]
    rec.csv("divform.csv", ["step", "residual", "order"], rows)
    rec.dat("divform.dat", hs, res, "step residual")
    if len(hs) >= 2:
        mo = min(orders)
        rec.check("divform_order", mo >= min_order,
                  {"steps": hs, "residuals": res, "orders": orders, "min_order": mo})
    else:
        rec.check("divform_residual", True, {"residuals": res}, asserted=False)


def _identity_refinement(cfg, rec, name, fn):
    patch = _patch(cfg)
    hs = _float_list(cfg, "grid_h", decreasing=True, min_len=2)
    min_order = _opt(cfg, "min_order", float, DEFAULT_MIN_ORDER)
    tol = _opt(cfg, "residual_tol", float, None)
    try:
        study = refinement_study(fn, patch, hs)
    except PreconditionViolation as exc:
        rec.skip(f"{name}_order", str(exc), exc.details)
        return patch, None
    rec.csv(f"{name}.csv", ["h", "residual", "order"], _refinement_rows(study))
    rec.dat(f"{name}.dat", study.hs, study.residuals, "h residual")
    _order_check(rec, f"{name}_order", study, min_order)
    if tol is not None:
        rec.check(f"{name}_residual", study.finest <= tol,
                  {"finest": study.finest, "tol": tol})
    return patch, study


def scenario_reilly(cfg, rec):
    _identity_refinement(cfg, rec, "reilly", reilly_residual)


def scenario_eqn16(cfg, rec):
    patch, study = _identity_refinement(cfg, rec, "eqn16", eqn16_residual)
    h = _float_list(cfg, "grid_h")[0]
    fld = shape_field(patch, h, order=3)
    cda = covariant_da(fld)
    m = fld.interior()
    gap = float(np.max(np.abs(cda.norm_dA2[m] - cda.norm_dS1_2[m])))
    dA = float(np.max(cda.norm_dA2[m]))
    vals = {"max_gap": gap, "max_norm_dA2": dA}
    if patch.builder == "one_variable_graph":
        rec.check("da_equality", gap <= 1e-8, vals)
    elif patch.builder == "round_cap_chart":
        rec.check("da_parallel", dA <= 1e-10, vals)
    else:
        rec.check("da_equality", gap <= 1e-8, vals, asserted=False)


def scenario_stability(cfg, rec):
    patch = _patch(cfg)
    hs = _float_list(cfg, "grid_h", decreasing=True)
    c = _req(cfg, "c", float)
    mode = _opt(cfg, "mode", str, "dirichlet")
    expect = _opt(cfg, "expect", dict, {})
    cert_cfg = _opt(cfg, "certificate", dict, None)
    levels = []
    for i, h in enumerate(hs):
        asm = index_estimate(patch, c, mode=mode, h=h)
        levels.append(asm)
        rec.csv(f"eigenvalues_{i}.csv", ["index", "mu"], list(enumerate(asm.eigenvalues)))
    rec.csv("levels.csv", ["h", "dofs", "neg_count", "mu_min", "tol_eig"],
            [(a.h, a.dofs, a.neg_count, a.mu_min, a.tol_eig) for a in levels])
    rec.dat("mu_min.dat", [a.h for a in levels], [a.mu_min for a in levels], "h mu_min")
    fin = levels[-1]
    summary = [a.summary() for a in levels]
    rec.check("index_summary", True, {"levels": summary}, asserted=False)
    if "neg_count_min" in expect:
        k = _typed(expect["neg_count_min"], "neg_count_min", int)
        rec.check("neg_count_min", fin.neg_count >= k, {"neg_count": fin.neg_count, "min": k})
    if "neg_count_max" in expect:
        k = _typed(expect["neg_count_max"], "neg_count_max", int)
        rec.check("neg_count_max", fin.neg_count <= k, {"neg_count": fin.neg_count, "max": k})
    if "mu_decay_factor" in expect:
        fac = _typed(expect["mu_decay_factor"], "mu_decay_factor", float)
        if len(levels) < 2:
            raise ConfigError("mu_decay_factor needs at least two grid_h levels")
        ratios = [abs(a.mu_min) / abs(b.mu_min) if b.mu_min != 0 else float("inf")
                  for a, b in zip(levels, levels[1:])]
        rec.check("mu_decay", min(ratios) >= fac,
                  {"mu_min": [a.mu_min for a in levels], "ratios": ratios, "factor": fac})
    if cert_cfg is not None:
        prof = CutoffProfile(**_req(cert_cfg, "profile", dict))
        p0 = _point(cert_cfg, "p0", patch.n)
        fld = shape_field(patch, hs[0])
        cert = lemma32_certificate(fld, prof, c, assembly=levels[0], p0=p0)
        rec.check("lemma32_certificate", cert.holds, cert.to_json(),
                  asserted=cert.asserted and "lemma32_certificate" in rec.force_assert)


def scenario_growth(cfg, rec):
    patch = _patch(cfg)
    hs = _float_list(cfg, "grid_h")
    if len(hs) != 1:
        raise ConfigError("growth expects exactly one grid_h entry")
    fld = shape_field(patch, hs[0])
    p0 = _point(cfg, "p0", patch.n)
    radii = _float_list(cfg, "radii")
    rep = growth_scan(fld, p0, radii)
    rec.csv("growth.csv", ["R", "vol1", "S1_int", "S1cubed_int", "ratio2", "ration"],
            rep.rows())
    rec.dat("growth_S1.dat", rep.radii, rep.s1_int, "R int_{B_R} S1")
    rec.dat("growth_ratio2.dat", rep.radii, rep.ratio2, "R R^-2 int_{B_R} S1^3")
    rec.dat("growth_ration.dat", rep.radii, rep.ration, "R R^-n int_{B_R} S1")
    s1 = fld.S1[fld["valid"]]
    nonneg = bool(np.all(s1 >= -1e-12 * (1 + np.max(np.abs(s1)))))
    mono = all(b >= a for seq in (rep.vol1, rep.s1_int, rep.s1cubed_int)
               for a, b in zip(seq, seq[1:]))
    rec.check("growth_monotone", mono, {"s1_nonnegative": nonneg}, asserted=nonneg)
    rec.check("growth_scan", True, rep.to_json(), asserted=False)
    thetas = _opt(cfg, "theta", list, [])
    if thetas:
        bound_radii = _float_list(cfg, "bound_radii")
        if not patch.is_graph:
            rec.skip("growth_bound", "not a graph patch")
            return
        rows, slacks = [], []
        try:
            for th in thetas:
                for R in bound_radii:
                    chk = graph_growth_bound_check(fld, p0, float(th), R)
                    rows.append((chk.theta, chk.R, chk.lhs, chk.rhs, chk.slack, chk.truncated))
                    slacks.append(chk.slack)
        except PreconditionViolation as exc:
            rec.skip("growth_bound", str(exc), exc.details)
            return
        rec.csv("bound.csv", ["theta", "R", "lhs", "rhs", "slack", "truncated"], rows)
        rec.check("growth_bound", min(slacks) >= 0,
                  {"min_slack": min(slacks), "cases": len(slacks),
                   "truncated_cases": sum(r[-1] for r in rows)})


COMMANDS = {
    "identities": scenario_identities,
    "curvature": scenario_curvature,
    "reilly": scenario_reilly,
    "eqn16": scenario_eqn16,
    "stability-index": scenario_stability,
    "growth": scenario_growth,
    "audit": scenario_audit,
}


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=k)


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    _req(cfg, "name", str)
    cmd = _req(cfg, "command", str)
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; expected one of {sorted(COMMANDS)}")
    return cfg


def run(config_path, out_dir):
    """Execute one scenario; returns ``(RunReport, exit_code)``."""
    out = Path(out_dir)
    t0 = time.perf_counter()
    report = RunReport(scenario="", command="")
    code = EXIT_OK
    try:
        cfg = load_config(config_path)
        report.scenario, report.command = cfg["name"], cfg["command"]
        out.mkdir(parents=True, exist_ok=True)
        rec = Recorder(report, cfg, out)
        limiter = _thread_limit()
        try:
            COMMANDS[cfg["command"]](cfg, rec)
        finally:
            if limiter is not None:
                limiter.restore_original_limits()
        code = EXIT_FAIL if report.failed else EXIT_OK
    except (InvalidInput, DomainError, UnsupportedPrecision, TypeError) as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        code = EXIT_CONFIG
    except (NumericalFailure, np.linalg.LinAlgError, ArithmeticError) as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        code = EXIT_NUMERIC
    report.wall_time = time.perf_counter() - t0
    if out.is_dir():
        write_json(out / "report.json", report)
    return report, code


def _print_report(report, code, stream):
    for c in report.checks:
        print(f"{c.status:>11}  {c.name}  {c.message}".rstrip(), file=stream)
    if report.error:
        print(f"error: {report.error}", file=stream)
    n_fail = len(report.failed)
    print(f"{report.scenario or '?'}: {len(report.checks)} checks, {n_fail} failed, "
          f"exit {code}, {report.wall_time:.2f}s", file=stream)


def _print_builders(as_json, stream):
    cat = builder_catalog()
    if as_json:
        print(json.dumps(cat, indent=2, sort_keys=True), file=stream)
        return
    for name, info in cat.items():
        print(f"{name}: {info['doc']}", file=stream)
        for k, v in info["params"].items():
            print(f"    {k}: {v}", file=stream)


def build_parser():
    p = argparse.ArgumentParser(prog="hypstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="execute a scenario config")
    r.add_argument("config", help="scenario JSON file")
    r.add_argument("--out", required=True, help="output directory")
    b = sub.add_parser("builders", help="list patch builders")
    b.add_argument("--json", action="store_true", help="machine-readable catalog")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)  # argparse exits 2 on bad usage
    if args.cmd == "builders":
        _print_builders(args.json, sys.stdout)
        return EXIT_OK
    report, code = run(args.config, args.out)
    _print_report(report, code, sys.stdout)
    return code
