"""Scenario files: validated batches of checks and their reports.

A scenario is JSON::

    {"version": 1, "name": "...", "seed": 0,
     "checks": [{"kind": "period", "params": {...}, "tolerances": {...}}, ...]}

Every check is validated before any numeric work; unknown fields are
rejected.  Complex numbers are written as numbers or ``[re, im]`` pairs.
"""
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .envelope import case2_scaling, sweep_certificate
from .errors import DomainError, ScenarioError
from .forms import CONVENTION, FORM_REGISTRY, HopfManifold, Sampler, descends_to_hopf, get_form, is_plurinegative, is_pluriclosed
from .morse import (
    ScalarJet2,
    classify_case,
    normal_form_residual,
    normalize_critical_point,
    real_hessian_index,
)
from .periods import SphereCycle, branch_bound, plateau_obstruction, sphere_period
from .volumes import FAMILY_REGISTRY, family_volume_scan, get_family, volume_gap_check

SCENARIO_VERSION = 1
TOP_KEYS = {"version", "name", "description", "seed", "checks"}
CHECK_KEYS = {"kind", "label", "params", "tolerances", "seed"}


# ---------------------------------------------------------------------------
# field validators; each returns the normalized value or raises ScenarioError


def _number(path, v, lo=None, hi=None, lo_open=False, hi_open=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(path, f"expected a finite number, got {v!r}")
    v = float(v)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ScenarioError(path, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ScenarioError(path, f"must be {'<' if hi_open else '<='} {hi}, got {v}")
    return v


def _positive(path, v):
    return _number(path, v, lo=0.0, lo_open=True)


def _count(path, v, lo=1):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ScenarioError(path, f"expected an integer >= {lo}, got {v!r}")
    return v


def _bool(path, v):
    if not isinstance(v, bool):
        raise ScenarioError(path, f"expected true or false, got {v!r}")
    return v


def _complex(path, v):
    if isinstance(v, list) and len(v) == 2:
        return complex(_number(path + "[0]", v[0]), _number(path + "[1]", v[1]))
    return complex(_number(path, v))


def _complex_list(path, v, length=None):
    if not isinstance(v, list) or (length is not None and len(v) != length) or not v:
        want = f"a list of {length}" if length else "a nonempty list"
        raise ScenarioError(path, f"expected {want} complex numbers")
    return [_complex(f"{path}[{i}]", x) for i, x in enumerate(v)]


def _matrix(path, v):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ScenarioError(path, "expected a nonempty list of rows")
    n = len(v)
    rows = [_complex_list(f"{path}[{i}]", r, n) for i, r in enumerate(v)]
    return np.array(rows, dtype=complex)


def _choice(options):
    def check(path, v):
        if v not in options:
            raise ScenarioError(path, f"expected one of {sorted(options)}, got {v!r}")
        return v
    return check


def _grid(path, v):
    if not isinstance(v, list) or len(v) != 3:
        raise ScenarioError(path, "expected three grid counts")
    return tuple(_count(f"{path}[{i}]", x, lo=2) for i, x in enumerate(v))


_form = _choice(set(FORM_REGISTRY))
_family = _choice(set(FAMILY_REGISTRY))
_REQUIRED = object()

# kind -> (params schema, tolerance defaults, primary tolerance name)
# schema: name -> (validator, default or _REQUIRED)
SCHEMAS = {
    "normal-form": (
        {
            "levi": (_matrix, _REQUIRED),
            "holomorphic": (_matrix, _REQUIRED),
            "expect_a": (lambda p, v: [_number(f"{p}[{i}]", x) for i, x in enumerate(v)] if isinstance(v, list)
                         else _number(p, v), None),
            "expect_q": (lambda p, v: _count(p, v, lo=0), None),
            "expect_case": (_choice({"case1", "case2"}), None),
            "expect_index": (lambda p, v: _count(p, v, lo=0), None),
            "delta1": (lambda p, v: _number(p, v, 0.0, 1.0, True, True), None),
        },
        {"residual": 1e-9, "a": 1e-8},
        "residual",
    ),
    "sweep": (
        {
            "delta0": (lambda p, v: _number(p, v, 0.0, 1.0, True, True), _REQUIRED),
            "t_steps": (lambda p, v: _count(p, v, lo=2), 100),
            "samples_per_slice": (_count, 500),
            "n": (lambda p, v: _count(p, v, lo=2), 2),
        },
        {},
        None,
    ),
    "metric-check": (
        {
            "form": (_form, _REQUIRED),
            "test": (_choice({"pluriclosed", "plurinegative", "hopf-descent"}), "pluriclosed"),
            "expect": (_bool, True),
            "samples": (_count, 100),
            "inner": (lambda p, v: _number(p, v, lo=0.0), 1.0),
            "outer": (_positive, 2.0),
        },
        {"residual": 1e-9},
        "residual",
    ),
    "period": (
        {
            "form": (_form, _REQUIRED),
            "radius": (_positive, 1.0),
            "center": (lambda p, v: _complex_list(p, v, 2), [0.0, 0.0]),
            "orientation": (_choice({"outward", "inward"}), "outward"),
            "grid": (_grid, [64, 64, 64]),
            "refined_grid": (_grid, [96, 96, 96]),
            "expect_abs": (lambda p, v: _number(p, v, lo=0.0), None),
        },
        {"rtol": 1e-3, "quadrature": 1e-6},
        "rtol",
    ),
    "obstruction": (
        {
            "form": (_form, _REQUIRED),
            "radius": (_positive, 1.0),
            "center": (lambda p, v: _complex_list(p, v, 2), [0.0, 0.0]),
            "orientation": (_choice({"outward", "inward"}), "outward"),
            "grid": (_grid, [64, 64, 64]),
            "refined_grid": (_grid, [96, 96, 96]),
            "expect": (_choice({"shell_obstruction", "no_obstruction"}), _REQUIRED),
            "min_cycle_period": (_positive, None),
            "expect_branches": (lambda p, v: _count(p, v, lo=0), None),
        },
        {"period": 1e-6},
        "period",
    ),
    "volume-scan": (
        {
            "family": (_family, _REQUIRED),
            "s": (_complex_list, _REQUIRED),
            "C0": (_positive, _REQUIRED),
            "form": (_form, None),
            "expect_bounded": (_bool, None),
            "expect_slope": (_number, None),
            "expect_volumes": (lambda p, v: [_number(f"{p}[{i}]", x) for i, x in enumerate(v)]
                               if isinstance(v, list) else _number(p, v), None),
        },
        {"slope_rtol": 0.05, "volume_rtol": 1e-4},
        "volume_rtol",
    ),
    "gap-check": (
        {
            "family": (_family, _REQUIRED),
            "s": (_complex_list, _REQUIRED),
            "nu": (_positive, _REQUIRED),
            "s0": (_complex, _REQUIRED),
            "radius": (_positive, _REQUIRED),
            "form": (_form, None),
            "expect": (_bool, _REQUIRED),
        },
        {},
        None,
    ),
}


@dataclass
class Check:
    kind: str
    params: dict
    raw_params: dict
    tolerances: dict
    seed: int
    label: str = ""


@dataclass
class Scenario:
    checks: list
    seed: int = 0
    name: str = ""
    version: int = SCENARIO_VERSION


def _validate_check(i, c, default_seed):
    path = f"checks[{i}]"
    if not isinstance(c, dict):
        raise ScenarioError(path, "expected an object")
    for k in c:
        if k not in CHECK_KEYS:
            raise ScenarioError(f"{path}.{k}", "unknown field")
    if "kind" not in c:
        raise ScenarioError(f"{path}.kind", "missing field")
    kind = c["kind"]
    if kind not in SCHEMAS:
        raise ScenarioError(f"{path}.kind", f"unknown kind {kind!r}; known: {sorted(SCHEMAS)}")
    schema, tol_defaults, _ = SCHEMAS[kind]

    raw = c.get("params", {})
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}.params", "expected an object")
    for k in raw:
        if k not in schema:
            raise ScenarioError(f"{path}.params.{k}", f"unknown parameter for kind {kind!r}")
    params = {}
    for name, (check, default) in schema.items():
        if name in raw:
            params[name] = check(f"{path}.params.{name}", raw[name])
        elif default is _REQUIRED:
            raise ScenarioError(f"{path}.params.{name}", "missing parameter")
        elif default is not None:
            params[name] = check(f"{path}.params.{name}", default)
        else:
            params[name] = None

    tols = dict(tol_defaults)
    raw_tols = c.get("tolerances", {})
    if not isinstance(raw_tols, dict):
        raise ScenarioError(f"{path}.tolerances", "expected an object")
    for k, v in raw_tols.items():
        if k not in tol_defaults:
            raise ScenarioError(f"{path}.tolerances.{k}", f"unknown tolerance for kind {kind!r}")
        tols[k] = _positive(f"{path}.tolerances.{k}", v)

    seed = _count(f"{path}.seed", c["seed"], lo=0) if "seed" in c else default_seed
    label = c.get("label", "")
    if not isinstance(label, str):
        raise ScenarioError(f"{path}.label", "expected a string")
    _cross_validate(path, kind, params)
    echo = {k: raw[k] for k in schema if k in raw}
    return Check(kind, params, echo, tols, seed, label)


def _cross_validate(path, kind, p):
    if kind == "normal-form":
        if p["levi"].shape != p["holomorphic"].shape:
            raise ScenarioError(f"{path}.params", "levi and holomorphic matrices differ in size")
    elif kind == "metric-check":
        if p["inner"] >= p["outer"]:
            raise ScenarioError(f"{path}.params.inner", "inner radius must be below outer radius")
        n = get_form(p["form"]).n
        if p["test"] == "plurinegative" and n not in (2, 3):
            raise ScenarioError(f"{path}.params.test", "plurinegativity is checked for n in (2, 3)")
    elif kind in ("period", "obstruction"):
        if get_form(p["form"]).n != 2:
            raise ScenarioError(f"{path}.params.form", "sphere periods need a form on C^2")


def parse_scenario(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"line {e.lineno} column {e.colno}", f"invalid JSON: {e.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    for k in data:
        if k not in TOP_KEYS:
            raise ScenarioError(k, "unknown field")
    if "version" not in data:
        raise ScenarioError("version", "missing field")
    if data["version"] != SCENARIO_VERSION:
        raise ScenarioError("version", f"unsupported version {data['version']!r}")
    seed = _count("seed", data.get("seed", 0), lo=0)
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")
    checks = data.get("checks")
    if not isinstance(checks, list):
        raise ScenarioError("checks", "expected a list")
    return Scenario([_validate_check(i, c, seed) for i, c in enumerate(checks)], seed, name)


def make_check(kind, params, tolerances=None, seed=0, label=""):
    """Validate a single check given as plain Python values."""
    c = {"kind": kind, "params": params, "seed": seed}
    if tolerances:
        c["tolerances"] = tolerances
    if label:
        c["label"] = label
    return _validate_check(0, c, seed)


# ---------------------------------------------------------------------------
# execution


def _cycle(p):
    return SphereCycle(radius=p["radius"], center=tuple(p["center"]), orientation=p["orientation"],
                       grid=p["grid"], refined_grid=p["refined_grid"])


def _run_normal_form(c):
    p, t = c.params, c.tolerances
    jet = ScalarJet2.from_quadratic(p["holomorphic"], p["levi"])
    nf = normalize_critical_point(jet)
    residual = normal_form_residual(jet, nf)
    out = {
        "a": nf.a.tolist(),
        "q": nf.q,
        "n": nf.n,
        "case": classify_case(nf).value,
        "degenerate": nf.degenerate.tolist(),
        "hessian_index": None if nf.is_degenerate else real_hessian_index(nf),
    }
    ok = residual <= t["residual"]
    if p["expect_a"] is not None:
        exp = np.atleast_1d(p["expect_a"])
        ok &= exp.shape == nf.a.shape and bool(np.all(np.abs(exp - nf.a) <= t["a"]))
    if p["expect_q"] is not None:
        ok &= nf.q == p["expect_q"]
    if p["expect_case"] is not None:
        ok &= out["case"] == p["expect_case"]
    if p["expect_index"] is not None:
        ok &= out["hessian_index"] == p["expect_index"]
    if p["delta1"] is not None and out["case"] == "case2":
        out["delta0"] = case2_scaling(nf, p["delta1"])[2]
    return ok, out, {"residual": residual}, {}


def _run_sweep(c):
    p = c.params
    cert = sweep_certificate(p["delta0"], p["t_steps"], p["samples_per_slice"], seed=c.seed, n=p["n"])
    d = cert.to_dict()
    margins = {k: d[k] for k in ("min_margin", "top_margin", "ring_margin")}
    errors = {k: d[k] for k in ("closed_form_error", "max_slice_residual", "origin_distance")}
    return cert.verdict, d, margins, errors


def _run_metric(c):
    p, tol = c.params, c.tolerances["residual"]
    w = get_form(p["form"])
    sampler = Sampler(p["samples"], c.seed, p["inner"], p["outer"])
    if p["test"] == "pluriclosed":
        res = is_pluriclosed(w, sampler, tol)
    elif p["test"] == "plurinegative":
        res = is_plurinegative(w, sampler, tol)
    else:
        res = descends_to_hopf(w, HopfManifold(w.n), sampler, tol)
    out = {"form": w.name, "test": p["test"], "result": res.passed, "expected": p["expect"]}
    return res.passed == p["expect"], out, {"residual": res.residual}, {}


def _run_period(c):
    p, t = c.params, c.tolerances
    w = get_form(p["form"])
    rep = sphere_period(w, _cycle(p))
    ok = rep.error <= t["quadrature"] * max(1.0, abs(rep.value))
    out = {"period": rep.value, "abs_period": abs(rep.value), "form": rep.form}
    margins = {}
    if p["expect_abs"] is not None:
        rel = abs(abs(rep.value) - p["expect_abs"]) / max(p["expect_abs"], 1e-300)
        margins["relative_deviation"] = rel
        ok &= rel <= t["rtol"]
    return ok, out, margins, {"quadrature": rep.error}


def _run_obstruction(c):
    p, t = c.params, c.tolerances
    w = get_form(p["form"])
    v = plateau_obstruction(w, _cycle(p), t["period"])
    out = v.to_dict()
    ok = v.verdict.value == p["expect"]
    if p["min_cycle_period"] is not None:
        # quadrature error plus a relative rounding allowance
        slack = v.error + 1e-10 * abs(v.period)
        out["branch_bound"] = branch_bound(v.period, p["min_cycle_period"], slack)
        if p["expect_branches"] is not None:
            ok &= out["branch_bound"] == p["expect_branches"]
    return ok, out, {"abs_period": abs(v.period)}, {"quadrature": v.error}


def _family_for(p):
    return get_family(p["family"], p["s"], form=p["form"])


def _run_volume_scan(c):
    p, t = c.params, c.tolerances
    scan = family_volume_scan(_family_for(p), p["C0"])
    out = scan.to_dict()
    ok = True
    if p["expect_bounded"] is not None:
        ok &= scan.bounded == p["expect_bounded"]
    margins = {"max_volume_minus_C0": max(r["volume"] for r in scan.rows) - p["C0"]}
    if p["expect_slope"] is not None:
        rel = math.inf if scan.slope is None else abs(scan.slope - p["expect_slope"]) / abs(p["expect_slope"])
        margins["slope_relative_deviation"] = rel
        ok &= rel <= t["slope_rtol"]
    if p["expect_volumes"] is not None:
        exp = np.atleast_1d(p["expect_volumes"])
        got = np.array([r["volume"] for r in scan.rows])
        if exp.shape != got.shape:
            raise DomainError("expect_volumes must list one value per grid point")
        rel = float(np.max(np.abs(got - exp) / np.abs(exp)))
        margins["volume_relative_deviation"] = rel
        ok &= rel <= t["volume_rtol"]
    errors = {"max_quadrature": max(r["error"] for r in scan.rows)}
    return ok, out, margins, errors


def _run_gap(c):
    p = c.params
    scan = family_volume_scan(_family_for(p), math.inf)
    g = volume_gap_check(scan, p["nu"], p["s0"], p["radius"])
    out = {"gap_ok": g.passed, "max_gap": g.max_gap, "points": g.points, "nu": p["nu"], "expected": p["expect"]}
    return g.passed == p["expect"], out, {"half_nu_minus_gap": p["nu"] / 2 - g.max_gap}, {}


RUNNERS = {
    "normal-form": _run_normal_form,
    "sweep": _run_sweep,
    "metric-check": _run_metric,
    "period": _run_period,
    "obstruction": _run_obstruction,
    "volume-scan": _run_volume_scan,
    "gap-check": _run_gap,
}


@dataclass
class Report:
    checks: list
    seed: int
    scenario: str = ""
    version: str = __version__
    convention: str = CONVENTION
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def to_dict(self):
        n_pass = sum(1 for c in self.checks if c["passed"])
        return {
            "toolkit": {"name": "plateau", "version": self.version},
            "convention": self.convention,
            "scenario": self.scenario,
            "seed": self.seed,
            "passed": self.passed,
            "summary": {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass},
            "checks": self.checks,
        }


def _execute(index, c, timings):
    start = time.perf_counter()
    entry = {
        "index": index,
        "kind": c.kind,
        "label": c.label,
        "seed": c.seed,
        "inputs": c.raw_params,
        "tolerances": c.tolerances,
    }
    try:
        ok, out, margins, errors = RUNNERS[c.kind](c)
        entry.update(passed=bool(ok), outputs=out, margins=margins, error_estimates=errors, error=None)
    except Exception as e:  # a failing check never aborts the batch
        entry.update(passed=False, outputs={}, margins={}, error_estimates={},
                     error=f"{type(e).__name__}: {e}")
    if timings:
        entry["wall_time"] = time.perf_counter() - start
    return _jsonable(entry)


def run_scenario(s, jobs=1, timings=False):
    """Execute every check; results come back in check order whatever ``jobs`` is."""
    if jobs > 1 and len(s.checks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            checks = list(pool.map(lambda ic: _execute(ic[0], ic[1], timings), enumerate(s.checks)))
    else:
        checks = [_execute(i, c, timings) for i, c in enumerate(s.checks)]
    return Report(checks=checks, seed=s.seed, scenario=s.name)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    return v


def emit_report(r, fmt="json"):
    d = r.to_dict()
    if fmt == "json":
        return (json.dumps(d, indent=2, allow_nan=False) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [
        f"plateau {d['toolkit']['version']}  scenario={d['scenario'] or '-'}  seed={d['seed']}  {d['convention']}",
    ]
    for c in d["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        what = c["label"] or _summary(c)
        extra = f"  error: {c['error']}" if c["error"] else ""
        lines.append(f"{status}  #{c['index']:<3d} {c['kind']:<13s} {what}{extra}")
    s = d["summary"]
    lines.append(f"{s['passed']}/{s['total']} checks passed")
    return ("\n".join(lines) + "\n").encode()


def _summary(c):
    o = c["outputs"]
    k = c["kind"]
    if not o:
        return ""
    if k == "normal-form":
        return f"a={_fmt(o['a'])} q={o['q']} {o['case']}"
    if k == "sweep":
        return f"delta0={o['delta0']:g} min_margin={o['min_margin']:.6g} verdict={o['verdict']}"
    if k == "metric-check":
        return f"{o['form']} {o['test']}={o['result']} (expected {o['expected']})"
    if k == "period":
        return f"period={o['period']:.10g}"
    if k == "obstruction":
        return f"{o['verdict']} period={o['period']:.10g}"
    if k == "volume-scan":
        return f"volumes={_fmt([r['volume'] for r in o['rows']])} bounded={o['bounded']} slope={o['slope']}"
    if k == "gap-check":
        return f"max_gap={o['max_gap']:.6g} nu={o['nu']:g} ok={o['gap_ok']}"
    return ""


def _fmt(xs):
    return "[" + ", ".join(f"{x:.6g}" for x in xs) + "]"
