"""Command-line front end.

    wedgespec contour  --theta 30deg [--epsilon 0.01]
    wedgespec well     --theta 14.81deg | --theta-range 0:45deg:0.5deg | --sweep-exceptional 5
    wedgespec monomial --nu 2 [--matching double|analytic] [--scan 0:10:0.05]
    wedgespec pseudo   [--theta ...] [--no-involutive]
    wedgespec oracle   --nu 2 --K 60 --window 0:15

Every command takes --format csv|json, --out PATH, --figure PATH and
--config FILE (a JSON object of parameters; flags override it). Angles
accept a ``deg`` or ``rad`` suffix; bare numbers are radians. Exit codes:
0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import contour as _contour
from . import monomial as _mono
from . import pseudoherm as _ph
from . import squarewell as _sw
from .errors import DomainError, NumericError, PreconditionError
from .report import ResultEnvelope, matrix_json, to_jsonable, write_csv

COMMANDS = ("contour", "well", "monomial", "pseudo", "oracle")
FIGURE_TYPES = ("png", "svg", "pdf")


class ValidationError(DomainError):
    pass


# --- parsing helpers ---------------------------------------------------------

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_ANGLE = re.compile(rf"^\s*({_NUM})\s*(deg|rad)?\s*$")


def _angle_parts(text):
    m = _ANGLE.match(str(text))
    if not m:
        raise ValidationError(f"cannot parse angle {text!r}")
    return float(m.group(1)), m.group(2)


def parse_angle(text, default_unit="rad"):
    """'14.81deg' -> radians; bare numbers use ``default_unit``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        val, unit = float(text), None
    else:
        val, unit = _angle_parts(text)
    if not math.isfinite(val):
        raise ValidationError(f"angle {text!r} is not finite")
    unit = unit or default_unit
    return math.radians(val) if unit == "deg" else val


def parse_range(text, angle=True):
    """'a:b:step' -> increasing list including b (within rounding).

    For angles a unit on any component applies to unitless components.
    """
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValidationError(f"range {text!r} must be start:end:step")
    conv = float
    if angle:
        units = {_angle_parts(p)[1] for p in parts} - {None}
        if len(units) > 1:
            raise ValidationError(f"mixed units in range {text!r}")
        unit = units.pop() if units else "rad"
        a, b, h = (_angle_parts(p)[0] for p in parts)
        conv = math.radians if unit == "deg" else float
    else:
        a, b, h = (_float(p, "range") for p in parts)
    if not all(math.isfinite(v) for v in (a, b, h)):
        raise ValidationError(f"range {text!r} must be finite")
    if not h > 0:
        raise ValidationError(f"range step must be positive in {text!r}")
    if not a < b:
        raise ValidationError(f"empty range {text!r} (start must be < end)")
    n = int(math.floor((b - a) / h + 1e-9))
    if n > 100000:
        raise ValidationError(f"range {text!r} has too many points")
    # points are formed in the input unit so that 0:45deg:5deg hits 15deg exactly
    return [conv(round(a + k * h, 12)) for k in range(n + 1)]


def parse_window(text):
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ValidationError(f"window {text!r} must be a:b")
    a, b = (_float(p, "window") for p in parts)
    if not (0 <= a < b):
        raise ValidationError(f"window {text!r} must satisfy 0 <= a < b")
    return a, b


def _float(v, name):
    if isinstance(v, bool):
        raise ValidationError(f"{name} must be a number, got {v!r}")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {v!r}") from None
    if not math.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {v!r}")
    return x


def _int(v, name, lo=None, hi=None):
    if isinstance(v, bool):
        raise ValidationError(f"{name} must be an integer, got {v!r}")
    try:
        if isinstance(v, float):
            if not v.is_integer():
                raise ValueError
            x = int(v)
        else:
            x = int(str(v).strip())
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be an integer, got {v!r}") from None
    if lo is not None and x < lo:
        raise ValidationError(f"{name} must be >= {lo}, got {x}")
    if hi is not None and x > hi:
        raise ValidationError(f"{name} must be <= {hi}, got {x}")
    return x


def _bool(v, name):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "false", "1", "0", "yes", "no"):
        return v.lower() in ("true", "1", "yes")
    raise ValidationError(f"{name} must be a boolean, got {v!r}")


def _choice(v, name, options):
    if v not in options:
        raise ValidationError(f"{name} must be one of {', '.join(options)}, got {v!r}")
    return v


def _positive(v, name):
    x = _float(v, name)
    if not x > 0:
        raise ValidationError(f"{name} must be positive, got {v!r}")
    return x


# --- configuration -------------------------------------------------------------

# parameter -> default (None: unset); flags map onto these keys
DEFAULTS = {
    "contour": {"theta": None, "epsilon": 1e-2, "xmin": -3.0, "xmax": 3.0, "n": 201},
    "well": {"theta": None, "theta_range": None, "sweep_exceptional": None, "L": 1.0,
             "n": 10, "bc": "dirichlet", "complex": False, "snap_exceptional": False,
             "snap_tol": "0.01deg", "samples": 0},
    "monomial": {"nu": None, "matching": "double", "emax": 20.0, "step": 0.25,
                 "complex": True, "scan": None, "samples": 0, "ode_tol": 1e-12,
                 "seeds": None},
    "pseudo": {"theta": None, "L": 1.0, "n_levels": 2, "involutive": True, "cpt": False},
    "oracle": {"nu": None, "K": 60, "window": "0:15", "theta": None, "matching": "double",
               "tail": False, "profile": 0, "phi1": False},
}
COMMON = {"format": "json", "out": None, "figure": None, "verbose": False}


@dataclass
class RunConfig:
    command: str
    params: dict
    output_format: str = "json"
    out: str | None = None
    figure: str | None = None
    verbose: bool = False

    def echo(self):
        return {"command": self.command, "params": self.params,
                "format": self.output_format}


def _validate_contour(p):
    q = {"theta": parse_angle(_required(p, "theta")),
         "epsilon": _positive(p["epsilon"], "epsilon"),
         "xmin": _float(p["xmin"], "xmin"), "xmax": _float(p["xmax"], "xmax"),
         "n": _int(p["n"], "n", 2, 1_000_000)}
    if not (0 <= q["theta"] < math.pi / 2):
        raise ValidationError("theta must lie in [0, 90deg)")
    if not q["xmin"] < q["xmax"]:
        raise ValidationError("xmin must be < xmax")
    if q["epsilon"] > 10:
        raise ValidationError("epsilon must be <= 10")
    return q


def _required(p, key):
    if p.get(key) is None:
        raise ValidationError(f"missing required parameter {key}")
    return p[key]


def _validate_well(p):
    modes = [k for k in ("theta", "theta_range", "sweep_exceptional") if p.get(k) is not None]
    if len(modes) != 1:
        raise ValidationError("give exactly one of --theta, --theta-range, --sweep-exceptional")
    q = {"L": _positive(p["L"], "L"), "n": _int(p["n"], "n", 1, 10000),
         "bc": _choice(p["bc"], "bc", ("dirichlet", "neumann")),
         "complex": _bool(p["complex"], "complex"),
         "snap_exceptional": _bool(p["snap_exceptional"], "snap_exceptional"),
         "snap_tol": parse_angle(p["snap_tol"]),
         "samples": _int(p["samples"], "samples", 0, 100000),
         "mode": modes[0]}
    if q["snap_tol"] < 0:
        raise ValidationError("snap_tol must be non-negative")
    if modes[0] == "theta":
        th = parse_angle(p["theta"])
        if not (0 <= th < math.pi / 2):
            raise ValidationError("theta must lie in [0, 90deg)")
        q["theta"] = th
    elif modes[0] == "theta_range":
        ths = parse_range(p["theta_range"])
        if ths[0] < 0 or ths[-1] >= math.pi / 2:
            raise ValidationError("theta range must lie in [0, 90deg)")
        q["thetas"] = ths
    else:
        q["ell_max"] = _int(p["sweep_exceptional"], "sweep_exceptional", 1, 200)
    return q


def _validate_nu(v):
    nu = _float(v, "nu")
    if not nu > -2:
        raise ValidationError(f"nu must be > -2, got {v!r}")
    if nu > 50:
        raise ValidationError("nu must be <= 50")
    return nu


def _validate_monomial(p):
    q = {"nu": _validate_nu(_required(p, "nu")),
         "matching": _choice(p["matching"], "matching", ("double", "analytic")),
         "emax": _positive(p["emax"], "emax"), "step": _positive(p["step"], "step"),
         "complex": _bool(p["complex"], "complex"),
         "samples": _int(p["samples"], "samples", 0, 100000),
         "ode_tol": _positive(p["ode_tol"], "ode_tol")}
    if q["emax"] > 500:
        raise ValidationError("emax must be <= 500")
    if q["step"] > q["emax"]:
        raise ValidationError("step must be <= emax")
    if not q["ode_tol"] < 1e-3:
        raise ValidationError("ode_tol must be < 1e-3")
    q["scan"] = None if p.get("scan") is None else parse_range(p["scan"], angle=False)
    if q["scan"] is not None and (q["scan"][0] < 0 or q["scan"][-1] > 500):
        raise ValidationError("scan must lie in [0, 500]")
    seeds = p.get("seeds")
    if seeds is not None:
        if isinstance(seeds, str):
            seeds = [s for s in seeds.split(",") if s.strip()]
        if not isinstance(seeds, list):
            raise ValidationError("seeds must be a list")
        try:
            q["seeds"] = [complex(str(s).replace(" ", "").replace("i", "j")) for s in seeds]
        except ValueError:
            raise ValidationError(f"cannot parse seeds {seeds!r}") from None
        if any(not (math.isfinite(s.real) and math.isfinite(s.imag)) for s in q["seeds"]):
            raise ValidationError("seeds must be finite")
    else:
        q["seeds"] = None
    return q


def _validate_pseudo(p):
    q = {"L": _positive(p["L"], "L"), "n_levels": _int(p["n_levels"], "n_levels", 1, 20),
         "involutive": _bool(p["involutive"], "involutive"), "cpt": _bool(p["cpt"], "cpt")}
    q["theta"] = None if p.get("theta") is None else parse_angle(p["theta"])
    if q["theta"] is not None and not (0 <= q["theta"] < math.pi / 4):
        raise ValidationError("theta must lie in [0, 45deg) for a non-empty real spectrum")
    return q


def _validate_oracle(p):
    q = {"nu": _validate_nu(_required(p, "nu")), "K": _int(p["K"], "K", 1, 2000),
         "window": parse_window(p["window"]),
         "matching": _choice(p["matching"], "matching", ("double", "analytic")),
         "tail": _bool(p["tail"], "tail"), "profile": _int(p["profile"], "profile", 0, 100000),
         "phi1": _bool(p["phi1"], "phi1")}
    q["theta"] = None if p.get("theta") is None else parse_angle(p["theta"])
    if q["theta"] is not None and not (-math.pi / 2 < q["theta"] < math.pi / 2):
        raise ValidationError("theta must lie in (-90deg, 90deg)")
    # semiclassical lambda_K; the exact value is checked again after the solve
    lamK = _mono.wkb_neumann(q["nu"] + 2, q["K"])
    if q["window"][1] > 0.5 * lamK * 1.05:
        raise ValidationError(f"window end {q['window'][1]} exceeds lambda_K/2 ~ {0.5 * lamK:.4g}")
    return q


VALIDATORS = {"contour": _validate_contour, "well": _validate_well,
              "monomial": _validate_monomial, "pseudo": _validate_pseudo,
              "oracle": _validate_oracle}


def validate(cfg):
    """Normalized parameters; raises ValidationError on any bad input."""
    if cfg.command not in COMMANDS:
        raise ValidationError(f"unknown command {cfg.command!r}")
    unknown = set(cfg.params) - set(DEFAULTS[cfg.command])
    if unknown:
        raise ValidationError(f"unknown parameter(s) for {cfg.command}: {', '.join(sorted(unknown))}")
    _choice(cfg.output_format, "format", ("csv", "json"))
    if cfg.figure is not None:
        ext = str(cfg.figure).rsplit(".", 1)[-1].lower() if "." in str(cfg.figure) else ""
        if ext not in FIGURE_TYPES:
            raise ValidationError(f"figure path must end in .{', .'.join(FIGURE_TYPES)}")
    params = dict(DEFAULTS[cfg.command])
    params.update({k: v for k, v in cfg.params.items() if v is not None})
    return VALIDATORS[cfg.command](params)


# --- commands -------------------------------------------------------------------

@dataclass
class Output:
    results: dict
    columns: list
    rows: list
    figure: object = None
    diagnostics: list = field(default_factory=list)
    failed: bool = False


def _deg(theta):
    # round so that 0.5deg steps print as 0.5, not 0.49999999999999994
    return round(math.degrees(theta), 10)


def _workers():
    env = os.environ.get("WEDGESPEC_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"WEDGESPEC_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("WEDGESPEC_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _pmap(fun, items):
    """Ordered map over a bounded thread pool."""
    n = min(_workers(), max(1, len(items)))
    if n == 1:
        return [fun(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fun, items))


def cmd_contour(q, want_fig):
    prof = _contour.wedge_profile(q["theta"], q["epsilon"]) if q["theta"] > 0 else _contour.flat_profile()
    amap = _contour.arclength_map(prof, extent=max(abs(q["xmin"]), abs(q["xmax"])) + 1)
    xs = np.linspace(q["xmin"], q["xmax"], q["n"])
    s = _contour.sample_profile(prof, xs, amap)
    cols = ["x", "f", "df", "ddf", "re_g", "im_g", "F"]
    rows = list(zip(*(s[c].tolist() for c in cols)))
    fig = None
    if want_fig:
        from .plotting import contour_figure
        fig = contour_figure(s, q["theta"])
    res = {"theta": q["theta"], "epsilon": q["epsilon"], "samples": {c: s[c] for c in cols}}
    return Output(res, cols, rows, fig)


def exceptional_below(theta, bc="dirichlet"):
    """Exceptional angles down to (at least one) below ``theta``."""
    ell = 2
    eps = _sw.exceptional_sweep(ell, bc)
    while eps[-1].theta > theta and ell < 512:
        ell *= 2
        eps = _sw.exceptional_sweep(ell, bc)
    return eps


def _near_exceptional(theta, bc, tol):
    """Exceptional angle within ``tol`` of theta, if any."""
    if theta <= 0:
        return None
    eps = exceptional_below(theta - tol, bc)
    near = min(eps, key=lambda e: abs(e.theta - theta))
    return near if abs(near.theta - theta) <= tol else None


def _well_samples(pairs, n):
    if n <= 0:
        return []
    out = []
    for p in pairs:
        x = np.linspace(-p.L / 2, p.L / 2, n)
        out.append((x, _sw.eigenfunction(p, x)))
    return out


def cmd_well(q, want_fig):
    L, bc = q["L"], q["bc"]
    diags = []
    if q["mode"] == "sweep_exceptional":
        eps = _sw.exceptional_sweep(q["ell_max"], bc)
        table = [{"ell": e.ell, "E": e.E / L**2, "theta": e.theta,
                  "theta_deg": _deg(e.theta), "u": e.u, "method": e.method} for e in eps]
        cols = ["ell", "E", "theta_deg", "theta", "u"]
        rows = [[t[c] for c in cols] for t in table]
        fig = None
        if want_fig:
            from .plotting import exceptional_figure
            fig = exceptional_figure(table)
        return Output({"L": L, "bc": bc, "exceptional": table}, cols, rows, fig)

    if q["mode"] == "theta_range":
        thetas = q["thetas"]
        eps = None
        positive = [t for t in thetas if t > 0]
        if positive and bc == "dirichlet":
            eps = exceptional_below(min(positive))

        def one(th):
            try:
                if th == 0.0:
                    return {"theta": th, "count": None, "error": "theta = 0: infinite real spectrum"}
                rep = _sw.real_spectrum(_sw.WellProblem(th, L, bc), normalize=False)
                pred = _sw.count_real(th, eps) if eps is not None else None
                return {"theta": th, "count": rep.count, "predicted": pred,
                        "energies": list(rep.real), "error": None}
            except (NumericError, DomainError) as exc:
                return {"theta": th, "count": None, "error": str(exc)}

        table = _pmap(one, thetas)
        ok = [r for r in table if r["error"] is None]
        width = max((len(r["energies"]) for r in ok), default=0)
        cols = ["theta_deg", "theta", "count", "predicted"] + [f"E{k + 1}" for k in range(width)]
        rows = []
        for r in table:
            e = r.get("energies", [])
            rows.append([_deg(r["theta"]), r["theta"], r["count"], r.get("predicted")]
                        + e + [None] * (width - len(e)))
        for r in table:
            if r["error"]:
                diags.append(f"theta={r['theta']!r}: {r['error']}")
        fig = None
        if want_fig and ok:
            from .plotting import staircase_figure
            fig = staircase_figure([r["theta"] for r in ok], [r["count"] for r in ok],
                                   [e.theta for e in eps] if eps else ())
        res = {"L": L, "bc": bc, "rows": table,
               "exceptional": [e.theta for e in eps] if eps else []}
        return Output(res, cols, rows, fig, diags, failed=not ok)

    theta = q["theta"]
    near = _near_exceptional(theta, bc, max(q["snap_tol"], 1e-3)) if theta > 0 else None
    snapped = False
    if near is not None and near.theta != theta:
        if q["snap_exceptional"] and abs(near.theta - theta) <= q["snap_tol"]:
            diags.append(f"theta snapped from {theta!r} to exceptional angle "
                         f"theta_{near.ell} = {near.theta!r}")
            theta = near.theta
            snapped = True
        else:
            diags.append(f"theta is {math.degrees(theta - near.theta):+.6f} deg from exceptional "
                         f"angle theta_{near.ell} = {math.degrees(near.theta):.6f} deg; "
                         f"eigenvalues there are ill-conditioned (see --snap-exceptional)")
    prob = _sw.WellProblem(theta, L, bc)
    rep = _sw.real_spectrum(prob, n_max=q["n"], complex_search=q["complex"] and theta > 0)
    diags += rep.diagnostics["notes"]
    pairs = rep.pairs
    states = [{"n": k + 1, "E": p.E, "u": p.u, "defective": p.defective, "norm": p.norm}
              for k, p in enumerate(pairs)]
    res = {"L": L, "bc": bc, "theta": theta, "theta_deg": _deg(theta),
           "snapped": snapped, "count": rep.count, "real": list(rep.real),
           "states": states, "complex": list(rep.complex_pairs),
           "max_secular_residual": rep.diagnostics["max_secular_residual"]}
    samples = _well_samples(pairs, q["samples"])
    if samples:
        res["samples"] = [{"x": x, "psi": y} for x, y in samples]
    cols = ["n", "E", "defective"]
    rows = [[s["n"], s["E"], s["defective"]] for s in states]
    rows += [[len(rows) + k + 1, c, False] for k, c in enumerate(rep.complex_pairs)]
    if rep.complex_pairs:
        rows = [[r[0], complex(r[1]), r[2]] for r in rows]
    fig = None
    if want_fig:
        from .plotting import spectrum_figure
        fig = spectrum_figure(rep.real, rep.complex_pairs,
                              f"theta = {math.degrees(theta):.4f} deg", samples or None)
    return Output(res, cols, rows, fig, diags)


def cmd_monomial(q, want_fig):
    prob = _mono.MonomialProblem(q["nu"], ode_tol=q["ode_tol"], matching=q["matching"])
    diags = []
    if q["scan"] is not None:
        E = q["scan"]
        vals = []
        for e in E:
            try:
                vals.append((e, _mono.determinant(prob, e), _mono.real_reduction(prob, e)))
            except NumericError as exc:
                diags.append(f"E={e!r}: {exc}")
                vals.append((e, complex("nan"), float("nan")))
        cols = ["E", "abs_delta", "W"]
        rows = [[e, abs(d), w] for e, d, w in vals]
        fig = None
        if want_fig:
            from .plotting import scan_figure
            fig = scan_figure([v[0] for v in vals], [v[1] for v in vals])
        res = {"nu": q["nu"], "matching": q["matching"], "theta_nu": prob.theta_nu,
               "scan": [{"E": e, "delta": d, "W": w} for e, d, w in vals]}
        return Output(res, cols, rows, fig, diags)
    rep = _mono.eigen_search(prob, seeds=q["seeds"], E_max=q["emax"], step=q["step"],
                             complex_seeds=q["complex"], with_samples=q["samples"] > 0)
    diags += rep.diagnostics["notes"]
    states = []
    funcs = []
    for p in rep.pairs:
        st = {"E": p.E, "is_real": p.is_real, "psi0": p.psi0, "dpsi0_minus": p.dpsi0_minus,
              "dpsi0_plus": p.dpsi0_plus, "abs_D": abs(p.D), "abs_delta": abs(p.delta),
              "matching_residual": p.matching_residual, "odd": p.odd}
        if q["samples"] > 0 and p.x is not None:
            idx = np.unique(np.linspace(0, len(p.x) - 1, q["samples"]).astype(int))
            x = np.concatenate([-p.x[idx][::-1], p.x[idx]])
            y = np.concatenate([p.psi_minus[idx][::-1], p.psi_plus[idx]])
            st["samples"] = {"x": x, "psi": y}
            if p.is_real:
                funcs.append((x, y))
        states.append(st)
    res = {"nu": q["nu"], "matching": q["matching"], "theta_nu": prob.theta_nu,
           "real": rep.real, "complex": rep.complex_pairs, "count": rep.count,
           "states": states, "max_abs_D": rep.diagnostics["max_abs_D"]}
    cols = ["k", "E", "is_real", "abs_D"]
    rows = [[k + 1, complex(s["E"]), s["is_real"], s["abs_D"]] for k, s in enumerate(states)]
    fig = None
    if want_fig:
        from .plotting import spectrum_figure
        fig = spectrum_figure(rep.real, rep.complex_pairs, f"nu = {q['nu']:g}", funcs or None)
    return Output(res, cols, rows, fig, diags)


def section7_document(theta=None, L=1.0, n_levels=2, involutive=True, cpt=False):
    """All matrices of the well's real-eigenvalue subspace as one JSON-ready dict."""
    ws = _ph.well_system(theta, L, n_levels, involutive)
    pack = ws.pack
    doc = {
        "theta": ws.theta, "theta_deg": _deg(ws.theta), "L": L,
        "energies": ws.energies, "r": ws.r, "norms": ws.norms,
        "kappa": pack.kappa, "involutive": involutive,
        "matrices": {
            "gram": matrix_json(pack.system.gram), "H": matrix_json(ws.H),
            "eta_plus": matrix_json(pack.eta_plus), "rho": matrix_json(pack.rho),
            "h": matrix_json(ws.h), "P": matrix_json(pack.P), "C": matrix_json(pack.C),
            # T v = P conj(v) in the eps basis, so T is stored through P
            "T": matrix_json(pack.P),
        },
        "symmetry": ws.suite.residuals,
        "invariants": _ph.invariant_residuals(pack.system, pack, ws.H),
        "involution_residual": pack.involution_residual,
    }
    if ws.sigmas:
        for k, S in enumerate(ws.sigmas, start=1):
            doc["matrices"][f"Sigma{k}"] = matrix_json(S)
        doc["pauli"] = ws.pauli_coefficients()
    if cpt:
        prof = _contour.wedge_profile(ws.theta, 1e-3) if ws.theta > 0 else _contour.flat_profile()
        amap = _contour.arclength_map(prof, extent=L)
        funcs = [(lambda x, p=p, c=(pack.scales[k] if pack.scales is not None else 1.0):
                  c * _sw.eigenfunction(p, x)) for k, p in enumerate(ws.pairs)]
        rep = _ph.cpt_inner_product_equivalence(pack, pack.system, amap, funcs, L / 2)
        doc["cpt"] = {"eta_line": rep.eta_line, "eta_gamma": rep.eta_gamma,
                      "cpt_line": rep.cpt_line, "cpt_gamma": rep.cpt_gamma,
                      "residuals": rep.residuals(), "gram_residual": rep.gram_residual}
    return ws, doc


def cmd_pseudo(q, want_fig):
    ws, doc = section7_document(q["theta"], q["L"], q["n_levels"], q["involutive"], q["cpt"])
    cols = ["matrix", "i", "j", "value"]
    rows = []
    mats = {"H": ws.H, "eta_plus": ws.pack.eta_plus, "rho": ws.pack.rho, "h": ws.h,
            "P": ws.pack.P, "C": ws.pack.C}
    for k, S in enumerate(ws.sigmas, start=1):
        mats[f"Sigma{k}"] = S
    for name, M in mats.items():
        for (i, j), v in np.ndenumerate(np.asarray(M, dtype=complex)):
            rows.append([name, i + 1, j + 1, complex(v)])
    fig = None
    if want_fig:
        from .plotting import matrices_figure
        fig = matrices_figure(mats)
    diags = []
    if not ws.suite.passed:
        diags.append(f"symmetry residuals above tolerance: {sorted(ws.suite.failures())}")
    return Output(doc, cols, rows, fig, diags)


def cmd_oracle(q, want_fig):
    prob = _mono.MonomialProblem(q["nu"], matching=q["matching"])
    theta = prob.theta_nu if q["theta"] is None else q["theta"]
    K = q["K"]
    data = _mono.weyl_data(prob, 2 * K)
    z = _mono.weyl_phi2_zeros(data, theta, q["window"], K=K, order=prob.order, tail=q["tail"])
    res = {"nu": q["nu"], "theta": theta, "K": K, "K_ref": z.K_ref, "matching": q["matching"],
           "tail": q["tail"], "window": list(q["window"]),
           "lambda_K": float(data.neumann_eigs[K - 1]),
           "phi2_zeros": z.zeros, "shifts": z.shifts,
           "max_relative_shift": z.max_relative_shift}
    if q["phi1"]:
        z1 = _mono.weyl_phi1_zeros(data, theta, q["window"], K=K, order=prob.order, tail=q["tail"])
        res["phi1_zeros"] = z1.zeros
        res["phi1_degenerate"] = z1.degenerate
    lam = vals = None
    if q["profile"] > 0 or want_fig:
        lam = np.linspace(*q["window"], max(q["profile"], 400))
        vals = _mono.phi2(data, theta, lam, K, prob.order, q["tail"]).real
    if q["profile"] > 0:
        res["profile"] = {"lambda": lam, "phi2": vals}
        cols = ["lambda", "phi2"]
        rows = [[a, b] for a, b in zip(lam.tolist(), vals.tolist())]
    else:
        cols = ["k", "zero", "shift"]
        rows = [[k + 1, zz, s] for k, (zz, s) in enumerate(zip(z.zeros, z.shifts))]
    fig = None
    if want_fig:
        from .plotting import phi2_figure
        fig = phi2_figure(lam, vals, z.zeros)
    return Output(res, cols, rows, fig)


HANDLERS = {"contour": cmd_contour, "well": cmd_well, "monomial": cmd_monomial,
            "pseudo": cmd_pseudo, "oracle": cmd_oracle}


def run(cfg):
    """Validate, dispatch and wrap the result; returns (envelope, Output)."""
    q = validate(cfg)
    t0 = time.perf_counter()
    out = HANDLERS[cfg.command](q, cfg.figure is not None)
    diags = list(out.diagnostics)
    if cfg.verbose:
        diags.append(f"elapsed_s={time.perf_counter() - t0:.3f}")
        diags.append(f"timestamp={time.strftime('%Y-%m-%dT%H:%M:%S')}")
    env = ResultEnvelope(to_jsonable(cfg.echo()), to_jsonable(out.results), diags)
    return env, out


# --- argument parsing ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser():
    ap = _Parser(prog="wedgespec", description="Spectra of PT-symmetric Hamiltonians on wedge contours.")
    sub = ap.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--figure", default=None, help="write a figure (.png/.svg/.pdf)")
        p.add_argument("--config", default=None, help="JSON parameter file; flags override it")
        p.add_argument("--verbose", action="store_true", default=None)

    p = sub.add_parser("contour", help="wedge profile samples")
    p.add_argument("--theta")
    p.add_argument("--epsilon")
    p.add_argument("--xmin")
    p.add_argument("--xmax")
    p.add_argument("--n")
    common(p)

    p = sub.add_parser("well", help="square well on the wedge")
    p.add_argument("--theta")
    p.add_argument("--theta-range", dest="theta_range")
    p.add_argument("--sweep-exceptional", dest="sweep_exceptional")
    p.add_argument("--L")
    p.add_argument("--n")
    p.add_argument("--bc")
    p.add_argument("--complex", action="store_true", default=None)
    p.add_argument("--snap-exceptional", dest="snap_exceptional", action="store_true", default=None)
    p.add_argument("--snap-tol", dest="snap_tol")
    p.add_argument("--samples")
    common(p)

    p = sub.add_parser("monomial", help="V = z^2 (iz)^nu by shooting")
    p.add_argument("--nu")
    p.add_argument("--matching")
    p.add_argument("--emax")
    p.add_argument("--step")
    p.add_argument("--no-complex", dest="complex", action="store_false", default=None)
    p.add_argument("--scan")
    p.add_argument("--samples")
    p.add_argument("--ode-tol", dest="ode_tol")
    p.add_argument("--seeds", help="comma-separated complex seeds, e.g. 3+4j,7+11j")
    common(p)

    p = sub.add_parser("pseudo", help="metric, observables and C, P, T of the well")
    p.add_argument("--theta")
    p.add_argument("--L")
    p.add_argument("--n-levels", dest="n_levels")
    p.add_argument("--no-involutive", dest="involutive", action="store_false", default=None)
    p.add_argument("--cpt", action="store_true", default=None)
    common(p)

    p = sub.add_parser("oracle", help="zeros of the Weyl-function combination Phi_2")
    p.add_argument("--nu")
    p.add_argument("--K")
    p.add_argument("--window")
    p.add_argument("--theta")
    p.add_argument("--matching")
    p.add_argument("--tail", action="store_true", default=None)
    p.add_argument("--profile")
    p.add_argument("--phi1", action="store_true", default=None)
    common(p)
    return ap


def _load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"config {path!r} is not valid JSON: {exc}".splitlines()[0]) from None
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    return data


def config_from_args(argv):
    ap = build_parser()
    ns = ap.parse_args(argv)
    if ns.command is None:
        raise ValidationError("missing command (one of " + ", ".join(COMMANDS) + ")")
    args = {k: v for k, v in vars(ns).items() if k != "command"}
    file_cfg = _load_file(args.pop("config")) if args.get("config") else {}
    params = {}
    common = dict(COMMON)
    for k, v in file_cfg.items():
        if k in COMMON:
            common[k] = v
        else:
            params[k] = v
    for k, v in args.items():
        if v is None:
            continue
        if k in COMMON:
            common[k] = v
        else:
            params[k] = v
    if common["out"] is not None and not isinstance(common["out"], str):
        raise ValidationError("out must be a path string")
    if common["figure"] is not None and not isinstance(common["figure"], str):
        raise ValidationError("figure must be a path string")
    return RunConfig(ns.command, params, common["format"], common["out"], common["figure"],
                     _bool(common["verbose"], "verbose"))


def render(env, out, fmt):
    if fmt == "json":
        return env.to_json()
    return write_csv(out.columns, out.rows)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        env, out = run(cfg)
    except (DomainError, PreconditionError) as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {_one_line(exc)}", file=sys.stderr)
        return 3
    text = render(env, out, cfg.output_format)
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if out.figure is not None:
            from .plotting import save
            save(out.figure, cfg.figure)
    except OSError as exc:
        print(f"error: cannot write output: {exc.strerror}", file=sys.stderr)
        return 2
    for d in env.diagnostics:
        print(f"note: {d}", file=sys.stderr)
    return 3 if out.failed else 0


def _one_line(exc):
    return " ".join(str(exc).split()) or type(exc).__name__


if __name__ == "__main__":
    sys.exit(main())
