"""Batch command-line front end: params, selftest, toy, solve, thermo.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure, 3 I/O.
"""
import argparse
import copy
import hashlib
import io
import json
import math
import sys
from typing import NamedTuple

import jsonschema
import numpy as np

from . import kernels
from . import thermo as th
from .errors import ConvergenceError, DomainError, ModsgError, ValidationError
from .model import make_model
from .modular import make_modular_params
from .selftest import run_selftest
from .spectral import solve_bae
from .toy import toy_report

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

_num_list = {"type": "array", "items": {"type": "number"}}
_atoms = {"type": "object", "required": ["positions", "weights"], "additionalProperties": False,
          "properties": {"positions": _num_list, "weights": _num_list}}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["theta"],
    "additionalProperties": False,
    "properties": {
        "theta": {"type": "number"},
        "model": {
            "type": "object", "required": ["alpha"], "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 1},
                "alpha": _num_list, "beta": _num_list,
                "tau": {"type": "number"}, "mu": {"type": "number"},
                "symmetric": {"type": "boolean"},
                "xi_mode": {"enum": ["free", "parity"]},
            },
        },
        "bootstrap": {"type": "object", "additionalProperties": False,
                      "properties": {"order": {"type": "integer", "minimum": 0},
                                     "tol": {"type": "number", "exclusiveMinimum": 0}}},
        "solver": {"type": "object", "additionalProperties": False,
                   "properties": {"max_iter": {"type": "integer", "minimum": 1},
                                  "tol": {"type": "number", "exclusiveMinimum": 0},
                                  "seed": {"enum": ["quantile", "explicit"]},
                                  "roots": _num_list}},
        "selftest": {"type": "object", "additionalProperties": False,
                     "properties": {"tol": {"type": "number", "exclusiveMinimum": 0},
                                    "tol_quadrature": {"type": "number", "exclusiveMinimum": 0},
                                    "points": {"type": "integer", "minimum": 1},
                                    "seed": {"type": "integer", "minimum": 0},
                                    "thetas": _num_list}},
        "thermo": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "density": {"type": "object", "required": ["kind"], "properties": {
                    "kind": {"enum": ["homogeneous", "atoms", "gaussian"]},
                    "mu": {"type": "number"},
                    "A": _atoms, "B": _atoms,
                    "sd_A": {"type": "number", "exclusiveMinimum": 0},
                    "sd_B": {"type": "number", "exclusiveMinimum": 0}}},
                "grid": {"type": "object", "required": ["min", "max", "step"],
                         "additionalProperties": False,
                         "properties": {"min": {"type": "number"}, "max": {"type": "number"},
                                        "step": {"type": "number", "exclusiveMinimum": 0}}},
                "functions": {"type": "array", "items": {"enum": list(th.PROFILE_FUNCTIONS)}},
            },
        },
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"path": {"type": ["string", "null"]},
                                  "format": {"enum": ["json", "csv"]}}},
    },
}

DEFAULTS = {
    "bootstrap": {"order": 3, "tol": 1e-9},
    "solver": {"max_iter": 30, "tol": 1e-10, "seed": "quantile", "roots": []},
    "selftest": {"tol": 1e-9, "tol_quadrature": 1e-7, "points": 20, "seed": 0,
                 "thetas": [math.pi / 4, math.pi / 3, 0.5]},
    "thermo": {"density": {"kind": "homogeneous", "mu": 0.1},
               "grid": {"min": -3.0, "max": 3.0, "step": 0.1},
               "functions": list(th.PROFILE_FUNCTIONS)},
    "output": {"path": None, "format": "json"},
}


class CliResult(NamedTuple):
    code: int
    text: str
    is_error: bool = False


# configuration

def parse_grid(text):
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ValidationError(f"--grid expects min:max:step, got {text!r}") from None
    return {"min": lo, "max": hi, "step": step}


def grid_points(grid):
    lo, hi, step = grid["min"], grid["max"], grid["step"]
    if step <= 0 or hi < lo:
        raise ValidationError("grid needs step > 0 and max >= min")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def resolve_config(raw, args=None):
    """Schema-validate, fill every default explicitly and apply flag overrides."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config: {exc.message}") from None
    cfg = copy.deepcopy(raw)
    for key, default in DEFAULTS.items():
        section = cfg.setdefault(key, {})
        for k, v in default.items():
            section.setdefault(k, copy.deepcopy(v))
    if "model" in cfg:
        m = cfg["model"]
        alpha = m["alpha"]
        if "N" in m and m["N"] != len(alpha):
            raise ValidationError("model.N does not match len(alpha)")
        m["N"] = len(alpha)
        m.setdefault("symmetric", "beta" not in m)
        m.setdefault("beta", [-a for a in alpha])
        m.setdefault("tau", -0.3)
        m.setdefault("mu", float(np.mean(alpha)) if alpha else 0.0)
        m.setdefault("xi_mode", "parity" if m["symmetric"] else "free")
    if args is not None:
        if args.order is not None:
            cfg["bootstrap"]["order"] = args.order
        if args.tol is not None:
            cfg["bootstrap"]["tol"] = args.tol
            cfg["solver"]["tol"] = args.tol
            cfg["selftest"]["tol"] = args.tol
            cfg["selftest"]["tol_quadrature"] = args.tol
        if args.grid is not None:
            cfg["thermo"]["grid"] = parse_grid(args.grid)
        if args.format is not None:
            cfg["output"]["format"] = args.format
        if args.out is not None:
            cfg["output"]["path"] = args.out
    return cfg


def config_hash(cfg):
    body = {k: v for k, v in cfg.items() if k != "output"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _params(cfg):
    return make_modular_params(cfg["theta"])


def _spec(cfg, params):
    if "model" not in cfg:
        raise ValidationError("this command needs a 'model' section")
    m = cfg["model"]
    return make_model(params, m["alpha"], m["beta"], tau=m["tau"], mu=m["mu"],
                      symmetric=m["symmetric"], xi_mode=m["xi_mode"])


def _density(cfg):
    d = cfg["thermo"]["density"]
    kind = d["kind"]
    if kind == "homogeneous":
        return th.homogeneous_model(d.get("mu", 0.0))
    if kind == "atoms":
        if "A" not in d or "B" not in d:
            raise ValidationError("atom density needs A and B")
        return th.atom_model(d["A"]["positions"], d["A"]["weights"],
                             d["B"]["positions"], d["B"]["weights"])
    for k in ("mu", "sd_A", "sd_B"):
        if k not in d:
            raise ValidationError(f"gaussian density needs {k}")
    return th.gaussian_model(d["mu"], d["sd_A"], d["sd_B"])


# commands; each returns (report dict, csv header, csv rows)

def _check_bootstrap(state, tol):
    worst = max(state.residuals, default=0.0)
    if worst > tol:
        raise ConvergenceError(f"bootstrap residual {worst:.2e} exceeds tol {tol:.1e}")
    return worst


def cmd_params(cfg):
    p = _params(cfg)
    rep = {"params": p.as_dict(),
           "star_involution_exact": p.star().star() == p,
           "q_minus_conj_qstar": abs(p.q - np.conj(p.qstar))}
    if "model" in cfg:
        spec = _spec(cfg, p)
        rep["model"] = spec.as_dict()
        rep["t2_modulus"] = abs(spec.t) ** 2
    rows = [[k, v] for k, v in _flatten(rep)]
    return rep, ["key", "value"], rows


def cmd_selftest(cfg):
    s = cfg["selftest"]
    rep = run_selftest(thetas=s["thetas"], n_points=s["points"], seed=s["seed"],
                       tol_product=s["tol"], tol_quadrature=s["tol_quadrature"])
    rows = [[c["theta"], c["identity"], c["form"], c["residual"], c["tol"], int(c["pass"])]
            for c in rep["checks"]]
    return rep, ["theta", "identity", "form", "residual", "tol", "pass"], rows


def cmd_toy(cfg):
    p = _params(cfg)
    spec = _spec(cfg, p)
    if spec.N != 1:
        raise ValidationError("toy command needs N = 1")
    M = cfg["bootstrap"]["order"]
    r = toy_report(spec, M)
    _check_bootstrap(r["state"], cfg["bootstrap"]["tol"])
    rep = {k: v for k, v in r.items() if k != "state"}
    rows = [[c["m"], c["k"], c["bootstrap"].real, c["bootstrap"].imag, c["closed"].real,
             c["closed"].imag, c["abs_err"]] for c in r["coefficients"]]
    header = ["m", "k", "bootstrap_re", "bootstrap_im", "closed_re", "closed_im", "abs_err"]
    return rep, header, rows


def cmd_solve(cfg):
    p = _params(cfg)
    spec = _spec(cfg, p)
    s = cfg["solver"]
    M = cfg["bootstrap"]["order"]
    if s["seed"] == "explicit":
        if len(s["roots"]) != spec.N:
            raise ValidationError(f"explicit seed needs {spec.N} roots")
        seed = np.array(s["roots"], dtype=float)
    else:
        seed = th.quantile_seeds(spec)
    st = solve_bae(spec, seed, M, tol=s["tol"], max_iter=s["max_iter"])
    _check_bootstrap(st.context.primal, cfg["bootstrap"]["tol"])
    _check_bootstrap(st.context.dual, cfg["bootstrap"]["tol"])
    rep = st.to_json()
    rep["seed_roots"] = [float(v) for v in seed]
    rep["truncation_bound"] = abs(spec.t) ** (2 * (M + 1))
    rows = [[k, x, st.ratios[k].real, st.ratios[k].imag] for k, x in enumerate(st.roots)]
    return rep, ["index", "x", "ratio_re", "ratio_im"], rows


def cmd_thermo(cfg):
    p = _params(cfg)
    model = _density(cfg)
    t = cfg["thermo"]
    xs = grid_points(t["grid"])
    funcs = t["functions"]
    cols = {f: th.profile(f, xs, model, p) for f in funcs}
    header = ["x"] + [f"{f}_{part}" for f in funcs for part in ("re", "im")]
    rows = [[x] + [v for f in funcs for v in (cols[f][i].real, cols[f][i].imag)]
            for i, x in enumerate(xs)]
    m0, _, m2 = th.density_moments(model, p)
    rep = {"density": model.as_dict(), "grid": xs.tolist(),
           "profiles": {f: cols[f].tolist() for f in funcs},
           "norm_P": m0, "S_P": m2, "S_P_expected": p.eta ** 2 + (model.S_A + model.S_B) / 2}
    return rep, header, rows


COMMANDS = {"params": cmd_params, "selftest": cmd_selftest, "toy": cmd_toy,
            "solve": cmd_solve, "thermo": cmd_thermo}


# formatting

def _fmt(v):
    return "%.12g" % v


def _clean(obj):
    """Round floats to 12 significant digits; complex -> [re, im]."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        v = float(_fmt(float(obj)))
        return 0.0 if v == 0 else v
    return obj


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, complex):
            yield key + ".re", v.real
            yield key + ".im", v.imag
        else:
            yield key, v


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating, int, np.integer)) and not isinstance(v, bool):
        return _fmt(v) if isinstance(v, (float, np.floating)) else str(int(v))
    return str(v)


def render(command, cfg, report, header, rows):
    fmt = cfg["output"]["format"]
    meta = {"command": command, "config_hash": config_hash(cfg),
            "order": cfg["bootstrap"]["order"], "backend": kernels.backend_name()}
    if fmt == "json":
        doc = {**meta, "config": cfg, "result": report}
        return json.dumps(_clean(doc), indent=2) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}={v}\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_cell(v) for v in r) + "\n")
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation code, not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="modsg", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON configuration file")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--format", choices=["json", "csv"])
    ap.add_argument("--tol", type=float, help="override tolerances")
    ap.add_argument("--order", type=int, help="override truncation order M")
    ap.add_argument("--grid", help="thermo grid override min:max:step (use --grid=-3:3:0.1 for negative min)")
    return ap


def run(argv=None):
    """Execute one command; returns (exit code, output text or error message, is_error)."""
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        return CliResult(EXIT_IO, f"cannot read config: {exc}", True)
    except json.JSONDecodeError as exc:
        return CliResult(EXIT_VALIDATION, f"config is not valid JSON: {exc}", True)
    try:
        cfg = resolve_config(raw, args)
        report, header, rows = COMMANDS[args.command](cfg)
        text = render(args.command, cfg, report, header, rows)
    except (ValidationError, DomainError) as exc:
        return CliResult(EXIT_VALIDATION, f"validation error: {exc}", True)
    except ModsgError as exc:
        return CliResult(EXIT_NUMERICAL, f"numerical error ({type(exc).__name__}): {exc}", True)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        return CliResult(EXIT_NUMERICAL, f"numerical error: {exc}", True)
    code = EXIT_OK
    if args.command == "selftest" and not report["passed"]:
        code = EXIT_NUMERICAL
    path = cfg["output"]["path"]
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            return CliResult(EXIT_IO, f"cannot write output: {exc}", True)
        return CliResult(code, "")
    return CliResult(code, text)


def main(argv=None):
    code, text, is_error = run(argv)
    stream = sys.stderr if is_error else sys.stdout
    if text:
        stream.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
