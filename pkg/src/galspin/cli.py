"""Command-line entry point.

    galspin bound --m 1 --lambda 133.537 --two-s 1 --ff sharp --cutoff 1
    galspin phase --lambda 133.537 --kmin 0.01 --kmax 0.9 --nk 50 --norm unitary
    galspin erfit --lambda 133.537
    galspin oracle all
    galspin spinor-check --max-two-s 4

All quantities are in model units with hbar = 1 (default Lambda = m = 1).
lambda > 0 is attractive; observables depend on (lambda, 2s) only through
lambda * 2^{2s}.  ``--config FILE`` reads any flag from a JSON object (keys use
underscores, e.g. ``two_s``); explicit flags win over the file.

Exit status: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import oracle, spinor_algebra, two_body
from .form_factors import Family, FormFactor, norm_sq_integral
from .quadrature import QuadratureConfig, kernel_integral, pv_kernel_integral, zeta_integral
from .spinor_algebra import SpinLabel
from .two_body import IllConditioned, ModelParams, Normalization

SUBCOMMANDS = ("spinor-check", "bound", "phase", "erfit", "oracle", "all")

DEFAULTS = {
    "m": 1.0,
    "two_s": 1,
    "ff": "sharp",
    "cutoff": 1.0,
    "tol": 1e-12,
    "rel_tol": 1e-10,
    "norm": "unitary",
    "kmin": 0.01,
    "kmax": 0.1,
    "nk": 16,
    "unwrap": False,
    "grid_n": 200,
    "qmax": None,
    "k": 0.3,
    "seed": 0,
    "max_two_s": 4,
    "dump_integrals": False,
}
CONFIG_KEYS = set(DEFAULTS) | {"lambda", "target"}
REQUIRES_LAMBDA = {"bound", "phase", "erfit"}
PHASE_COLUMNS = ["k", "delta1_rad", "sin2_delta1", "k3_cot_delta1", "unitarity_residual"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _model_flags(p):
    p.add_argument("--m", type=float, help="particle mass")
    p.add_argument("--lambda", dest="lambda", type=float, help="coupling (> 0 attractive)")
    p.add_argument("--two-s", dest="two_s", type=int, help="twice the spin, >= 1")
    p.add_argument("--ff", choices=[f.value for f in Family], help="form factor family")
    p.add_argument("--cutoff", type=float, help="form factor scale Lambda")
    p.add_argument("--tol", type=float, help="bound-state residual tolerance")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, help="quadrature relative tolerance")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--dump-integrals", dest="dump_integrals", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file supplying any flag")
    common.add_argument("--dump-config", dest="dump_config", help="write the merged config to this path")

    parser = _Parser(prog="galspin", description=__doc__.split("\n\n")[0], argument_default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spinor-check", parents=[common], help="spinor identities as JSON", argument_default=argparse.SUPPRESS)
    p.add_argument("--max-two-s", dest="max_two_s", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("bound", parents=[common], help="bound-state energy", argument_default=argparse.SUPPRESS)
    _model_flags(p)

    p = sub.add_parser("phase", parents=[common], help="P-wave phase shifts as CSV", argument_default=argparse.SUPPRESS)
    _model_flags(p)
    p.add_argument("--kmin", type=float)
    p.add_argument("--kmax", type=float)
    p.add_argument("--nk", type=int)
    p.add_argument("--norm", choices=[n.value for n in Normalization])
    p.add_argument("--unwrap", action="store_const", const=True, help="continuous delta_1 across branch jumps")

    p = sub.add_parser("erfit", parents=[common], help="effective-range parameters", argument_default=argparse.SUPPRESS)
    _model_flags(p)
    p.add_argument("--kmin", type=float)
    p.add_argument("--kmax", type=float)
    p.add_argument("--nk", type=int)

    p = sub.add_parser("oracle", parents=[common], help="brute-force comparisons", argument_default=argparse.SUPPRESS)
    p.add_argument("target", choices=["ls", "grid", "exchange", "all"])
    _model_flags(p)
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--qmax", type=float)
    p.add_argument("--k", type=float, help="on-shell momentum for 'ls'")

    p = sub.add_parser("all", parents=[common], help="every check in one JSON report", argument_default=argparse.SUPPRESS)
    _model_flags(p)
    p.add_argument("--seed", type=int)
    return parser


def merge_config(command: str, ns: dict) -> dict:
    cfg = dict(DEFAULTS)
    path = ns.pop("config", None)
    if path:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key in data:
            if key not in CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
        cfg.update(data)
    cfg.update(ns)
    if command in REQUIRES_LAMBDA and cfg.get("lambda") is None:
        raise UsageError("missing required key 'lambda'")
    return cfg


def _positive(cfg, key):
    v = cfg[key]
    if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
        raise UsageError(f"{key!r} must be a positive number in model units, got {v!r}")


def validate(command: str, cfg: dict) -> None:
    if command == "spinor-check":
        if not 1 <= int(cfg["max_two_s"]) <= spinor_algebra.MAX_TWO_S_BW:
            raise UsageError(f"'max_two_s' must be in [1, {spinor_algebra.MAX_TWO_S_BW}]")
        return
    for key in ("m", "cutoff", "tol", "rel_tol"):
        _positive(cfg, key)
    if int(cfg["two_s"]) < 1:
        raise UsageError("'two_s' must be >= 1 (spin zero is not a symmetric multispinor)")
    if cfg["ff"] not in {f.value for f in Family}:
        raise UsageError(f"unknown form factor {cfg['ff']!r} for key 'ff'")
    if cfg.get("lambda") is not None and not math.isfinite(cfg["lambda"]):
        raise UsageError("'lambda' must be finite")
    if command in ("phase", "erfit"):
        _positive(cfg, "kmin")
        _positive(cfg, "kmax")
        if cfg["kmax"] <= cfg["kmin"]:
            raise UsageError("'kmax' must exceed 'kmin'")
        if int(cfg["nk"]) < (1 if command == "phase" else 3):
            raise UsageError("'nk' too small")
        if cfg["ff"] == "sharp" and cfg["kmax"] >= cfg["cutoff"]:
            raise UsageError("'kmax' must lie below 'cutoff' for the sharp form factor")
        if cfg["norm"] not in {n.value for n in Normalization}:
            raise UsageError(f"unknown normalization {cfg['norm']!r} for key 'norm'")
    if command == "oracle":
        if int(cfg["grid_n"]) < 16:
            raise UsageError("'grid_n' must be >= 16")
        _positive(cfg, "k")


def make_params(cfg: dict) -> ModelParams:
    ff = FormFactor(cfg["ff"], float(cfg["cutoff"]))
    lam = cfg.get("lambda")
    params = ModelParams(
        m=float(cfg["m"]),
        lam=1.0 if lam is None else float(lam),
        spin=SpinLabel(int(cfg["two_s"])),
        ff=ff,
        quad=QuadratureConfig(rel_tol=float(cfg["rel_tol"])),
    )
    if lam is None:
        # 1.5 x the critical coupling of this family
        params = params.with_lambda_eff(1.5 * 3.0 / (params.m * norm_sq_integral(ff)))
    return params


def _json(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        if isinstance(o, complex):
            return {"re": o.real, "im": o.imag}
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return json.dumps(obj, sort_keys=True, indent=2, default=default) + "\n"


def _bound(cfg, params):
    bs = two_body.solve_bound_state(params, tol=float(cfg["tol"]))
    out = {"omega": bs.omega, "kappa": bs.kappa, "residual": bs.residual}
    if cfg["dump_integrals"]:
        out["integrals"] = {
            "kernel": kernel_integral(params.ff, params.m, bs.omega, params.quad).__dict__,
            "zeta": zeta_integral(params.ff, params.m, bs.omega, params.quad).__dict__,
            "norm_sq": norm_sq_integral(params.ff),
            "lambda_eff": params.lambda_eff,
        }
    return out


def _k_grid(cfg):
    return np.linspace(float(cfg["kmin"]), float(cfg["kmax"]), int(cfg["nk"]))


def phase_rows(params, ks, norm, unwrap=False):
    pts = two_body.phase_shift_sweep(params, ks, Normalization(norm), unwrap=unwrap)
    return [[p.k, p.delta1, p.sin2_delta, p.k3_cot_delta, p.unitarity_residual] for p in pts]


def _phase_csv(cfg, params) -> str:
    ks = _k_grid(cfg)
    rows = phase_rows(params, ks, cfg["norm"], bool(cfg["unwrap"]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PHASE_COLUMNS)
    for row in rows:
        w.writerow([f"{v:.17g}" for v in row])
    if cfg["dump_integrals"]:
        diag = [
            {"k": k, "pv_kernel": pv_kernel_integral(params.ff, params.m, k, params.quad).__dict__}
            for k in ks
        ]
        sys.stderr.write(_json(diag))
    return buf.getvalue()


def _erfit(cfg, params):
    fit = two_body.effective_range_fit(params, _k_grid(cfg))
    out = {"inv_a_fit": fit.inv_a, "r0_fit": fit.r0, "fit_residual": fit.fit_residual,
           "inv_a_closed": None, "r0_closed": None}
    try:
        closed = two_body.effective_range_closed_form(params)
        out["inv_a_closed"], out["r0_closed"] = closed.inv_a, closed.r0
    except two_body.NoBoundState:
        pass  # closed forms need a bound state
    if cfg["dump_integrals"]:
        out["covariance"] = fit.covariance
    return out


def _oracle(cfg, params):
    grid = oracle.GridSpec(int(cfg["grid_n"]), cfg["qmax"])
    target = cfg["target"]
    if target == "ls":
        reports = [oracle.ls_phase_shift(params, float(cfg["k"]), grid)]
    elif target == "grid":
        reports = [oracle.grid_bound_state(params, grid)]
    elif target == "exchange":
        reports = [oracle.exchange_selection_rule(params)]
    else:
        reports = oracle.run_all(params.m, params.ff.cutoff, params.spin.two_s)
    return [r.to_dict() for r in reports]


def _all(cfg, params):
    ks = np.linspace(0.01, 0.9, 50) * params.ff.cutoff
    out = {
        "spinor_check": spinor_algebra.check_all(4, int(cfg["seed"])),
        "bound": _bound(cfg, params),
        "phase": [dict(zip(PHASE_COLUMNS, row)) for row in phase_rows(params, ks, "unitary")],
        "oracle": [r.to_dict() for r in oracle.run_all(params.m, params.ff.cutoff, params.spin.two_s)],
    }
    erc = dict(cfg, kmin=0.01 * params.ff.cutoff, kmax=0.1 * params.ff.cutoff, nk=16)
    out["erfit"] = _erfit(erc, params)
    return out


def run(argv=None) -> int:
    try:
        ns = vars(build_parser().parse_args(argv))
        command = ns.pop("command")
        dump_path = ns.pop("dump_config", None)
        cfg = merge_config(command, ns)
        validate(command, cfg)
        if dump_path:
            dumped = {k: v for k, v in cfg.items() if k != "out"}
            with open(dump_path, "w") as fh:
                fh.write(_json(dumped))
        if command == "spinor-check":
            text = _json(spinor_algebra.check_all(int(cfg["max_two_s"]), int(cfg["seed"])))
            status = 0
        else:
            params = make_params(cfg)
            status = 0
            if command == "bound":
                text = _json(_bound(cfg, params))
            elif command == "phase":
                text = _phase_csv(cfg, params)
            elif command == "erfit":
                text = _json(_erfit(cfg, params))
            elif command == "oracle":
                reports = _oracle(cfg, params)
                text = _json(reports if len(reports) > 1 else reports[0])
                status = 0 if all(r["passed"] for r in reports) else 2
            else:
                result = _all(cfg, params)
                text = _json(result)
                status = 0 if all(r["passed"] for r in result["oracle"]) else 2
    except (UsageError, IllConditioned, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"galspin: error: {exc}\n")
        return 1
    except (ArithmeticError, MemoryError, AssertionError) as exc:
        sys.stderr.write(f"galspin: numerical failure: {exc}\n")
        return 2

    out = cfg.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
