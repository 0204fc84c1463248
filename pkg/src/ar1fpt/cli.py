"""Command line surface: config parsing, subcommand orchestration, reports.

Every run writes ``report.json`` (and ``table.csv`` for the tabular
subcommands) into the output directory.  The report separates ``meta``
(version, wall clock) from ``config`` (the fully resolved echo) and
``results``: re-running from the echoed config and seed reproduces the
``results`` subtree byte for byte, independent of FPT_THREADS.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cumulant import LimitCumulant, check_functional_equation
from .errors import Ar1FptError, ConfigError, NoCrossingError
from .innovations import (
    CappedAbove,
    Deterministic,
    FlooredPositive,
    Gaussian,
    InnovationSpec,
    StableSpectrallyNegative,
    TwoPoint,
)
from .montecarlo import simulate_passage
from .passage import (
    PassageProblem,
    exponential_certificate,
    feasibility_report,
    identity_e_tau,
    identity_nodes,
    lower_bound_e_tau,
    upper_bound_e_tau,
)
from .transforms import check_harmonic

_FAMILY_FIELDS = {
    "gaussian": {"m": 0.0, "var": 1.0},
    "deterministic": {"c": None},
    "two_point": {"h_up": None, "h_down": None, "p": None},
    "stable": {"alpha": None, "c_scale": None, "m": 0.0},
    "capped_above": {"cap": None, "base": None},
    "floored_positive": {"floor": None, "base": None},
}

_CONFIG_KEYS = {
    "family",
    "lambda",
    "x",
    "a",
    "seed",
    "n_paths",
    "max_steps",
    "rel_tol",
    "u_grid",
    "delta",
    "cap",
}

_DEFAULTS = {
    "seed": 0,
    "n_paths": 100_000,
    "max_steps": 10**6,
    "rel_tol": 1e-9,
    "u_grid": "0:10:0.5",
    "delta": 0.5,
    "cap": None,
}


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"{path}: {message}")


def _build_family(block, path: str = "family") -> InnovationSpec:
    if not isinstance(block, dict):
        raise _fail(path, "must be an object with a 'name' field")
    block = dict(block)
    name = block.pop("name", None)
    if name not in _FAMILY_FIELDS:
        raise _fail(
            f"{path}.name", f"unknown family {name!r}; one of {sorted(_FAMILY_FIELDS)}"
        )
    fields = _FAMILY_FIELDS[name]
    unknown = set(block) - set(fields)
    if unknown:
        raise _fail(f"{path}.{sorted(unknown)[0]}", "unknown key")
    vals = {}
    for key, default in fields.items():
        if key in block:
            vals[key] = block[key]
        elif default is not None:
            vals[key] = default
        else:
            raise _fail(f"{path}.{key}", "required field missing")
    try:
        if name == "gaussian":
            return Gaussian(float(vals["m"]), float(vals["var"]))
        if name == "deterministic":
            return Deterministic(float(vals["c"]))
        if name == "two_point":
            return TwoPoint(float(vals["h_up"]), float(vals["h_down"]), float(vals["p"]))
        if name == "stable":
            return StableSpectrallyNegative(
                float(vals["alpha"]), float(vals["c_scale"]), float(vals["m"])
            )
        base = _build_family(vals["base"], path=f"{path}.base")
        if name == "capped_above":
            return CappedAbove(base, float(vals["cap"]))
        return FlooredPositive(base, float(vals["floor"]))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise _fail(path, str(exc)) from exc


def parse_config(args: argparse.Namespace) -> dict:
    """Merge config file, CLI flag overrides, and defaults into one dict.

    The result echoes into the report verbatim; flags win over file values.
    """
    raw = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise _fail(sorted(unknown)[0], "unknown key")
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    for flag, key in (
        ("seed", "seed"),
        ("paths", "n_paths"),
        ("max_steps", "max_steps"),
        ("rel_tol", "rel_tol"),
        ("u_grid", "u_grid"),
        ("delta", "delta"),
        ("cap", "cap"),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            cfg[key] = val

    if "family" not in cfg:
        raise _fail("family", "required field missing")
    spec = _build_family(cfg["family"])
    for key in ("lambda", "x", "a"):
        if key not in cfg:
            raise _fail(key, "required field missing")
        try:
            cfg[key] = float(cfg[key])
        except (TypeError, ValueError):
            raise _fail(key, "must be a number")
    if not 0.0 < cfg["lambda"] < 1.0:
        raise _fail("lambda", "violates 0 < lambda < 1")
    if cfg["a"] < cfg["x"]:
        raise _fail("a", "violates a >= x")
    for key in ("seed", "n_paths", "max_steps"):
        try:
            cfg[key] = int(cfg[key])
        except (TypeError, ValueError):
            raise _fail(key, "must be an integer")
    if cfg["n_paths"] <= 0:
        raise _fail("n_paths", "must be positive")
    if cfg["max_steps"] <= 0:
        raise _fail("max_steps", "must be positive")
    cfg["rel_tol"] = float(cfg["rel_tol"])
    cfg["delta"] = float(cfg["delta"])
    if not 0.0 < cfg["delta"] <= 1.0:
        raise _fail("delta", "violates 0 < delta <= 1")
    if cfg["cap"] is not None:
        cfg["cap"] = float(cfg["cap"])
    cfg["_spec"] = spec
    return cfg


def _parse_u_grid(text) -> np.ndarray:
    if isinstance(text, (list, tuple)):
        grid = np.asarray(text, dtype=float)
    else:
        parts = str(text).split(":")
        if len(parts) != 3:
            raise _fail("u_grid", "expected LO:HI:STEP")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise _fail("u_grid", "expected numeric LO:HI:STEP")
        if step <= 0 or hi < lo:
            raise _fail("u_grid", "needs HI >= LO and STEP > 0")
        grid = np.arange(lo, hi + 0.5 * step, step)
    if np.any(grid < 0):
        raise _fail("u_grid", "phi is only defined for u >= 0")
    return grid


def _problem(cfg: dict) -> PassageProblem:
    return PassageProblem(lam=cfg["lambda"], x=cfg["x"], a=cfg["a"], spec=cfg["_spec"])


# ---------------------------------------------------------------------------
# Subcommands.  Each returns (results dict, csv rows or None).
# ---------------------------------------------------------------------------


def _cmd_phi(cfg):
    lc = LimitCumulant(cfg["_spec"], cfg["lambda"])
    grid = _parse_u_grid(cfg["u_grid"])
    rows = [("u", "phi", "abs_err")]
    out = []
    for u in grid:
        val, err = lc.phi(float(u))
        rows.append((float(u), val, err))
        out.append({"u": float(u), "phi": val, "abs_err": err})
    return {"mode": lc.mode, "grid": out}, rows


def _cmd_simulate(cfg):
    p = _problem(cfg)
    summary = simulate_passage(
        p, n_paths=cfg["n_paths"], max_steps=cfg["max_steps"], seed=cfg["seed"]
    )
    return summary.to_dict(), None


def _cmd_bounds(cfg):
    p = _problem(cfg)
    feas = feasibility_report(p)
    if feas.certain_infinite or not feas.crossing_possible:
        raise NoCrossingError(
            "the level is never crossed under this configuration; no bounds exist"
        )
    results = {
        "lower_bound_e_tau": lower_bound_e_tau(p),
        "sup_bound": feas.sup_bound,
        "crossing_mass": feas.crossing_mass,
    }
    h_cap = cfg["cap"]
    if h_cap is None and feas.sup_bound is not None:
        h_cap = feas.sup_bound  # bounded families cap at their own ess-sup
    if h_cap is not None:
        results["h_cap"] = h_cap
        results["upper_bound_e_tau"] = upper_bound_e_tau(p, h_cap=h_cap)
    return results, None


def _cmd_identity_check(cfg):
    p = _problem(cfg)
    lc = p.limit_cumulant()
    nodes = identity_nodes(p, lc)
    summary = simulate_passage(
        p,
        n_paths=cfg["n_paths"],
        max_steps=cfg["max_steps"],
        seed=cfg["seed"],
        mgf_u_nodes=nodes.u,
    )
    value, std_err = identity_e_tau(
        p, summary.mgf_u, summary.mgf_value, summary.mgf_std_err, nodes, lc
    )
    combined = math.hypot(std_err, summary.e_tau_std_err)
    discrepancy = abs(value - summary.e_tau_hat)
    sigmas = discrepancy / combined if combined > 0 else 0.0
    print(f"identity vs Monte Carlo discrepancy: {sigmas:.17g} combined std errs")
    return {
        "identity_value": value,
        "identity_std_err": std_err,
        "mc_e_tau_hat": summary.e_tau_hat,
        "mc_e_tau_std_err": summary.e_tau_std_err,
        "n_censored": summary.n_censored,
        "discrepancy": discrepancy,
        "discrepancy_sigmas": sigmas,
    }, None


def _cmd_certificate(cfg):
    p = _problem(cfg)
    cert = exponential_certificate(p, delta=cfg["delta"], n_cap=cfg["cap"])
    return {
        "v_star": cert.v_star,
        "alpha": cert.alpha,
        "c_bound": cert.c_bound,
        "n_cap_used": cert.n_cap_used,
    }, None


def _cmd_validate(cfg):
    """Desk-scale consistency battery for the configured family."""
    spec, lam = cfg["_spec"], cfg["lambda"]
    lc = LimitCumulant(spec, lam)
    grid = _parse_u_grid(cfg["u_grid"])
    checks = []

    def record(name, value, tol):
        checks.append(
            {"check": name, "value": value, "tolerance": tol, "passed": value < tol}
        )

    record("functional_equation_residual", check_functional_equation(lc, grid), 1e-8)
    if lc.mode != "series":
        series = LimitCumulant(spec, lam, mode="series")
        resid = max(
            abs(lc.phi(float(u))[0] - series.phi(float(u))[0]) for u in grid
        )
        record("series_vs_closed_form", resid, 1e-10)
    y = min(0.0, cfg["x"])
    for kind, v in (("N", 1.0), ("H", None), ("W", -0.1)):
        try:
            resid = check_harmonic(lc, kind, y=y, v=v)
        except Ar1FptError:
            continue
        record(f"harmonic_{kind}_residual", resid, 1e-6)
    rows = [("check", "value", "tolerance", "passed")]
    for c in checks:
        rows.append((c["check"], c["value"], c["tolerance"], c["passed"]))
    return {"checks": checks, "all_passed": all(c["passed"] for c in checks)}, rows


_SUBCOMMANDS = {
    "phi": _cmd_phi,
    "simulate": _cmd_simulate,
    "bounds": _cmd_bounds,
    "identity-check": _cmd_identity_check,
    "certificate": _cmd_certificate,
    "validate": _cmd_validate,
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _write_outputs(out_dir: Path, subcommand, cfg, results, rows, wall_clock):
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
    report = {
        "meta": {
            "tool": "ar1fpt",
            "version": __version__,
            "subcommand": subcommand,
            "wall_clock_sec": wall_clock,
        },
        "config": _jsonable(echo),
        "results": _jsonable(results),
    }
    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    if rows is not None:
        with open(out_dir / "table.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in rows:
                writer.writerow([_fmt(c) for c in row])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ar1fpt",
        description="First passage times of AR(1) sequences: analytics vs Monte Carlo.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=str, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=str, default=".")
        sp.add_argument("--paths", type=int, default=None)
        sp.add_argument("--max-steps", dest="max_steps", type=int, default=None)
        sp.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
        sp.add_argument("--u-grid", dest="u_grid", type=str, default=None)
        sp.add_argument("--delta", type=float, default=None)
        sp.add_argument("--cap", type=float, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args)
        t0 = time.perf_counter()
        results, rows = _SUBCOMMANDS[args.subcommand](cfg)
        wall = time.perf_counter() - t0
        _write_outputs(Path(args.out), args.subcommand, cfg, results, rows, wall)
    except Ar1FptError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
