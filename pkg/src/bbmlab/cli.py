"""Reproducible experiment runner.

Every subcommand writes a CSV table of its curve plus a JSON summary that
embeds the resolved configuration, the master seed and the package version,
so identical configurations produce byte-identical artifacts.  Exit codes:
0 success / gates passed, 1 gate failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .convbounds import case_exponents, sup_ratio_study
from .fields import Grid, TorusField, field_to_json
from .flow import FlowConfig, evolve
from .mcstats import (
    ASpec,
    cov_identity,
    hyper_decay_study,
    hyper_growth,
    lp_growth,
    tail_dx_inf,
    tail_fn,
    tail_hs,
    transport_growth,
)
from .sampling import GaussianSpec, SeedPlan, calibrate_r, draw_field
from .trilinear import (
    f_spectral,
    f_total_fd,
    f1_physical,
    f2_physical,
    f3_physical,
    symbol_by_label,
)
from .wick import decay_curve, wick_variance
from .fields import sobolev_norm_sq, energy

EXIT_OK = 0
EXIT_GATE_FAILURE = 1
EXIT_CONFIG_ERROR = 2


class ConfigInvalid(ValueError):
    pass


def load_config(path: str) -> dict:
    """key = value lines; values parsed as python literals when possible."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            out[key.replace("-", "_")] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            out[key.replace("-", "_")] = value
    return out


def resolve_options(args: argparse.Namespace, defaults: dict) -> dict:
    """Defaults, then config file, then explicit flags (flags win)."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg)
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def out_dir(args) -> Path:
    base = getattr(args, "out", None) or os.environ.get("BBMLAB_OUTDIR") or "out"
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_artifacts(directory: Path, name: str, rows: list, summary: dict):
    """CSV for the curve, JSON for fitted parameters and provenance."""
    if rows:
        csv_path = directory / f"{name}.csv"
        with open(csv_path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    with open(directory / f"{name}.json", "w") as handle:
        json.dump(summary, handle, indent=2, sort_keys=True, default=_jsonable)
        handle.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return vars(obj)
    return str(obj)


def _summary(config: dict, **extra) -> dict:
    return {"config": config, "version": __version__, **extra}


def _resolve_radius(opts, key_r="r", key_q="quantile") -> float:
    """Explicit radius wins; otherwise calibrate from the quantile."""
    if opts.get(key_r) is not None:
        return float(opts[key_r])
    spec = GaussianSpec(s=opts["s"], k_sample=opts["k_sample"])
    plan = SeedPlan(opts["seed"] ^ 0x5EEDCA1B)
    return calibrate_r(spec, float(opts[key_q]), 2000, plan)


def _aspec(opts) -> ASpec:
    if opts["a_kind"] == "hs_ball":
        return ASpec(kind="hs_ball", sigma=float(opts["a_sigma"]),
                     radius=float(opts["a_radius"]))
    if opts["a_kind"] == "coeff_box":
        return ASpec(kind="coeff_box", mode=int(opts["a_mode"]),
                     re_lo=float(opts["a_lo"]), re_hi=float(opts["a_hi"]))
    raise ConfigInvalid(f"unknown set kind {opts['a_kind']!r}")


# -- subcommands ----------------------------------------------------------------


def cmd_sample(args) -> int:
    defaults = dict(s=1.5, k_sample=1 << 14, seed=0, n_samples=10, r=None,
                    quantile=None, jsonl=None)
    opts = resolve_options(args, defaults)
    spec = GaussianSpec(s=opts["s"], k_sample=opts["k_sample"])
    plan = SeedPlan(opts["seed"])
    radius = None
    if opts["r"] is not None or opts["quantile"] is not None:
        radius = _resolve_radius(opts)
    rows = []
    stream = open(opts["jsonl"], "w") if opts["jsonl"] else None
    try:
        for i in range(int(opts["n_samples"])):
            u = draw_field(spec, plan, i)
            e = energy(u)
            rows.append({
                "index": i,
                "energy": e,
                "accepted": int(e <= radius) if radius is not None else "",
            })
            if stream is not None:
                stream.write(field_to_json(u) + "\n")
    finally:
        if stream is not None:
            stream.close()
    write_artifacts(out_dir(args), "sample", rows,
                    _summary(opts, radius=radius))
    return EXIT_OK


def cmd_flow(args) -> int:
    defaults = dict(n=16, dt=0.005, t_end=1.0, seed=0, s=1.5, k_sample=256,
                    snapshots=8, s_list=(0.5, 1.0, 1.5), fixture=None)
    opts = resolve_options(args, defaults)
    if opts["fixture"] == "cosine":
        u0 = TorusField.cosine(1)
    else:
        spec = GaussianSpec(s=opts["s"], k_sample=opts["k_sample"])
        u0 = draw_field(spec, SeedPlan(opts["seed"]), 0)
    cfg = FlowConfig(n=int(opts["n"]), dt=float(opts["dt"]),
                     t_end=float(opts["t_end"]), snapshots=int(opts["snapshots"]))
    result = evolve(u0, cfg)
    s_list = [float(v) for v in opts["s_list"]]
    rows = []
    for t, u in [(0.0, u0)] + result.snapshots:
        row = {"t": t, "energy": energy(u)}
        for s_val in s_list:
            row[f"hs_{s_val}"] = float(np.sqrt(sobolev_norm_sq(u, s_val)))
        rows.append(row)
    write_artifacts(out_dir(args), "flow", rows,
                    _summary(opts, max_drift=result.max_drift, steps=result.steps))
    return EXIT_OK


def cmd_fn(args) -> int:
    defaults = dict(n=32, m=0, s=1.5, term="total", mode="physical", seed=0,
                    draws=16, k_sample=None)
    opts = resolve_options(args, defaults)
    n, m = int(opts["n"]), int(opts["m"])
    s = float(opts["s"])
    k_sample = int(opts["k_sample"]) if opts["k_sample"] else n
    spec = GaussianSpec(s=s, k_sample=k_sample)
    plan = SeedPlan(opts["seed"])
    grid = Grid.for_extent(max(n, k_sample))
    symbol = symbol_by_label(opts["term"])
    physical = {"F1": f1_physical, "F2": f2_physical, "F3": f3_physical}
    rows = []
    for i in range(int(opts["draws"])):
        u = draw_field(spec, plan, i)
        if opts["mode"] == "spectral":
            value = f_spectral(u, n, m, s, symbol)
        elif opts["mode"] == "fd":
            if symbol.label != "TOTAL":
                raise ConfigInvalid("the flow finite difference evaluates the total only")
            value = f_total_fd(u, n, s, grid=grid)
        elif opts["mode"] == "physical":
            if m != 0:
                raise ConfigInvalid("physical evaluators compute full functionals; use m=0")
            if symbol.label == "TOTAL":
                value = (physical["F1"](u, n, s, grid) + physical["F2"](u, n, s, grid)
                         + physical["F3"](u, n, s, grid))
            else:
                value = physical[symbol.label](u, n, s, grid)
        else:
            raise ConfigInvalid(f"unknown mode {opts['mode']!r}")
        rows.append({"draw_index": i, "value": value})
    write_artifacts(out_dir(args), "fn", rows, _summary(opts))
    return EXIT_OK


def cmd_wick(args) -> int:
    defaults = dict(term="F1", s=1.0, n=64, m=None, mc_check=0, seed=0,
                    decay=False)
    opts = resolve_options(args, defaults)
    symbol = symbol_by_label(opts["term"])
    s, n = float(opts["s"]), int(opts["n"])
    rows = []
    if opts["decay"] or opts["m"] is None:
        curve = decay_curve(symbol, s, n)
        pairs = [(m, v) for m, v in curve]
    else:
        m = int(opts["m"])
        pairs = [(m, float(np.sqrt(max(wick_variance(symbol, symbol, s, n, m).total, 0.0))))]
    mc_n = int(opts["mc_check"])
    for m, exact_l2 in pairs:
        row = {"M": m, "exact_l2": exact_l2, "mc_l2": "", "mc_stderr": ""}
        if mc_n > 0:
            from .sampling import draw_coeffs_batch
            from .trilinear import f_total_derivative_batch, f1_batch, f2_batch, f3_batch

            spec = GaussianSpec(s=s, k_sample=n)
            plan = SeedPlan(opts["seed"])
            grid = Grid.for_extent(n)
            per_term = {"F1": f1_batch, "F2": f2_batch, "F3": f3_batch}
            sq = []
            for i0 in range(0, mc_n, 8192):
                cnt = min(8192, mc_n - i0)
                coeffs = draw_coeffs_batch(spec, plan, i0, cnt)
                if symbol.label == "TOTAL":
                    d = (f_total_derivative_batch(coeffs, n, s, grid)
                         - f_total_derivative_batch(coeffs, m, s, grid)) if m else \
                        f_total_derivative_batch(coeffs, n, s, grid)
                else:
                    fn = per_term[symbol.label]
                    d = fn(coeffs, n, s, grid) - (fn(coeffs, m, s, grid) if m else 0.0)
                sq.append(d**2)
            sq = np.concatenate(sq)
            row["mc_l2"] = float(np.sqrt(np.mean(sq)))
            row["mc_stderr"] = float(np.std(sq) / np.sqrt(mc_n) / (2 * max(row["mc_l2"], 1e-30)))
        rows.append(row)
    write_artifacts(out_dir(args), "wick", rows, _summary(opts))
    return EXIT_OK


def cmd_convbounds(args) -> int:
    defaults = dict(case="i", s=1.0, x=None, y=None, m_range=4096,
                    big_m_set=(16, 32, 64, 128, 256, 512), seed=0)
    opts = resolve_options(args, defaults)
    case = str(opts["case"])
    if opts["x"] is not None and opts["y"] is not None:
        x, y = float(opts["x"]), float(opts["y"])
    else:
        x, y = case_exponents(case, float(opts["s"]))
    study = sup_ratio_study(case, float(opts["s"]), opts["big_m_set"],
                            int(opts["m_range"]))
    rows = [{"case": case, "M": m, "sup_ratio": v}
            for m, v in sorted(study["per_truncation"].items())]
    write_artifacts(out_dir(args), "convbounds", rows, _summary(opts, **study))
    return EXIT_OK


def cmd_tails(args) -> int:
    defaults = dict(which="fn", n=64, s=1.5, r=None, quantile=0.5, kappa=1.0,
                    n_samples=100000, seed=0, k_sample=1024)
    opts = resolve_options(args, defaults)
    radius = _resolve_radius(opts)
    plan = SeedPlan(opts["seed"])
    common = (int(opts["n"]), float(opts["s"]), radius)
    if opts["which"] == "fn":
        curve = tail_fn(*common, int(opts["n_samples"]), plan,
                        k_sample=int(opts["k_sample"]))
        predicted = 1.0
    elif opts["which"] == "dxinf":
        curve = tail_dx_inf(*common, float(opts["kappa"]), int(opts["n_samples"]),
                            plan, k_sample=int(opts["k_sample"]))
        predicted = 2.0 * float(opts["s"]) * float(opts["kappa"])
    elif opts["which"] == "hs":
        curve = tail_hs(*common, float(opts["kappa"]), int(opts["n_samples"]),
                        plan, k_sample=int(opts["k_sample"]))
        s = float(opts["s"])
        predicted = 4.0 * float(opts["kappa"]) * s / (2.0 * s - 1.0)
    else:
        raise ConfigInvalid(f"unknown tail statistic {opts['which']!r}")
    rows = [
        {"quantity": f"tail_{opts['which']}", "threshold": t, "survival": sv,
         "stderr": se, "exceedances": int(e), "n": curve.n,
         "seed": opts["seed"]}
        for t, sv, se, e in zip(curve.thresholds, curve.survival, curve.stderr,
                                curve.exceedances)
    ]
    write_artifacts(out_dir(args), f"tails_{opts['which']}", rows, _summary(
        opts, radius=radius, alpha_fit=curve.alpha_fit, rate_fit=curve.rate_fit,
        c_fit=curve.c_fit, predicted_alpha=predicted,
        acceptance_mass=curve.acceptance_mass, fit_bins=curve.fit_bins))
    return EXIT_OK


def cmd_lp(args) -> int:
    defaults = dict(n=64, s=1.5, r=None, quantile=0.5,
                    p_grid=(2, 3, 4, 5, 6, 7, 8, 9, 10), n_samples=100000,
                    seed=0, k_sample=1024)
    opts = resolve_options(args, defaults)
    radius = _resolve_radius(opts)
    result = lp_growth(int(opts["n"]), float(opts["s"]), radius,
                       opts["p_grid"], int(opts["n_samples"]),
                       SeedPlan(opts["seed"]), k_sample=int(opts["k_sample"]))
    rows = [{"quantity": "lp_norm", **row, "n": opts["n_samples"],
             "seed": opts["seed"]} for row in result["table"]]
    write_artifacts(out_dir(args), "lp", rows, _summary(
        opts, radius=radius, ratio_spread=result["ratio_spread"],
        max_lp_over_p=result["max_lp_over_p"],
        bootstrap_cv_top=result["bootstrap_cv_top"]))
    return EXIT_OK


def cmd_hyper(args) -> int:
    defaults = dict(n=64, m=32, s=1.5, p_grid=(2, 3, 4, 6, 8),
                    n_samples=100000, seed=0, dyadic=False,
                    n_list=(8, 16, 32, 64))
    opts = resolve_options(args, defaults)
    plan = SeedPlan(opts["seed"])
    result = hyper_growth(int(opts["n"]), int(opts["m"]), float(opts["s"]),
                          opts["p_grid"], int(opts["n_samples"]), plan)
    summary = _summary(opts, p_exponent=result["p_exponent"],
                       l2_mean=result["l2"].mean, l2_stderr=result["l2"].stderr)
    if opts["dyadic"]:
        study = hyper_decay_study(float(opts["s"]),
                                  [int(v) for v in opts["n_list"]],
                                  int(opts["n_samples"]), plan)
        summary["dyadic_slope"] = study["slope"]
        summary["upsilon"] = study["upsilon"]
    rows = [{"quantity": "hyper_lp", **row, "n": opts["n_samples"],
             "seed": opts["seed"]} for row in result["table"]]
    write_artifacts(out_dir(args), "hyper", rows, summary)
    return EXIT_OK


def cmd_cov(args) -> int:
    defaults = dict(n=16, s=1.5, r=None, quantile=0.5, t=0.5,
                    n_samples=30000, seed=0, k_sample=128, dt=0.01,
                    a_kind="hs_ball", a_sigma=0.5, a_radius=1.0, a_mode=1,
                    a_lo=0.0, a_hi=0.5)
    opts = resolve_options(args, defaults)
    radius = _resolve_radius(opts)
    result = cov_identity(int(opts["n"]), float(opts["s"]), radius,
                          float(opts["t"]), _aspec(opts),
                          int(opts["n_samples"]), SeedPlan(opts["seed"]),
                          dt=float(opts["dt"]), k_sample=int(opts["k_sample"]))
    rows = [
        {"quantity": "transported_mass", "estimate": result["lhs"].mean,
         "stderr": result["lhs"].stderr, "n": result["lhs"].n,
         "seed": opts["seed"]},
        {"quantity": "weighted_integral", "estimate": result["rhs"].mean,
         "stderr": result["rhs"].stderr, "n": result["rhs"].n,
         "seed": opts["seed"]},
    ]
    write_artifacts(out_dir(args), "cov", rows, _summary(
        opts, radius=radius, z=result["z"], joint_stderr=result["joint_stderr"],
        flow_drift=result["flow_drift"], set=result["set"]))
    return EXIT_OK


def cmd_transport(args) -> int:
    defaults = dict(n=16, s=1.5, r=None, quantile=0.5,
                    t_grid=(0.25, 0.5, 0.75, 1.0), n_samples=50000, seed=0,
                    k_sample=128, dt=0.01, a_kind="hs_ball", a_sigma=0.5,
                    a_radius=0.55, a_mode=1, a_lo=0.0, a_hi=0.1)
    opts = resolve_options(args, defaults)
    radius = _resolve_radius(opts)
    result = transport_growth(int(opts["n"]), float(opts["s"]), radius,
                              _aspec(opts), opts["t_grid"],
                              int(opts["n_samples"]), SeedPlan(opts["seed"]),
                              dt=float(opts["dt"]), k_sample=int(opts["k_sample"]))
    rows = [{"quantity": "transported_mass", "t": row["t"],
             "estimate": row["mass"], "stderr": row["stderr"],
             "n": opts["n_samples"], "seed": opts["seed"]}
            for row in result["rows"]]
    write_artifacts(out_dir(args), "transport", rows, _summary(
        opts, radius=radius, envelope_c=result["envelope_c"],
        envelope_exists=result["envelope_exists"],
        total_mass=result["total_mass"], set=result["set"]))
    return EXIT_OK


def cmd_suite(args) -> int:
    from .gates import run_suite

    return run_suite(args.name, out=out_dir(args))


# -- parser ---------------------------------------------------------------------


def _add_common(parser):
    parser.add_argument("--config", help="key = value file; flags override")
    parser.add_argument("--out", help="output directory (default $BBMLAB_OUTDIR or ./out)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap for worker threads (recorded; numpy decides)")


def _float_list(text):
    return tuple(float(v) for v in text.split(","))


def _int_list(text):
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbmlab",
        description="Spectral flow, Gaussian ensembles and their statistics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw ensemble fields")
    _add_common(p)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--k-sample", dest="k_sample", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--quantile", type=float)
    p.add_argument("--jsonl", help="stream fields to this JSON-lines file")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("flow", help="integrate the truncated flow")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--snapshots", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--s-list", dest="s_list", type=_float_list)
    p.add_argument("--fixture", choices=["cosine"])
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("fn", help="evaluate the norm-derivative pieces")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--term", choices=["1", "2", "3", "total", "F1", "F2", "F3", "TOTAL"])
    p.add_argument("--mode", choices=["physical", "spectral", "fd"])
    p.add_argument("--draws", type=int)
    p.set_defaults(func=cmd_fn)

    p = sub.add_parser("wick", help="exact second moments and decay curves")
    _add_common(p)
    p.add_argument("--term", choices=["1", "2", "3", "total", "F1", "F2", "F3", "TOTAL"])
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--mc-check", dest="mc_check", type=int)
    p.add_argument("--decay", action="store_true", default=None)
    p.set_defaults(func=cmd_wick)

    p = sub.add_parser("convbounds", help="lattice convolution envelopes")
    _add_common(p)
    p.add_argument("--case", choices=["i", "ii", "iii", "iv", "classical"])
    p.add_argument("--s", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--m-range", dest="m_range", type=int)
    p.add_argument("--big-m-set", dest="big_m_set", type=_int_list)
    p.set_defaults(func=cmd_convbounds)

    p = sub.add_parser("tails", help="restricted-ensemble tail curves")
    _add_common(p)
    p.add_argument("--which", choices=["fn", "dxinf", "hs"])
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--quantile", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--k-sample", dest="k_sample", type=int)
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("lp", help="moment growth of the norm derivative")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--quantile", type=float)
    p.add_argument("--p-grid", dest="p_grid", type=_float_list)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--k-sample", dest="k_sample", type=int)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("hyper", help="truncation-difference moment decay")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p-grid", dest="p_grid", type=_float_list)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--dyadic", action="store_true", default=None)
    p.add_argument("--n-list", dest="n_list", type=_int_list)
    p.set_defaults(func=cmd_hyper)

    p = sub.add_parser("cov", help="change-of-variables identity, both sides")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--quantile", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--k-sample", dest="k_sample", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--a-kind", dest="a_kind", choices=["hs_ball", "coeff_box"])
    p.add_argument("--a-sigma", dest="a_sigma", type=float)
    p.add_argument("--a-radius", dest="a_radius", type=float)
    p.add_argument("--a-mode", dest="a_mode", type=int)
    p.add_argument("--a-lo", dest="a_lo", type=float)
    p.add_argument("--a-hi", dest="a_hi", type=float)
    p.set_defaults(func=cmd_cov)

    p = sub.add_parser("transport", help="transported-mass growth envelope")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--quantile", type=float)
    p.add_argument("--t-grid", dest="t_grid", type=_float_list)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--k-sample", dest="k_sample", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--a-kind", dest="a_kind", choices=["hs_ball", "coeff_box"])
    p.add_argument("--a-sigma", dest="a_sigma", type=float)
    p.add_argument("--a-radius", dest="a_radius", type=float)
    p.add_argument("--a-mode", dest="a_mode", type=int)
    p.add_argument("--a-lo", dest="a_lo", type=float)
    p.add_argument("--a-hi", dest="a_hi", type=float)
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("suite", help="run the verification gate battery")
    _add_common(p)
    p.add_argument("name", choices=["fast", "full"])
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
