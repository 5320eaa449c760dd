"""Verification gate battery.

Each gate checks one family of claims end to end and returns a structured
result; the command line ``suite`` runs them with one printed line per gate,
and the acceptance test suite asserts on the same functions.  ``fast``
presets cover the analytic fixtures and oracle equivalences in seconds;
``full`` presets run the Monte Carlo battery at its declared scale with
pinned seeds, so a passing battery is reproducible bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .convbounds import sup_ratio_study
from .fields import Grid, TorusField, energy, sobolev_norm_sq_batch
from .flow import evolve_coeffs, volume_probe
from .mcstats import (
    ASpec,
    cov_identity,
    hyper_decay_study,
    hyper_growth,
    lp_growth,
    tail_battery,
    transport_growth,
)
from .sampling import GaussianSpec, SeedPlan, calibrate_r, draw_coeffs_batch, draw_field
from .trilinear import (
    F1,
    F2,
    F3,
    TOTAL,
    f1_batch,
    f2_batch,
    f3_batch,
    f_spectral,
    f_total_fd,
    symbol_by_label,
)
from .wick import decay_curve, fit_loglog_slope, wick_variance

__all__ = ["GateResult", "run_suite", "FULL_GATES", "FAST_GATES"]


@dataclass
class GateResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{mark}] {self.name} ({self.seconds:.1f}s) {keys}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return v


def _timed(fn):
    def wrapper(scale="full"):
        start = time.time()
        result = fn(scale)
        result.seconds = time.time() - start
        return result

    return wrapper


# -- 1: trilinear decomposition identity ----------------------------------------


@_timed
def gate_decomposition(scale="full") -> GateResult:
    """The flow finite difference equals the sum of the three pieces, and the
    physical and spectral evaluators of each piece coincide."""
    if scale == "full":
        s_values, n_values, draws = (1.2, 1.5, 2.0), (16, 32, 64), 12
    else:
        s_values, n_values, draws = (1.2, 2.0), (16, 32), 3
    worst_fd = 0.0
    worst_rel = 0.0
    count = 0
    batched = {"F1": f1_batch, "F2": f2_batch, "F3": f3_batch}
    for s in s_values:
        for n in n_values:
            spec = GaussianSpec(s=s, k_sample=n)
            plan = SeedPlan(0xDEC0 + n)
            grid = Grid.for_extent(n)
            for i in range(draws):
                u = draw_field(spec, plan, i)
                c = u.coeffs[None, :]
                parts = {
                    label: float(fn(c, n, s, grid)[0])
                    for label, fn in batched.items()
                }
                total_phys = sum(parts.values())
                fd = f_total_fd(u, n, s, grid=grid)
                worst_fd = max(
                    worst_fd, abs(fd - total_phys) / (1.0 + abs(total_phys))
                )
                for label, value in parts.items():
                    spectral = f_spectral(u, n, 0, s, symbol_by_label(label))
                    worst_rel = max(
                        worst_rel,
                        abs(value - spectral) / max(1.0, abs(value), abs(spectral)),
                    )
                spectral_total = f_spectral(u, n, 0, s, TOTAL)
                worst_rel = max(
                    worst_rel,
                    abs(total_phys - spectral_total)
                    / max(1.0, abs(total_phys), abs(spectral_total)),
                )
                count += 1
    passed = worst_fd <= 1e-5 and worst_rel <= 1e-9
    return GateResult(
        "trilinear decomposition identity",
        passed,
        {"draws": count, "max_fd_residual": worst_fd, "max_phys_vs_spectral": worst_rel},
    )


# -- 2: flow structure -----------------------------------------------------------


@_timed
def gate_flow_structure(scale="full") -> GateResult:
    """Energy conservation, fourth-order convergence, unit Jacobian and the
    exact single-mode rotation."""
    full = scale == "full"
    details = {}
    ok = True

    # single mode: the quadratic term leaves the retained band, so the flow
    # is an exact rotation
    u0 = TorusField.cosine(1)
    grid1 = Grid.for_extent(1)
    final, _, drift1, _ = evolve_coeffs(u0.coeffs[None, :], 1, 0.01, 1.0, grid1)
    exact = 0.5 * np.exp(-1j * 0.5)
    details["single_mode_error"] = float(abs(final[0, 0] - exact))
    details["single_mode_drift"] = drift1
    ok &= details["single_mode_error"] <= 1e-10 and drift1 <= 1e-13

    # energy drift on an ensemble draw
    n_drift = 64 if full else 32
    spec = GaussianSpec(s=1.5, k_sample=n_drift)
    u = draw_field(spec, SeedPlan(0xF10), 0)
    grid = Grid.for_extent(n_drift)
    _, _, drift, _ = evolve_coeffs(u.coeffs[None, :], n_drift, 0.005, 1.0, grid)
    details["energy_drift"] = drift
    ok &= drift <= 1e-9

    # convergence order against a fine-step reference
    n_ord = 32 if full else 16
    spec = GaussianSpec(s=1.5, k_sample=n_ord)
    u = draw_field(spec, SeedPlan(0xF10 + 1), 0)
    grid = Grid.for_extent(n_ord)
    t_end = 0.5
    ref, _, _, _ = evolve_coeffs(u.coeffs[None, :], n_ord, 0.00125, t_end, grid)
    errs = []
    dts = (0.04, 0.02, 0.01, 0.005) if full else (0.04, 0.02, 0.01)
    for dt in dts:
        out, _, _, _ = evolve_coeffs(u.coeffs[None, :], n_ord, dt, t_end, grid)
        err = np.sqrt(float(sobolev_norm_sq_batch((out - ref), 0.5)[0]))
        errs.append((dt, err))
    slope = fit_loglog_slope(errs)
    details["rk4_order"] = slope
    ok &= 3.7 <= slope <= 4.3

    # unit Jacobian of the truncated flow
    vols = []
    probes = ((8, 1.0), (16, 1.0)) if full else ((8, 0.5),)
    for n_vol, t_vol in probes:
        spec = GaussianSpec(s=1.5, k_sample=n_vol)
        u = draw_field(spec, SeedPlan(0xF10 + 2), 0)
        vols.append(abs(volume_probe(u, n_vol, t_vol, dt=0.005)))
    details["max_logdet"] = max(vols)
    ok &= details["max_logdet"] <= 1e-6

    # a linear-only probe: with one retained mode the nonlinearity is
    # projected away entirely, so the map is linear and the central
    # difference is exact at any step size; a large step avoids
    # cancellation noise
    u1 = TorusField.cosine(1, amplitude=0.8)
    details["linear_logdet"] = abs(volume_probe(u1, 1, 1.0, dt=0.01, fd_step=0.05))
    ok &= details["linear_logdet"] <= 1e-12

    # modes above the truncation keep their modulus exactly
    k_hi, n_hi = 32, 8
    spec = GaussianSpec(s=1.5, k_sample=k_hi)
    u = draw_field(spec, SeedPlan(0xF10 + 3), 0)
    out, _, _, _ = evolve_coeffs(u.coeffs[None, :], n_hi, 0.01, 1.0, Grid.for_extent(k_hi))
    details["high_mode_modulus_drift"] = float(
        np.max(np.abs(np.abs(out[0, n_hi:]) - np.abs(u.coeffs[n_hi:])))
    )
    ok &= details["high_mode_modulus_drift"] <= 1e-14

    return GateResult("flow structure", bool(ok), details)


# -- 3: exact second moments vs Monte Carlo --------------------------------------


@_timed
def gate_wick_mc(scale="full") -> GateResult:
    """Contraction-sum second moments match the sample variance of the
    independently evaluated truncation differences."""
    if scale == "full":
        combos = ((16, 8, 1.0), (32, 16, 1.5), (32, 16, 2.0))
        n_mc = 100_000
    else:
        combos = ((16, 8, 1.0),)
        n_mc = 20_000
    labels = ("F1", "F2", "F3", "TOTAL")
    batched = {"F1": f1_batch, "F2": f2_batch, "F3": f3_batch}
    worst_z = 0.0
    rows = 0
    for n, m, s in combos:
        spec = GaussianSpec(s=s, k_sample=n)
        plan = SeedPlan(0x31C0 + n)
        grid = Grid.for_extent(n)
        diffs = {label: [] for label in labels}
        for i0 in range(0, n_mc, 8192):
            cnt = min(8192, n_mc - i0)
            coeffs = draw_coeffs_batch(spec, plan, i0, cnt)
            per = {}
            for label in ("F1", "F2", "F3"):
                fn = batched[label]
                per[label] = fn(coeffs, n, s, grid) - fn(coeffs, m, s, grid)
            per["TOTAL"] = per["F1"] + per["F2"] + per["F3"]
            for label in labels:
                diffs[label].append(per[label])
        for label in labels:
            sq = np.concatenate(diffs[label]) ** 2
            mc = float(np.mean(sq))
            se = float(np.std(sq) / np.sqrt(sq.size))
            exact = wick_variance(
                symbol_by_label(label), symbol_by_label(label), s, n, m
            ).total
            worst_z = max(worst_z, abs(mc - exact) / max(se, 1e-300))
            rows += 1
    return GateResult(
        "second-moment oracle vs Monte Carlo",
        worst_z <= 5.0,
        {"comparisons": rows, "max_z": worst_z, "samples": n_mc},
    )


# -- 4: truncation decay rates ---------------------------------------------------


def _decay_rate(label: str, s: float) -> float:
    if label == "F3":
        return 0.5
    return s / 2.0 - 0.25 if s <= 1.5 else 0.5


@_timed
def gate_decay_rates(scale="full") -> GateResult:
    """Dyadic log-log slopes of the exact truncation distances beat the
    predicted rates (up to the 0.1 fit margin)."""
    if scale == "full":
        n_max, s_values, fit_lo, fit_hi = 512, (0.8, 1.0, 1.5, 2.0, 3.0), 4, 128
    else:
        n_max, s_values, fit_lo, fit_hi = 128, (1.0, 2.0), 4, 32
    worst_margin = -np.inf
    rows = []
    for s in s_values:
        for symbol in (F1, F2, F3):
            curve = decay_curve(symbol, s, n_max)
            slope = fit_loglog_slope(curve, lo=fit_lo, hi=fit_hi)
            rate = _decay_rate(symbol.label, s)
            margin = slope - (-rate + 0.1)
            worst_margin = max(worst_margin, margin)
            rows.append((symbol.label, s, slope, rate))
    return GateResult(
        "truncation decay rates",
        worst_margin <= 0.0,
        {
            "fits": len(rows),
            "worst_slope_minus_target": worst_margin,
            "n_max": n_max,
        },
    )


# -- 5: lattice convolution envelopes --------------------------------------------


@_timed
def gate_conv_bounds(scale="full") -> GateResult:
    """The envelope constants are finite and stable when the shift range
    doubles."""
    if scale == "full":
        plans = [
            (s, case)
            for s in (0.8, 1.0)
            for case in ("i", "iii", "iv")
        ] + [(2.0, case) for case in ("ii", "iii", "iv")]
        big_m_set = (16, 32, 64, 128, 256, 512)
        m_max = 4096
    else:
        plans = [(1.0, "i"), (1.0, "iv")]
        big_m_set = (16, 64)
        m_max = 512
    worst_growth = 0.0
    all_finite = True
    for s, case in plans:
        study = sup_ratio_study(case, s, big_m_set, m_max)
        all_finite &= np.isfinite(study["sup_ratio_doubled"])
        worst_growth = max(worst_growth, study["relative_growth"])
    return GateResult(
        "lattice convolution envelopes",
        bool(all_finite and worst_growth < 0.05),
        {"studies": len(plans), "max_growth_on_doubling": worst_growth},
    )


# -- 6: restricted-ensemble tails and moment growth ------------------------------


@_timed
def gate_tails(scale="full") -> GateResult:
    """Sub-exponential tail of the norm derivative, super-Gaussian tails of
    the sup-norm and Sobolev statistics, linear moment growth and
    hypercontractive truncation decay."""
    s = 1.5
    if scale == "full":
        n_trunc, n_samples, k_sample = 64, 1_000_000, 1024
        hyper_samples = 300_000
        n_list = (8, 16, 32, 64)
    else:
        n_trunc, n_samples, k_sample = 32, 60_000, 256
        hyper_samples = 40_000
        n_list = (4, 8, 16, 32)
    cal_spec = GaussianSpec(s=s, k_sample=k_sample)
    radius = calibrate_r(cal_spec, 0.5, 2000, SeedPlan(0xCA11B))
    plan = SeedPlan(0x7A115)

    details = {"radius": radius}
    ok = True

    battery = tail_battery(n_trunc, s, radius, n_samples, plan, k_sample=k_sample)
    details["alpha_fn"] = battery["fn"].alpha_fit
    ok &= battery["fn"].alpha_fit >= 0.8

    details["alpha_dx"] = battery["dx"].alpha_fit
    ok &= battery["dx"].alpha_fit >= 0.7 * 2.0 * s

    details["alpha_hs"] = battery["hs"].alpha_fit
    ok &= battery["hs"].alpha_fit >= 0.7 * 4.0 * s / (2.0 * s - 1.0)

    lp = lp_growth(
        n_trunc, s, radius, (2, 3, 4, 5, 6, 7, 8, 9, 10), n_samples, plan,
        k_sample=k_sample, values=battery["fn_values"], accepted=battery["accepted"],
    )
    details["lp_ratio_spread"] = lp["ratio_spread"]
    ok &= lp["ratio_spread"] <= 3.0

    hyper = hyper_growth(n_trunc, n_trunc // 2, s, (2, 3, 4, 6, 8), hyper_samples, plan)
    details["hyper_p_exponent"] = hyper["p_exponent"]
    ok &= hyper["p_exponent"] <= 1.7

    study = hyper_decay_study(s, n_list, hyper_samples, plan)
    details["hyper_dyadic_slope"] = study["slope"]
    ok &= study["slope"] <= -study["upsilon"] + 0.1

    return GateResult("restricted tails and moment growth", bool(ok), details)


# -- 7: change-of-variables identity ---------------------------------------------


@_timed
def gate_cov_identity(scale="full") -> GateResult:
    """Backward-flow membership mass equals the forward weighted integral
    within three joint standard errors, per truncation, time and set."""
    s = 1.5
    if scale == "full":
        n_values, t_values, n_samples = (8, 16), (0.25, 0.5), 100_000
    else:
        n_values, t_values, n_samples = (8,), (0.25,), 20_000
    sets = (
        ASpec(kind="hs_ball", sigma=0.5, radius=1.0),
        ASpec(kind="coeff_box", mode=1, re_lo=0.0, re_hi=0.5),
    )
    cal = calibrate_r(GaussianSpec(s=s, k_sample=128), 0.5, 2000, SeedPlan(0xCA11B))
    worst_z = 0.0
    runs = 0
    for n in n_values:
        for t in t_values:
            for a_spec in sets:
                out = cov_identity(
                    n, s, cal, t, a_spec, n_samples, SeedPlan(0xC0F + n),
                    dt=0.01, k_sample=64,
                )
                worst_z = max(worst_z, out["z"])
                runs += 1
    return GateResult(
        "change-of-variables identity",
        worst_z <= 3.0,
        {"runs": runs, "max_z": worst_z, "samples": n_samples},
    )


# -- 8: transported-mass growth ---------------------------------------------------


@_timed
def gate_transport(scale="full") -> GateResult:
    """The measured mass curve admits a finite two-sided envelope constant;
    the constant itself is reported, not bounded."""
    s = 1.5
    if scale == "full":
        n_samples = 50_000
        t_grid = (0.25, 0.5, 0.75, 1.0)
    else:
        n_samples = 15_000
        t_grid = (0.25, 0.5)
    cal = calibrate_r(GaussianSpec(s=s, k_sample=128), 0.5, 2000, SeedPlan(0xCA11B))
    a_spec = ASpec(kind="hs_ball", sigma=0.5, radius=0.55)
    out = transport_growth(16, s, cal, a_spec, t_grid, n_samples, SeedPlan(0x7347), dt=0.01)
    return GateResult(
        "transported-mass envelope",
        bool(out["envelope_exists"] and out["envelope_c"] >= 1.0),
        {
            "base_mass": out["base_mass"].mean,
            "envelope_c": out["envelope_c"],
            "samples": n_samples,
        },
    )


FULL_GATES = (
    gate_decomposition,
    gate_flow_structure,
    gate_wick_mc,
    gate_decay_rates,
    gate_conv_bounds,
    gate_tails,
    gate_cov_identity,
    gate_transport,
)

# oracle-equivalence and fixture gates only; the Monte Carlo battery needs
# the full scale to be meaningful
FAST_GATES = (
    gate_decomposition,
    gate_flow_structure,
    gate_wick_mc,
    gate_decay_rates,
    gate_conv_bounds,
)


def run_suite(name: str, out=None) -> int:
    if name not in ("fast", "full"):
        raise ValueError(f"unknown suite {name!r}")
    gates = FULL_GATES if name == "full" else FAST_GATES
    results = []
    failed = None
    for gate in gates:
        result = gate(scale=name)
        results.append(result)
        print(result.line())
        if failed is None and not result.passed:
            failed = result
    if out is not None:
        import json
        from . import __version__

        payload = {
            "suite": name,
            "version": __version__,
            "gates": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "details": {k: _fmt(v) for k, v in r.details.items()},
                }
                for r in results
            ],
        }
        with open(out / f"suite_{name}.json", "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
    if failed is not None:
        print(f"first failing gate: {failed.name}")
        return 1
    return 0
