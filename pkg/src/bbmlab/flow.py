"""Spectrally truncated flow of the critical-dispersion BBM-type equation.

Per mode the truncated equation reads, for |n| <= N,

    d/dt u_hat(n) = -(i n / (1 + |n|)) * (u_hat(n) + B_hat(n)),

with B the band-N projection of the square of the band-N part of u, while
modes above N rotate exactly with phase exp(-i n t / (1 + |n|)).  The
integrator factors that linear phase out exactly and applies classical RK4 to
the nonlinear remainder, so the conserved energy drifts only through the
nonlinear step error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import (
    Grid,
    GridTooSmall,
    TorusField,
    energy_batch,
    grid_values,
    linf_norm,
    sobolev_norm_sq,
    x_derivative,
)

__all__ = [
    "StepSizeInvalid",
    "EnergyDriftExceeded",
    "IllConditioned",
    "FlowConfig",
    "FlowResult",
    "default_dt",
    "vector_field",
    "evolve",
    "evolve_coeffs",
    "conservation_report",
    "volume_probe",
]


class StepSizeInvalid(ValueError):
    pass


class EnergyDriftExceeded(RuntimeError):
    """Relative energy drift crossed the configured tolerance."""


class IllConditioned(RuntimeError):
    """Finite-difference Jacobian is numerically rank deficient."""


@dataclass(frozen=True)
class FlowConfig:
    """Truncation level, step size and integration horizon.

    ``tol_energy`` is a relative drift budget per unit time; integration
    refuses to report success when the measured drift exceeds it.
    """

    n: int
    dt: float
    t_end: float
    tol_energy: float = 1e-9
    snapshots: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("truncation must be >= 1")
        if not self.dt > 0.0 or not np.isfinite(self.dt):
            raise StepSizeInvalid(f"dt must be positive and finite, got {self.dt}")
        if self.snapshots < 0:
            raise ValueError("snapshot count must be >= 0")


@dataclass
class FlowResult:
    final: TorusField
    snapshots: list = field(default_factory=list)  # (t, TorusField) pairs
    max_drift: float = 0.0
    steps: int = 0


def default_dt(u0: TorusField, n: int, grid: Grid | None = None) -> float:
    """Transport-strength heuristic: min(0.01, 1/(4 max(1, sup|d_x P_N u0|)))."""
    from .fields import project

    pn = project(u0, n)
    if not np.any(pn.coeffs):
        return 0.01
    g = grid if grid is not None else Grid.for_extent(n)
    sup = linf_norm(x_derivative(pn), g)
    return min(0.01, 1.0 / (4.0 * max(1.0, sup)))


def _check_grid(g: int, n_trunc: int):
    # coefficients of the square are needed up to n_trunc: band 2n + keep n
    if g < 3 * n_trunc + 1:
        raise GridTooSmall(
            f"grid g={g} < {3 * n_trunc + 1} needed for the quadratic term at N={n_trunc}"
        )


def _nonlinear(coeffs: np.ndarray, n_trunc: int, g: int, n_over: np.ndarray) -> np.ndarray:
    """-(i n/(1+n)) * B_hat(n) on modes <= n_trunc, zero above."""
    nb = min(n_trunc, coeffs.shape[-1])
    u = grid_values(coeffs[..., :nb], g)
    spec = np.fft.rfft(u * u, axis=-1) / g
    out = np.zeros_like(coeffs)
    out[..., :nb] = n_over[:nb] * spec[..., 1 : nb + 1]
    return out


def vector_field(u: TorusField, n: int, grid: Grid) -> TorusField:
    """Full time derivative: linear rotation everywhere, quadratic term on
    modes <= n."""
    _check_grid(grid.g, min(n, u.extent))
    k = u.extent
    modes = np.arange(1, k + 1, dtype=np.float64)
    lam = -1j * modes / (1.0 + modes)
    n_over = lam[: min(n, k)]
    nl = _nonlinear(u.coeffs[None, :], n, grid.g, n_over)[0]
    return TorusField(lam * u.coeffs + nl)


def evolve_coeffs(
    coeffs: np.ndarray,
    n_trunc: int,
    dt: float,
    t_end: float,
    grid: Grid,
    snapshot_times=None,
):
    """Integrating-factor RK4 on raw coefficient arrays of shape (..., K).

    Negative ``t_end`` integrates backward.  Returns (final, snaps, drift,
    steps) where snaps maps each requested time to its coefficient array and
    drift is the max relative energy change over all steps.
    """
    if not dt > 0.0 or not np.isfinite(dt):
        raise StepSizeInvalid(f"dt must be positive and finite, got {dt}")
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    k = coeffs.shape[-1]
    _check_grid(grid.g, min(n_trunc, k))
    modes = np.arange(1, k + 1, dtype=np.float64)
    lam = -1j * modes / (1.0 + modes)
    n_over = lam[: min(n_trunc, k)]

    snap_times = sorted(snapshot_times or [])
    direction = 1.0 if t_end >= 0 else -1.0
    if any(direction * t < -1e-15 for t in snap_times):
        raise ValueError("snapshot times must lie between 0 and t_end")

    e_ref = energy_batch(coeffs)
    e_floor = np.maximum(e_ref, 1e-300)
    drift = 0.0
    steps_total = 0
    snaps = {}
    cur = coeffs.copy()
    t_cur = 0.0

    marks = sorted({t for t in snap_times if abs(t) <= abs(t_end) + 1e-15} | {t_end},
                   key=abs)
    for t_target in marks:
        seg = t_target - t_cur
        nsteps = max(int(np.ceil(abs(seg) / dt - 1e-12)), 0)
        if nsteps > 0:
            h = seg / nsteps
            ph = np.exp(lam * h)
            ph2 = np.exp(lam * (h / 2.0))
            for _ in range(nsteps):
                k1 = _nonlinear(cur, n_trunc, grid.g, n_over)
                k2 = _nonlinear(ph2 * (cur + (h / 2.0) * k1), n_trunc, grid.g, n_over)
                k3 = _nonlinear(ph2 * cur + (h / 2.0) * k2, n_trunc, grid.g, n_over)
                k4 = _nonlinear(ph * cur + h * (ph2 * k3), n_trunc, grid.g, n_over)
                cur = ph * cur + (h / 6.0) * (ph * k1 + 2.0 * ph2 * (k2 + k3) + k4)
                steps_total += 1
            drift = max(drift, float(np.max(np.abs(energy_batch(cur) - e_ref) / e_floor)))
        t_cur = t_target
        if t_target in snap_times:
            snaps[t_target] = cur.copy()
    return cur, snaps, drift, steps_total


def evolve(u0: TorusField, cfg: FlowConfig, grid: Grid | None = None) -> FlowResult:
    """Run the truncated flow on a single field.

    Snapshots, when requested, are equally spaced in time.  Raises
    EnergyDriftExceeded if the relative drift crosses
    tol_energy * max(|t_end|, dt).
    """
    g = grid if grid is not None else Grid.for_extent(cfg.n)
    snap_times = []
    if cfg.snapshots > 0:
        snap_times = [cfg.t_end * (j + 1) / cfg.snapshots for j in range(cfg.snapshots)]
    final, snaps, drift, steps = evolve_coeffs(
        u0.coeffs[None, :], cfg.n, cfg.dt, cfg.t_end, g, snapshot_times=snap_times
    )
    budget = cfg.tol_energy * max(abs(cfg.t_end), cfg.dt) + 1e-13
    if drift > budget:
        raise EnergyDriftExceeded(
            f"relative energy drift {drift:.3e} exceeds budget {budget:.3e}"
        )
    result = FlowResult(
        final=TorusField(final[0]),
        snapshots=[(t, TorusField(snaps[t][0])) for t in sorted(snaps, key=abs)],
        max_drift=drift,
        steps=steps,
    )
    return result


def conservation_report(result: FlowResult) -> float:
    """Max relative energy drift observed along the run."""
    return result.max_drift


def volume_probe(
    u0: TorusField,
    n: int,
    t: float,
    grid: Grid | None = None,
    dt: float = 0.005,
    fd_step: float | None = None,
) -> float:
    """log |det D Phi_t| at u0 in the 2n real coordinates of the truncated
    subspace, by central finite differences of the flow map.

    The field must be supported on modes <= n.  Expected value: 0 (the
    quadratic term is divergence free because its diagonal derivative picks
    the absent zero mode).
    """
    if u0.extent > n and np.any(u0.coeffs[n:]):
        raise ValueError("initial field must be supported on modes <= n")
    g = grid if grid is not None else Grid.for_extent(n)
    base = np.zeros(n, dtype=np.complex128)
    base[: min(u0.extent, n)] = u0.coeffs[: min(u0.extent, n)]
    if fd_step is None:
        fd_step = 1e-5 * (1.0 + np.sqrt(sobolev_norm_sq(u0, 0.5)))
    if t == 0.0:
        return 0.0

    dim = 2 * n
    batch = np.tile(base, (2 * dim, 1))
    for j in range(n):
        batch[2 * j, j] += fd_step
        batch[2 * j + 1, j] -= fd_step
        batch[2 * (n + j), j] += 1j * fd_step
        batch[2 * (n + j) + 1, j] -= 1j * fd_step
    out, _, _, _ = evolve_coeffs(batch, n, dt, t, g)

    # columns of the Jacobian in (Re, Im) coordinates
    diff = (out[0::2] - out[1::2]) / (2.0 * fd_step)  # (dim, n) complex
    jac = np.concatenate([diff.real, diff.imag], axis=1).T  # (2n, 2n)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > 1e12:
        raise IllConditioned(f"condition estimate {sv[0] / max(sv[-1], 1e-300):.2e}")
    _, logdet = np.linalg.slogdet(jac)
    return float(logdet)
