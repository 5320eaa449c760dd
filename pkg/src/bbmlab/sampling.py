"""Draws from the fractional Gaussian ensemble and its energy-restricted
variant, with a counter-based seed plan.

A draw has coefficients u_hat(n) = g_n / n^(s+1/2) for 1 <= n <= k_sample,
where Re g_n and Im g_n are independent N(0, 1/2).  Hence
E|u_hat(n)|^2 = n^(-(2s+1)).  The restricted ensemble weights expectations by
the indicator {energy <= R} and is kept unnormalized throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .fields import SobolevIndex, TorusField, energy, energy_batch

__all__ = [
    "DegenerateQuantile",
    "CalibrationError",
    "SeedPlan",
    "GaussianSpec",
    "RestrictedSpec",
    "draw_coeffs",
    "draw_coeffs_batch",
    "draw_field",
    "draw_restricted",
    "calibrate_r",
    "acceptance_rate",
    "energy_second_moment",
    "energy_truncation_bound",
]


class DegenerateQuantile(ValueError):
    """Too few calibration draws for a stable quantile."""


class CalibrationError(RuntimeError):
    """Rejection sampling against the energy ball is too inefficient."""


# Raw draws reserved per sample index.  A sample consumes at most a few times
# 2*k_sample values, far below this, so streams never overlap.
_STRIDE = 1 << 32


@dataclass(frozen=True)
class SeedPlan:
    """Counter-based stream derivation: sample i is bit-identical regardless
    of batch size, ordering or thread count."""

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed < (1 << 64):
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def generator(self, i: int) -> np.random.Generator:
        if i < 0:
            raise ValueError("sample index must be >= 0")
        bg = np.random.Philox(key=self.master_seed)
        bg.advance(i * _STRIDE)
        return np.random.Generator(bg)


@dataclass(frozen=True)
class GaussianSpec:
    """Ensemble parameters: regularity s > 1/2 and sampling cutoff."""

    s: float
    k_sample: int = 1 << 14

    def __post_init__(self):
        SobolevIndex(float(self.s))  # validates s > 1/2
        object.__setattr__(self, "s", float(self.s))
        if self.k_sample < 1:
            raise ValueError("k_sample must be >= 1")

    def mode_scale(self) -> np.ndarray:
        n = np.arange(1, self.k_sample + 1, dtype=np.float64)
        return n ** (-(self.s + 0.5))


@dataclass(frozen=True)
class RestrictedSpec:
    """Energy-restricted ensemble: indicator {energy <= r}, unnormalized."""

    base: GaussianSpec
    r: float

    def __post_init__(self):
        if not (self.r >= 0.0 or math.isinf(self.r)):
            raise ValueError("energy radius must be >= 0")


def draw_coeffs(spec: GaussianSpec, plan: SeedPlan, i: int) -> np.ndarray:
    k = spec.k_sample
    z = plan.generator(i).standard_normal(2 * k)
    return (z[:k] + 1j * z[k:]) / np.sqrt(2.0) * spec.mode_scale()


def draw_coeffs_batch(
    spec: GaussianSpec, plan: SeedPlan, start: int, count: int
) -> np.ndarray:
    """Samples start .. start+count-1 as a (count, k_sample) array."""
    k = spec.k_sample
    scale = spec.mode_scale()
    out = np.empty((count, k), dtype=np.complex128)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for j in range(count):
        z = plan.generator(start + j).standard_normal(2 * k)
        out[j] = (z[:k] + 1j * z[k:]) * inv_sqrt2 * scale
    return out


def draw_field(spec: GaussianSpec, plan: SeedPlan, i: int) -> TorusField:
    return TorusField(draw_coeffs(spec, plan, i))


def draw_restricted(
    spec: RestrictedSpec, plan: SeedPlan, i: int
) -> tuple[TorusField, bool]:
    """Unrestricted draw plus the energy-ball indicator.

    Restricted expectations are indicator-weighted sums over all draws; the
    measure is not normalized.
    """
    u = draw_field(spec.base, plan, i)
    return u, bool(energy(u) <= spec.r)


def calibrate_r(
    spec: GaussianSpec, q: float, n_cal: int, plan: SeedPlan
) -> float:
    """Empirical q-quantile of the energy over n_cal fresh draws."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile must lie strictly between 0 and 1")
    if n_cal < 100:
        raise DegenerateQuantile(f"need at least 100 draws, got {n_cal}")
    energies = _energies(spec, plan, 0, n_cal)
    return float(np.quantile(energies, q))


def acceptance_rate(
    spec: RestrictedSpec, plan: SeedPlan, n: int, start: int = 0
) -> tuple[float, float]:
    """Measured acceptance fraction and its binomial standard error.

    Raises CalibrationError below 1%: rejection against the energy ball is
    then too wasteful to be a usable reference measure.
    """
    acc = _energies(spec.base, plan, start, n) <= spec.r
    p = float(np.mean(acc))
    se = float(np.sqrt(max(p * (1.0 - p), 0.0) / n))
    if p <= 0.01:
        raise CalibrationError(f"acceptance {p:.4f} <= 0.01 at R={spec.r}")
    return p, se


def _energies(spec: GaussianSpec, plan: SeedPlan, start: int, n: int) -> np.ndarray:
    out = np.empty(n)
    chunk = 4096
    for i0 in range(0, n, chunk):
        m = min(chunk, n - i0)
        out[i0 : i0 + m] = energy_batch(
            draw_coeffs_batch(spec, plan, start + i0, m)
        )
    return out


def energy_second_moment(spec: GaussianSpec) -> float:
    """Closed form E[energy^2] = 4 pi sum_{n<=K} (1+n) n^(-(2s+1))."""
    n = np.arange(1, spec.k_sample + 1, dtype=np.float64)
    return float(4.0 * np.pi * np.sum((1.0 + n) * n ** (-(2.0 * spec.s + 1.0))))


def energy_truncation_bound(spec: GaussianSpec) -> float:
    """Neglected contribution of modes above the cutoff to E[energy^2]:
    4 pi sum_{n>K} (1+n) n^(-(2s+1)), evaluated with Hurwitz zeta."""
    s2 = 2.0 * spec.s
    q = spec.k_sample + 1
    return float(4.0 * np.pi * (zeta(s2, q) + zeta(s2 + 1.0, q)))
