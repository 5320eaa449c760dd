"""Zero-mean real fields on the 2*pi torus and their Fourier-side operators.

A field is stored through its positive-frequency coefficients only:
``coeffs[j]`` multiplies ``exp(i*(j+1)*x)``, the negative frequencies are the
implicit conjugates and frequency zero carries no data.  Realness and zero
mean therefore hold by construction and cannot be violated by any operation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridTooSmall",
    "SobolevIndex",
    "Grid",
    "TorusField",
    "grid_values",
    "coeffs_from_grid",
    "integrate_grid",
    "project",
    "lp_block",
    "frac_derivative",
    "x_derivative",
    "smoothing_inverse",
    "product",
    "sobolev_norm_sq",
    "l2_norm_sq",
    "energy",
    "energy_batch",
    "sobolev_norm_sq_batch",
    "linf_norm",
    "field_to_json",
    "field_from_json",
]


class GridTooSmall(ValueError):
    """The physical grid cannot resolve the requested bandwidth alias-free."""


@dataclass(frozen=True)
class SobolevIndex:
    """Regularity exponent of the measure/norm family.

    Values at or below 1/2 put the Gaussian ensemble outside L^2 and are
    rejected.  Flow and tail experiments additionally need ``s > 1``, which is
    checked at experiment entry, not here.
    """

    s: float

    def __post_init__(self):
        if not float(self.s) > 0.5:
            raise ValueError(f"Sobolev index must exceed 1/2, got {self.s}")

    def __float__(self) -> float:
        return float(self.s)


@dataclass(frozen=True)
class Grid:
    """Equispaced quadrature grid with ``g`` points on [0, 2*pi).

    ``g >= dealias_factor*K + 1`` makes the trapezoidal quadrature of a
    product of up to ``dealias_factor`` band-K factors exact.  Operations that
    store full product spectra need more room and check their own condition.
    """

    g: int
    dealias_factor: int = 3

    def __post_init__(self):
        if self.g < 4:
            raise ValueError("grid needs at least 4 points")
        if self.dealias_factor < 3:
            raise ValueError("dealias factor must be an integer >= 3")

    @classmethod
    def for_extent(cls, extent: int, factor: int = 4) -> "Grid":
        # Next power of two strictly above factor*extent.  The strict
        # inequality keeps the top mode of a full two-factor product below
        # the aliasing threshold even when factor*extent is itself a power
        # of two.
        g = 16
        while g < factor * extent + 1:
            g *= 2
        return cls(g=g, dealias_factor=factor)


@dataclass(frozen=True, eq=False)
class TorusField:
    """Positive-frequency coefficients of a real zero-mean field.

    ``coeffs[j]`` is the coefficient of ``exp(i*(j+1)*x)``; the extent K is
    the array length and all frequencies above K are exactly zero.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.coeffs, dtype=np.complex128))
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("coeffs must be a 1-d array with extent >= 1")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def extent(self) -> int:
        return self.coeffs.size

    @classmethod
    def zero(cls, extent: int = 1) -> "TorusField":
        return cls(np.zeros(extent, dtype=np.complex128))

    @classmethod
    def from_modes(cls, modes: dict, extent: int | None = None) -> "TorusField":
        """Build a field from ``{n: coefficient}`` with positive n."""
        if extent is None:
            extent = max(modes) if modes else 1
        out = np.zeros(extent, dtype=np.complex128)
        for n, c in modes.items():
            if n < 1 or n > extent:
                raise ValueError(f"mode {n} outside 1..{extent}")
            out[n - 1] = c
        return cls(out)

    @classmethod
    def cosine(cls, n: int = 1, amplitude: float = 1.0) -> "TorusField":
        """amplitude*cos(n x), stored as u_hat(n) = amplitude/2."""
        return cls.from_modes({n: amplitude / 2.0})

    def values(self, grid: Grid) -> np.ndarray:
        return grid_values(self.coeffs, grid.g)


# -- grid transforms (also used batched, on arrays of shape (..., K)) --------


def grid_values(coeffs: np.ndarray, g: int) -> np.ndarray:
    """Evaluate on the g-point grid.  Exact for g >= 2*K + 1."""
    k = coeffs.shape[-1]
    if g < 2 * k + 1:
        raise GridTooSmall(f"{g} points cannot carry modes up to {k}")
    spec = np.zeros(coeffs.shape[:-1] + (g // 2 + 1,), dtype=np.complex128)
    spec[..., 1 : k + 1] = coeffs
    return np.fft.irfft(spec, n=g, axis=-1) * g

def coeffs_from_grid(values: np.ndarray, k: int) -> np.ndarray:
    """Coefficients 1..k of grid samples.  Alias-free only if the sampled
    function has bandwidth <= g - k - 1."""
    g = values.shape[-1]
    if g < 2 * k + 1:
        raise GridTooSmall(f"{g} points cannot resolve modes up to {k}")
    spec = np.fft.rfft(values, axis=-1) / g
    return np.ascontiguousarray(spec[..., 1 : k + 1])


def integrate_grid(values: np.ndarray) -> np.ndarray:
    """Unnormalized torus integral: (2*pi/g) * sum over grid points."""
    g = values.shape[-1]
    return 2.0 * np.pi / g * np.sum(values, axis=-1)


# -- diagonal operators and projections ---------------------------------------


def project(u: TorusField, n: int) -> TorusField:
    """Keep modes |j| <= n, zero the rest.  Idempotent."""
    if n < 0:
        raise ValueError("projection level must be >= 0")
    if n >= u.extent:
        return u
    if n == 0:
        return TorusField.zero()
    return TorusField(u.coeffs[:n])


def lp_block(u: TorusField, j: int) -> TorusField:
    """Dyadic frequency block: j=0 keeps mode 1, j>=1 keeps (2^(j-1), 2^j]."""
    if j < 0:
        raise ValueError("block index must be >= 0")
    hi = min(2**j, u.extent)
    lo = 0 if j == 0 else min(2 ** (j - 1), u.extent)
    out = np.zeros(max(hi, 1), dtype=np.complex128)
    out[lo:hi] = u.coeffs[lo:hi]
    return TorusField(out)


def _mode_numbers(extent: int) -> np.ndarray:
    return np.arange(1, extent + 1, dtype=np.float64)


def frac_derivative(u: TorusField, sigma: float) -> TorusField:
    """Multiplier |n|^sigma."""
    return TorusField(u.coeffs * _mode_numbers(u.extent) ** float(sigma))


def x_derivative(u: TorusField) -> TorusField:
    """Multiplier i*n."""
    return TorusField(u.coeffs * (1j * _mode_numbers(u.extent)))


def smoothing_inverse(u: TorusField) -> TorusField:
    """Multiplier 1/(1+|n|)."""
    return TorusField(u.coeffs / (1.0 + _mode_numbers(u.extent)))


def product(
    u: TorusField,
    v: TorusField,
    grid: Grid,
    keep: int | None = None,
    return_mean: bool = False,
):
    """Pointwise product as a field, equal to the exact discrete convolution.

    The stored result keeps modes up to ``keep`` (default: the full band
    extent(u)+extent(v)).  Exactness requires g >= band + keep + 1; the
    product of two zero-mean fields has a mean in general, which cannot be
    stored and is returned separately when ``return_mean`` is set.
    """
    band = u.extent + v.extent
    if keep is None:
        keep = band
    keep = min(keep, band)
    if grid.g < band + keep + 1:
        raise GridTooSmall(
            f"grid g={grid.g} < {band + keep + 1} needed for bandwidth "
            f"{band} with {keep} retained modes"
        )
    w = grid_values(u.coeffs, grid.g) * grid_values(v.coeffs, grid.g)
    spec = np.fft.rfft(w) / grid.g
    out = TorusField(np.ascontiguousarray(spec[1 : keep + 1]))
    if return_mean:
        return out, float(spec[0].real)
    return out


# -- norms and conserved quantity ---------------------------------------------


def sobolev_norm_sq(u: TorusField, s) -> float:
    """Sum over positive n of n^(2s) |u_hat(n)|^2."""
    return float(sobolev_norm_sq_batch(u.coeffs[None, :], s)[0])


def sobolev_norm_sq_batch(coeffs: np.ndarray, s) -> np.ndarray:
    n = _mode_numbers(coeffs.shape[-1])
    return np.sum(n ** (2.0 * float(s)) * np.abs(coeffs) ** 2, axis=-1)


def l2_norm_sq(u: TorusField) -> float:
    # the L2 norm exceeds the H^0 norm by the factor 2*sqrt(pi)
    return 4.0 * np.pi * sobolev_norm_sq(u, 0.0)


def energy(u: TorusField) -> float:
    """Conserved quantity: sqrt(||u||_L2^2 + 4 pi ||u||_{H^{1/2}}^2)."""
    return float(energy_batch(u.coeffs[None, :])[0])


def energy_batch(coeffs: np.ndarray) -> np.ndarray:
    n = _mode_numbers(coeffs.shape[-1])
    return np.sqrt(4.0 * np.pi * np.sum((1.0 + n) * np.abs(coeffs) ** 2, axis=-1))


def linf_norm(u: TorusField, grid: Grid, rtol: float = 1e-6) -> float:
    """Sup norm over an oversampled grid, refined until doubling the grid
    changes the value by less than ``rtol`` relative."""
    g = max(grid.g, 8 * u.extent, 64)
    g = 1 << int(np.ceil(np.log2(g)))
    prev = float(np.max(np.abs(grid_values(u.coeffs, g))))
    while g < (1 << 22):
        g *= 2
        cur = float(np.max(np.abs(grid_values(u.coeffs, g))))
        if abs(cur - prev) <= rtol * max(cur, 1e-300):
            return cur
        prev = cur
    return prev


# -- serialization -------------------------------------------------------------


def field_to_json(u: TorusField) -> str:
    """JSON with the extent and [n, re, im] triples for n = 1..K."""
    triples = [
        [n + 1, float(c.real), float(c.imag)] for n, c in enumerate(u.coeffs)
    ]
    return json.dumps({"extent": u.extent, "coeffs": triples})


def field_from_json(text: str) -> TorusField:
    data = json.loads(text)
    out = np.zeros(int(data["extent"]), dtype=np.complex128)
    for n, re, im in data["coeffs"]:
        out[int(n) - 1] = complex(re, im)
    return TorusField(out)
