"""Exact second moments of trilinear truncation differences under the
Gaussian ensemble.

For symbols A, B with weights w_A, w_B and real prefactors r_A, r_B,

    E[(F_{A,N}-F_{A,M})(F_{B,N}-F_{B,M})]
        = r_A r_B sum over permutations sigma of S3, triples n in A_{N,M} of
          w_A(n) w_B(n_sigma(1), n_sigma(2), n_sigma(3))
          / (|n1| |n2| |n3|)^(2s+1),

because only cross pairings between the two trilinear brackets survive: the
triple set excludes opposite pairs, so internal pairings vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PERMUTATIONS",
    "enumerate_a",
    "ContractionSum",
    "wick_variance",
    "decay_curve",
    "fit_loglog_slope",
]

PERMUTATIONS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


def enumerate_a(n: int, m: int) -> np.ndarray:
    """Ordered integer triples with nonzero entries, zero sum, and max
    modulus in (m, n], as an (T, 3) int64 array.

    Zero sum plus nonzero entries force every pair of entries to be distinct
    from each other's negatives, which is what kills internal Wick pairings.
    """
    if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer))):
        raise TypeError("truncation levels must be integers")
    if not n >= m >= 0:
        raise ValueError(f"need n >= m >= 0, got n={n}, m={m}")
    r = np.arange(-n, n + 1, dtype=np.int64)
    a, b = np.meshgrid(r, r, indexing="ij")
    c = -(a + b)
    mx = np.maximum(np.abs(a), np.maximum(np.abs(b), np.abs(c)))
    mask = (a != 0) & (b != 0) & (c != 0) & (np.abs(c) <= n) & (mx > m)
    return np.stack([a[mask], b[mask], c[mask]], axis=1)


@dataclass
class ContractionSum:
    """Per-permutation contraction values and their total.

    The total is a genuine variance (hence nonnegative) when the two symbols
    coincide; individual entries may be negative.
    """

    entries: dict
    total: float

    @classmethod
    def from_entries(cls, entries: dict) -> "ContractionSum":
        return cls(entries=dict(entries), total=float(sum(entries.values())))


def wick_variance(
    symbol_a,
    symbol_b,
    s: float,
    n: int,
    m: int,
    triples: np.ndarray | None = None,
) -> ContractionSum:
    """Exact E[(F_{A,n}-F_{A,m}) (F_{B,n}-F_{B,m})] over the ensemble with
    regularity s.  O(6 |A_{n,m}|) time; ``triples`` may be passed to reuse an
    enumeration."""
    tri = enumerate_a(n, m) if triples is None else triples
    s = float(s)
    if tri.shape[0] == 0:
        return ContractionSum.from_entries({p: 0.0 for p in PERMUTATIONS})
    cols = [tri[:, j].astype(np.float64) for j in range(3)]
    rho = (np.abs(cols[0]) * np.abs(cols[1]) * np.abs(cols[2])) ** (-(2.0 * s + 1.0))
    wa = symbol_a.weight(cols[0], cols[1], cols[2], s) * rho
    rr = symbol_a.prefactor * symbol_b.prefactor
    entries = {}
    for perm in PERMUTATIONS:
        wb = symbol_b.weight(cols[perm[0]], cols[perm[1]], cols[perm[2]], s)
        entries[perm] = rr * float(np.sum(wa * wb))
    return ContractionSum.from_entries(entries)


def decay_curve(
    symbol, s: float, n_max: int, m_grid=None
) -> list[tuple[int, float]]:
    """L2 distance between the level-n_max functional and its level-m
    truncations, on a dyadic m grid.

    Suffix sums over triples sorted by max modulus give every m at once.
    """
    if m_grid is None:
        m_grid = []
        m = 1
        while m <= n_max // 2:
            m_grid.append(m)
            m *= 2
    tri = enumerate_a(n_max, 0)
    s = float(s)
    cols = [tri[:, j].astype(np.float64) for j in range(3)]
    mx = np.max(np.abs(tri), axis=1)
    order = np.argsort(mx, kind="stable")
    mx_sorted = mx[order]
    rho = (np.abs(cols[0]) * np.abs(cols[1]) * np.abs(cols[2])) ** (-(2.0 * s + 1.0))
    wa = symbol.weight(cols[0], cols[1], cols[2], s) * rho
    r2 = symbol.prefactor**2

    curve = []
    suffix = {}
    for perm in PERMUTATIONS:
        wb = symbol.weight(cols[perm[0]], cols[perm[1]], cols[perm[2]], s)
        terms = (wa * wb)[order]
        suffix[perm] = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    for m in m_grid:
        if not 0 <= m < n_max:
            raise ValueError(f"m must lie in [0, n_max), got {m}")
        pos = int(np.searchsorted(mx_sorted, m, side="right"))
        total = r2 * sum(float(suffix[perm][pos]) for perm in PERMUTATIONS)
        curve.append((int(m), float(np.sqrt(max(total, 0.0)))))
    return curve


def fit_loglog_slope(pairs, lo: float | None = None, hi: float | None = None) -> float:
    """Least-squares slope of log(value) against log(abscissa)."""
    x = np.array([p[0] for p in pairs], dtype=float)
    y = np.array([p[1] for p in pairs], dtype=float)
    keep = y > 0
    if lo is not None:
        keep &= x >= lo
    if hi is not None:
        keep &= x <= hi
    if keep.sum() < 2:
        raise ValueError("need at least two positive points for a slope fit")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
