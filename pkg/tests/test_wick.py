"""Contraction sums: triple enumeration, exact second moments, decay."""

import numpy as np
import pytest

from bbmlab.trilinear import F1, F2, F3, TOTAL, TOTAL_FLOW_FORM, TrilinearSymbol
from bbmlab.wick import (
    PERMUTATIONS,
    ContractionSum,
    decay_curve,
    enumerate_a,
    fit_loglog_slope,
    wick_variance,
)


def brute_triples(n, m):
    out = []
    for a in range(-n, n + 1):
        for b in range(-n, n + 1):
            for c in range(-n, n + 1):
                if 0 in (a, b, c) or a + b + c != 0:
                    continue
                if max(abs(a), abs(b), abs(c)) <= m:
                    continue
                out.append((a, b, c))
    return sorted(out)


def all_pairings(indices):
    if not indices:
        return [[]]
    first, rest = indices[0], indices[1:]
    out = []
    for j, other in enumerate(rest):
        remaining = rest[:j] + rest[j + 1 :]
        for tail in all_pairings(remaining):
            out.append([(first, other)] + tail)
    return out


def pairing_oracle(sym_a, sym_b, s, n, m):
    """Independent evaluation of E[(F_A,n - F_A,m)(F_B,n - F_B,m)] by full
    expansion of the six-point Gaussian moment into its 15 pairings, using
    E[u_hat(a) u_hat(b)] = 1{a+b=0} |a|^(-(2s+1))."""
    triples = brute_triples(n, m)
    pairings = all_pairings(list(range(6)))
    assert len(pairings) == 15
    expect_ss = 0.0
    for ta in triples:
        for tb in triples:
            freqs = list(ta) + list(tb)
            psum = 0.0
            for pairing in pairings:
                val = 1.0
                for i, j in pairing:
                    a, b = freqs[i], freqs[j]
                    if a + b != 0:
                        val = 0.0
                        break
                    val /= abs(a) ** (2 * s + 1)
                psum += val
            wa = float(sym_a.weight(*(np.array([v], float) for v in ta), s)[0])
            wb = float(sym_b.weight(*(np.array([v], float) for v in tb), s)[0])
            expect_ss += psum * wa * wb
    # the functionals are i * prefactor * (purely imaginary sums), so the
    # product of the two real values is -rA rB E[S_A S_B]
    return -sym_a.prefactor * sym_b.prefactor * expect_ss


class TestEnumeration:
    def test_smallest_nonempty_set(self):
        tri = enumerate_a(2, 1)
        assert tri.shape[0] == 6
        assert sorted(map(tuple, tri)) == brute_triples(2, 1)

    def test_empty_when_levels_meet(self):
        assert enumerate_a(4, 4).shape == (0, 3)
        with pytest.raises(ValueError):
            enumerate_a(4, 5)

    @pytest.mark.parametrize("n,m", [(4, 0), (8, 2), (16, 5)])
    def test_matches_brute_force(self, n, m):
        tri = enumerate_a(n, m)
        assert sorted(map(tuple, tri)) == brute_triples(n, m)

    def test_no_opposite_pairs(self):
        tri = enumerate_a(16, 0)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert not np.any(tri[:, i] == -tri[:, j])


class TestWickVariance:
    def test_constant_symbol_degenerate(self):
        const = TrilinearSymbol("CONST", 1.0, lambda a, b, c, s: np.ones_like(a))
        cs = wick_variance(const, const, 1.3, 2, 1)
        entries = list(cs.entries.values())
        assert all(abs(e - entries[0]) < 1e-14 for e in entries)
        tri = enumerate_a(2, 1).astype(float)
        rho = np.sum(
            (np.abs(tri[:, 0]) * np.abs(tri[:, 1]) * np.abs(tri[:, 2]))
            ** (-(2 * 1.3 + 1))
        )
        assert abs(entries[0] - rho) < 1e-14

    def test_frozen_value(self):
        # hand-derived: the truncation step from level 1 to 2 at s = 1 has
        # second moment exactly 2, with permutation entries (3, -1) repeated
        cs = wick_variance(F1, F1, 1.0, 2, 1)
        assert cs.total == pytest.approx(2.0, abs=1e-12)
        assert cs.entries[(0, 1, 2)] == pytest.approx(3.0, abs=1e-12)
        assert cs.entries[(1, 0, 2)] == pytest.approx(3.0, abs=1e-12)
        for perm in ((0, 2, 1), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            assert cs.entries[perm] == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("label,sym", [("F1", F1), ("F2", F2), ("F3", F3), ("TOTAL", TOTAL)])
    def test_against_pairing_oracle(self, label, sym):
        n, m, s = 3, 1, 1.2
        exact = wick_variance(sym, sym, s, n, m).total
        oracle = pairing_oracle(sym, sym, s, n, m)
        assert exact == pytest.approx(oracle, rel=1e-12, abs=1e-12)

    def test_cross_covariance_against_pairing_oracle(self):
        n, m, s = 3, 1, 1.0
        exact = wick_variance(F1, F3, s, n, m).total
        oracle = pairing_oracle(F1, F3, s, n, m)
        assert exact == pytest.approx(oracle, rel=1e-12, abs=1e-12)

    def test_nonnegative_variance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            m = int(rng.integers(0, 12))
            n = int(rng.integers(m + 1, 16))
            s = float(rng.uniform(0.6, 3.0))
            for sym in (F1, F2, F3, TOTAL):
                assert wick_variance(sym, sym, s, n, m).total >= -1e-12

    def test_permutation_structure_of_first_symbol(self):
        # the weight is symmetric in its first two slots, so the identity
        # and the first-slot swap coincide, and the remaining four entries
        # are pairwise equal
        cs = wick_variance(F1, F1, 1.4, 12, 3)
        e = cs.entries
        assert e[(0, 1, 2)] == pytest.approx(e[(1, 0, 2)], rel=1e-13)
        others = [e[(0, 2, 1)], e[(1, 2, 0)], e[(2, 0, 1)], e[(2, 1, 0)]]
        assert max(others) - min(others) <= 1e-13 * max(1.0, abs(others[0]))

    def test_total_decomposes_into_parts_and_crosses(self):
        n, m, s = 10, 3, 1.5
        total = wick_variance(TOTAL, TOTAL, s, n, m).total
        parts = sum(wick_variance(sym, sym, s, n, m).total for sym in (F1, F2, F3))
        crosses = (
            wick_variance(F1, F2, s, n, m).total
            + wick_variance(F1, F3, s, n, m).total
            + wick_variance(F2, F3, s, n, m).total
        )
        assert total == pytest.approx(parts + 2.0 * crosses, rel=1e-12)

    def test_flow_form_gives_same_variance(self):
        # symbols agreeing after symmetrization share every second moment
        n, m, s = 12, 4, 1.1
        a = wick_variance(TOTAL, TOTAL, s, n, m).total
        b = wick_variance(TOTAL_FLOW_FORM, TOTAL_FLOW_FORM, s, n, m).total
        assert a == pytest.approx(b, rel=1e-12)

    def test_contraction_sum_total(self):
        cs = ContractionSum.from_entries({p: 1.0 for p in PERMUTATIONS})
        assert cs.total == 6.0


class TestPowerDifferenceBounds:
    """The two branches bounding ||a+b|^s - |a|^s| that drive every decay
    estimate, checked against their sharp envelopes on a million pairs."""

    @pytest.mark.parametrize("s", [0.6, 1.0, 1.5, 2.0, 3.0])
    def test_both_branches(self, s):
        rng = np.random.default_rng(int(s * 1000))
        a = rng.integers(-10**6, 10**6 + 1, size=1_000_000).astype(float)
        b = rng.integers(-10**6, 10**6 + 1, size=1_000_000).astype(float)
        keep = (a != 0) & (b != 0)
        a, b = a[keep], b[keep]
        diff = np.abs(np.abs(a + b) ** s - np.abs(a) ** s)

        easy = np.abs(a) <= 2 * np.abs(b)
        # sharp constant: subadditivity gives 1 below s = 1, and |a| = 2|b|
        # with aligned signs gives 3^s - 2^s above
        c_easy = max(1.0, 3.0**s - 2.0**s)
        ratio_easy = diff[easy] / np.abs(b[easy]) ** s
        assert np.max(ratio_easy) <= c_easy * (1 + 1e-12)

        hard = ~easy
        # mean value theorem constant s * max(3/2, 1/2)^(s-1)
        c_hard = s * max(1.5, 0.5) ** (s - 1.0) if s >= 1.0 else s * 0.5 ** (s - 1.0)
        ratio_hard = diff[hard] / (np.abs(a[hard]) ** (s - 1.0) * np.abs(b[hard]))
        assert np.max(ratio_hard) <= c_hard * (1 + 1e-12)

        if s <= 1.5:
            assert max(np.max(ratio_easy), np.max(ratio_hard)) <= 4.0


class TestDecayCurves:
    def test_monotone_in_truncation(self):
        curve = decay_curve(F1, 1.0, 64)
        values = [v for _, v in curve]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_first_symbol_rate_at_unit_regularity(self):
        curve = decay_curve(F1, 1.0, 128)
        slope = fit_loglog_slope(curve, lo=4, hi=32)
        assert slope <= -(1.0 / 2.0 - 0.25) + 0.1

    def test_third_symbol_rate_at_high_regularity(self):
        curve = decay_curve(F3, 2.0, 128)
        slope = fit_loglog_slope(curve, lo=4, hi=32)
        assert slope <= -0.4

    def test_matches_direct_variance(self):
        curve = dict(decay_curve(F2, 1.5, 32))
        direct = np.sqrt(wick_variance(F2, F2, 1.5, 32, 8).total)
        assert curve[8] == pytest.approx(direct, rel=1e-12)
