"""Spectral core: representation, diagonal operators, products, norms."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbmlab.fields import (
    Grid,
    GridTooSmall,
    SobolevIndex,
    TorusField,
    coeffs_from_grid,
    energy,
    field_from_json,
    field_to_json,
    frac_derivative,
    grid_values,
    integrate_grid,
    l2_norm_sq,
    linf_norm,
    lp_block,
    product,
    project,
    smoothing_inverse,
    sobolev_norm_sq,
    x_derivative,
)


def random_field(seed: int, extent: int = 16, decay: float = 1.0) -> TorusField:
    rng = np.random.default_rng(seed)
    n = np.arange(1, extent + 1)
    c = (rng.standard_normal(extent) + 1j * rng.standard_normal(extent)) / n**decay
    return TorusField(c)


coeff_arrays = st.integers(min_value=1, max_value=24).flatmap(
    lambda k: st.lists(
        st.tuples(
            st.floats(-2, 2, allow_nan=False), st.floats(-2, 2, allow_nan=False)
        ),
        min_size=k,
        max_size=k,
    ).map(lambda pairs: np.array([complex(a, b) for a, b in pairs]))
)


class TestRepresentation:
    def test_zero_mode_absent_and_real(self):
        u = random_field(0)
        vals = u.values(Grid.for_extent(u.extent))
        assert np.isrealobj(vals)
        assert abs(integrate_grid(vals)) < 1e-12  # zero mean by construction

    def test_cosine_coefficient(self):
        u = TorusField.cosine(3, amplitude=2.0)
        assert u.coeffs[2] == 1.0

    def test_immutability(self):
        u = random_field(1)
        with pytest.raises(ValueError):
            u.coeffs[0] = 1.0

    def test_grid_roundtrip(self):
        u = random_field(2, extent=20)
        g = Grid.for_extent(20)
        back = coeffs_from_grid(u.values(g), 20)
        np.testing.assert_allclose(back, u.coeffs, atol=1e-14)

    def test_sobolev_index_validation(self):
        with pytest.raises(ValueError):
            SobolevIndex(0.5)
        assert float(SobolevIndex(1.5)) == 1.5


class TestProjection:
    def test_keeps_low_zeroes_high(self):
        u = TorusField.from_modes({1: 1.0, 3: 1.0})
        p = project(u, 2)
        assert p.coeffs[0] == 1.0
        assert p.extent == 2  # mode 3 gone

    @given(coeff_arrays, st.integers(min_value=0, max_value=30))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, coeffs, n):
        u = TorusField(coeffs)
        once = project(u, n)
        twice = project(once, n)
        np.testing.assert_array_equal(once.coeffs, twice.coeffs)

    @given(coeff_arrays)
    @settings(max_examples=25, deadline=None)
    def test_identity_at_full_extent(self, coeffs):
        u = TorusField(coeffs)
        assert project(u, u.extent) is u


class TestLpBlocks:
    def test_block_zero_is_first_mode(self):
        u = TorusField.from_modes({1: 1.0})
        np.testing.assert_array_equal(lp_block(u, 0).coeffs, u.coeffs)
        assert not np.any(lp_block(u, 1).coeffs)

    def test_dyadic_membership(self):
        u = TorusField.from_modes({3: 1.0})
        assert np.any(lp_block(u, 2).coeffs)  # 2 < 3 <= 4
        assert not np.any(lp_block(u, 1).coeffs)
        assert not np.any(lp_block(u, 3).coeffs)

    def test_blocks_reconstruct(self):
        u = random_field(3, extent=64)
        top = int(np.ceil(np.log2(64)))
        total = np.zeros(64, dtype=complex)
        for j in range(top + 1):
            b = lp_block(u, j).coeffs
            total[: b.size] += b
        np.testing.assert_allclose(total, u.coeffs, atol=1e-15)


class TestDiagonalOperators:
    def test_zero_power_is_identity(self):
        u = random_field(4)
        np.testing.assert_array_equal(frac_derivative(u, 0.0).coeffs, u.coeffs)

    def test_single_mode(self):
        u = TorusField.from_modes({2: 1.0})
        assert frac_derivative(u, 1.0).coeffs[1] == 2.0

    @given(
        coeff_arrays,
        st.floats(-1.5, 1.5, allow_nan=False),
        st.floats(-1.5, 1.5, allow_nan=False),
    )
    @settings(max_examples=50, deadline=None)
    def test_semigroup(self, coeffs, a, b):
        u = TorusField(coeffs)
        combined = frac_derivative(u, a + b)
        chained = frac_derivative(frac_derivative(u, a), b)
        np.testing.assert_allclose(chained.coeffs, combined.coeffs, rtol=1e-12, atol=1e-12)

    def test_x_derivative_of_cosine(self):
        # d/dx cos x = -sin x, i.e. u_hat(1) = 1/2 goes to i/2
        u = TorusField.cosine(1)
        assert x_derivative(u).coeffs[0] == 0.5j

    def test_smoothing_inverse(self):
        u = TorusField.from_modes({1: 1.0})
        assert smoothing_inverse(u).coeffs[0] == 0.5

    @given(coeff_arrays, st.integers(min_value=0, max_value=20))
    @settings(max_examples=40, deadline=None)
    def test_commutes_with_projection(self, coeffs, n):
        u = TorusField(coeffs)
        a = project(x_derivative(u), n)
        b = x_derivative(project(u, n))
        np.testing.assert_allclose(a.coeffs, b.coeffs[: a.extent], atol=1e-15)
        c = project(smoothing_inverse(u), n)
        d = smoothing_inverse(project(u, n))
        np.testing.assert_allclose(c.coeffs, d.coeffs[: c.extent], atol=1e-15)


def brute_convolution(u: TorusField, v: TorusField, keep: int) -> np.ndarray:
    """Direct O(K^2) convolution over signed frequencies, the product oracle."""

    def uhat(field, n):
        if n == 0 or abs(n) > field.extent:
            return 0.0
        return field.coeffs[n - 1] if n > 0 else np.conj(field.coeffs[-n - 1])

    out = np.zeros(keep, dtype=complex)
    span = u.extent + v.extent
    for n in range(1, keep + 1):
        acc = 0.0
        for k in range(-span, span + 1):
            acc += uhat(u, k) * uhat(v, n - k)
        out[n - 1] = acc
    return out


class TestProduct:
    def test_cosine_squared(self):
        u = TorusField.cosine(1)
        w, mean = product(u, u, Grid.for_extent(2), return_mean=True)
        assert abs(w.coeffs[1] - 0.25) < 1e-15  # cos^2 x = 1/2 + (1/2) cos 2x
        assert abs(mean - 0.5) < 1e-15
        assert abs(w.coeffs[0]) < 1e-15

    def test_product_with_zero(self):
        u = random_field(5)
        z = TorusField.zero(u.extent)
        w = product(u, z, Grid.for_extent(u.extent))
        assert not np.any(w.coeffs)

    def test_matches_brute_convolution(self):
        u = random_field(6, extent=16)
        v = random_field(7, extent=16)
        w = product(u, v, Grid.for_extent(32))
        np.testing.assert_allclose(
            w.coeffs, brute_convolution(u, v, 32), atol=1e-12
        )

    def test_grid_too_small(self):
        u = random_field(8, extent=16)
        with pytest.raises(GridTooSmall):
            product(u, u, Grid(g=32))

    @given(coeff_arrays, coeff_arrays)
    @settings(max_examples=25, deadline=None)
    def test_commutative(self, ca, cb):
        u, v = TorusField(ca), TorusField(cb)
        g = Grid.for_extent(u.extent + v.extent)
        np.testing.assert_allclose(
            product(u, v, g).coeffs, product(v, u, g).coeffs, atol=1e-13
        )

    def test_bilinear(self):
        u, v, w = random_field(9), random_field(10), random_field(11)
        g = Grid.for_extent(32)
        lhs = product(TorusField(u.coeffs + 2.0 * v.coeffs), w, g)
        rhs = product(u, w, g).coeffs + 2.0 * product(v, w, g).coeffs
        np.testing.assert_allclose(lhs.coeffs, rhs, atol=1e-13)


class TestNormsAndEnergy:
    def test_cosine_h0(self):
        u = TorusField.cosine(1)
        assert sobolev_norm_sq(u, 0.0) == 0.25
        assert abs(l2_norm_sq(u) - np.pi) < 1e-14

    def test_zero_field(self):
        assert sobolev_norm_sq(TorusField.zero(4), 1.3) == 0.0
        assert energy(TorusField.zero(4)) == 0.0

    def test_index_shift(self):
        u = random_field(12)
        a = sobolev_norm_sq(frac_derivative(u, 0.7), 1.1)
        b = sobolev_norm_sq(u, 1.8)
        assert abs(a - b) < 1e-12 * max(abs(b), 1.0)

    def test_monotone_in_s_for_flat_coefficients(self):
        u = TorusField(np.full(8, 0.3 + 0.1j))
        values = [sobolev_norm_sq(u, s) for s in (0.0, 0.5, 1.0, 2.0)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_cosine_energy(self):
        assert abs(energy(TorusField.cosine(1)) - np.sqrt(2 * np.pi)) < 1e-14

    def test_projection_decreases_energy(self):
        u = random_field(13, extent=32)
        assert energy(project(u, 8)) <= energy(u)

    def test_parseval(self):
        u = random_field(14, extent=24)
        g = Grid.for_extent(24)
        quad = integrate_grid(u.values(g) ** 2)
        spectral = 4.0 * np.pi * sobolev_norm_sq(u, 0.0)
        assert abs(quad - spectral) < 1e-12 * max(spectral, 1.0)


class TestSupNorm:
    def test_cosine(self):
        assert abs(linf_norm(TorusField.cosine(1), Grid.for_extent(1)) - 1.0) < 1e-9

    def test_homogeneity(self):
        u = random_field(15)
        g = Grid.for_extent(u.extent)
        a = linf_norm(TorusField(3.5 * u.coeffs), g)
        assert abs(a - 3.5 * linf_norm(u, g)) < 1e-8 * a

    def test_matches_dense_evaluation(self):
        u = TorusField.from_modes({1: 0.5, 2: 0.5})
        val = linf_norm(u, Grid.for_extent(2))
        dense = np.max(np.abs(grid_values(u.coeffs, 2048)))
        assert abs(val - dense) < 1e-8


class TestSerialization:
    def test_roundtrip(self):
        u = random_field(16, extent=12)
        again = field_from_json(field_to_json(u))
        np.testing.assert_array_equal(again.coeffs, u.coeffs)

    def test_schema(self):
        payload = json.loads(field_to_json(TorusField.cosine(2)))
        assert payload["extent"] == 2
        assert payload["coeffs"][1] == [2, 0.5, 0.0]
