"""Acceptance battery: every exit criterion at its declared scale.

Each test runs one full-scale gate with pinned seeds and tolerances and
prints a single pass/fail line with the measured numbers.  Runtime is
minutes per test; deselect with ``-m "not acceptance"`` during development.
"""

import pytest

from bbmlab.gates import (
    gate_conv_bounds,
    gate_cov_identity,
    gate_decay_rates,
    gate_decomposition,
    gate_flow_structure,
    gate_tails,
    gate_transport,
    gate_wick_mc,
)

pytestmark = pytest.mark.acceptance


def _run(gate):
    result = gate(scale="full")
    print()
    print(result.line())
    assert result.passed, result.line()
    return result


class TestAcceptance:
    def test_1_trilinear_decomposition_identity(self):
        # three evaluators of the norm derivative agree: flow finite
        # difference within 1e-5 relative, physical vs spectral within 1e-9
        result = _run(gate_decomposition)
        assert result.details["draws"] >= 100

    def test_2_flow_structure(self):
        # energy conservation at 1e-9 per unit time, fourth-order step
        # convergence, unit Jacobian below 1e-6, single-mode rotation at 1e-10
        _run(gate_flow_structure)

    def test_3_second_moment_oracle_vs_monte_carlo(self):
        # contraction sums match 1e5-sample variances within five standard
        # errors for every symbol and parameter combination
        result = _run(gate_wick_mc)
        assert result.details["samples"] == 100_000
        assert result.details["comparisons"] == 12

    def test_4_truncation_decay_rates(self):
        # dyadic slopes of the exact truncation distances at level 512 stay
        # below the predicted rates plus the 0.1 fit margin
        result = _run(gate_decay_rates)
        assert result.details["n_max"] == 512
        assert result.details["fits"] == 15

    def test_5_lattice_convolution_envelopes(self):
        # sup of lhs/envelope over shifts up to 4096 and truncations up to
        # 512 is finite and moves under 5 percent when the range doubles
        result = _run(gate_conv_bounds)
        assert result.details["studies"] == 9

    def test_6_restricted_tails_and_moments(self):
        # one million draws at truncation 64: sub-exponential derivative
        # tail, super-Gaussian sup-norm and Sobolev tails, bounded L^p/p,
        # hypercontractive p-growth and dyadic decay
        result = _run(gate_tails)
        d = result.details
        assert d["alpha_fn"] >= 0.8
        assert d["alpha_dx"] >= 2.1
        assert d["alpha_hs"] >= 2.1
        assert d["lp_ratio_spread"] <= 3.0
        assert d["hyper_p_exponent"] <= 1.7
        assert d["hyper_dyadic_slope"] <= -0.4

    def test_7_change_of_variables_identity(self):
        # both estimators of the transported mass agree within three joint
        # standard errors for every truncation, time and set choice
        result = _run(gate_cov_identity)
        assert result.details["runs"] == 8

    def test_8_transport_envelope(self):
        # the measured mass curve admits a finite envelope constant; the
        # constant itself is reported, not gated
        result = _run(gate_transport)
        assert result.details["envelope_c"] >= 1.0
