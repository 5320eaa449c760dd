"""Numerical laboratory for a critical-dispersion BBM-type flow on the torus.

Real zero-mean fields are stored as positive-frequency Fourier coefficients.
On top of that representation the package provides the spectrally truncated
flow, samplers for the fractional Gaussian ensemble and its energy-restricted
variant, three independent evaluators of the Sobolev-norm time derivative,
exact Wick second moments of its truncations, and a Monte Carlo harness for
tail, moment-growth and measure-transport experiments.
"""

__version__ = "0.1.0"

from .fields import (
    Grid,
    GridTooSmall,
    SobolevIndex,
    TorusField,
    energy,
    frac_derivative,
    linf_norm,
    lp_block,
    product,
    project,
    smoothing_inverse,
    sobolev_norm_sq,
    x_derivative,
)
from .sampling import (
    CalibrationError,
    DegenerateQuantile,
    GaussianSpec,
    RestrictedSpec,
    SeedPlan,
    calibrate_r,
    draw_field,
    draw_restricted,
)
from .flow import (
    EnergyDriftExceeded,
    FlowConfig,
    FlowResult,
    StepSizeInvalid,
    conservation_report,
    evolve,
    vector_field,
    volume_probe,
)
from .trilinear import (
    F1,
    F2,
    F3,
    TOTAL,
    TrilinearSymbol,
    ZeroField,
    f1_physical,
    f2_physical,
    f3_physical,
    f_spectral,
    f_total_fd,
    smoothing_ratio,
)
from .wick import ContractionSum, decay_curve, enumerate_a, wick_variance
from .convbounds import DivergentSum, conv_envelope, conv_lhs

__all__ = [name for name in dir() if not name.startswith("_")]
