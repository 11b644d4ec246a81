"""widthlab: a desk-scale laboratory for width scales of kernel embeddings.

Computes and compares, for a catalog of kernels on boxes:

- integral-operator spectra (dense Nystrom and closed-form references),
- kernel interpolation widths via the power function, with uniform,
  greedy, and refined designs,
- certified lower bounds for Kolmogorov and interpolation widths in sup
  norm, and linear upper bounds from spectral projections and rank-n
  factorizations,
- entropy-number brackets for diagonal operators and point clouds,
- log-log rate fits, gap reports between width scales, and
  rate-transfer verdicts that keep rule-based conclusions separate from
  numeric certificates.
"""

from .version import __version__
from .quadrature import Box, QuadratureRule, midpoint_rule, unit_interval, unit_square
from .kernels import (
    CATALOG_IDS,
    Kernel,
    MercerExpansion,
    PowerKernelSpec,
    eval_kernel,
    gram_matrix,
    make_kernel,
    power_kernel,
    power_kernel_eval,
    trace_integral,
)
from .spectral import (
    SpectrumEstimate,
    analytic_eigenvalues,
    analytic_spectrum,
    analytic_trace,
    has_analytic_spectrum,
    nystrom_spectrum,
    tail_sum,
)
from .interpolation import (
    DesignSet,
    PowerFunctionProfile,
    apply_interpolant,
    cardinal_weights,
    design,
    greedy_design,
    interpolation_width,
    optimize_interpolation_width,
    power_function,
    power_profile,
    power_values,
    uniform_design,
)
from .widths import (
    EllipsoidModel,
    WidthCurve,
    build_ellipsoid,
    interp_linf_lower_tail,
    l2_widths,
    linf_kolmogorov_lower,
    mercer_projection_upper,
    rate_transfer_verdict,
    subspace_residual_upper,
    width_gap_verdict,
)
from .entropy import (
    CarlReport,
    DiagonalOperator,
    EntropyEstimate,
    brute_cover_entropy,
    carl_check,
    carl_constant,
    diag_entropy_bounds,
)
from .asymptotics import (
    RateSeries,
    RegularityReport,
    SlopeReport,
    Verdict,
    asymp_equiv,
    fit_loglog,
    gap_report,
    regular_check,
)
from .config import ExperimentConfig, PRESETS, load_preset, parse_config
from .runner import CampaignResult, RunManifest, run_campaign

__all__ = [name for name in dir() if not name.startswith("_")]
