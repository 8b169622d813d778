"""Limiting spectral densities of heavy-tailed random matrices.

Theory side: the entire functions g/h on their cones, fixed-point solvers
for the Wigner, band, covariance and diagonally perturbed limiting systems,
and densities via Plemelj boundary values.  Empirical side: heavy-tailed
sampling, matrix assembly, eigendecomposition and Monte Carlo campaigns
with distance reports against the theory curves.
"""

from .special import (
    AlphaParam,
    ConePoint,
    QuadratureError,
    QuadratureRule,
    c_alpha,
    c_alpha_bar,
    cone_bound,
    cone_contains,
    g_alpha,
    g_alpha_prime,
    g_alpha_second,
    h_alpha,
    principal_power,
)
from .sampling import (
    RngStreamSpec,
    StableTailLaw,
    normalizer_a_N,
    sample_entries,
    sample_entry,
)
from .matrices import (
    DiagonalLaw,
    EnsembleSpec,
    SigmaProfile,
    alpha_kernel,
    assemble_band_matrix,
    block_embed,
    build_band_matrix,
    build_covariance_matrix,
    covariance_profile,
    equivalent_constant,
    profile_alpha_norm,
)
from .eig import (
    DistanceReport,
    EmpiricalSpectrum,
    distribution_distance,
    eigenvalues_symmetric,
    empirical_cdf,
    pooled_cdf,
    spectra_from_csv,
    spectra_to_csv,
)
from .solver import (
    FixedPointConfig,
    FixedPointSolution,
    SolverError,
    band_system,
    continue_to_real_axis,
    find_critical_set,
    perturbed_system,
    polish_on_axis,
    solve_band,
    solve_perturbed,
    solve_wigner,
    solve_wishart_pair,
    wigner_system,
    wishart_system,
)
from .density import (
    DensityCurve,
    atom_at_zero_wishart,
    build_density_curve,
    default_eps_schedule,
    density_band,
    density_wigner_formula,
    density_wishart,
    semicircle_cdf,
    semicircle_density,
    stieltjes_band,
    stieltjes_perturbed,
    tail_constant,
)
from .montecarlo import (
    CampaignResult,
    CampaignSpec,
    CovarianceParams,
    atom_fraction,
    run_campaign,
    truncated_moment_experiment,
)

__version__ = "0.1.0"
