"""Markov transportation distance on finite reversible triples.

Numerical library for the action-based transport distance T_2 (and its
Phi-entropy generalization T_xi) built from a Markov generator, together
with certified verification of dimensional contraction and EVI-type
inequalities along the associated semigroup.
"""

from .curvature import cd_margin, estimate_best_R, lemma43_margin, lsi_lower_bound
from .errors import MarkovTransportError
from .harness import (
    VerificationReport,
    cor46_bound,
    reports_to_csv,
    reports_to_json,
    verify_cor310_talagrand,
    verify_dimEVI_T2,
    verify_evi_heat_dimensional,
    verify_lemma21_heat,
    verify_lemma42_integrated,
    verify_prop22_heat,
    verify_prop38_kuwada,
    verify_remark23_different_times,
    verify_tensorization,
    verify_thm44_contraction,
    verify_thm51_evi,
    verify_thm62_phi,
    verify_thm63_power,
)
from .models import circle_diffusion, product, ring_chain, two_point
from .semigroup import (
    LineGrid,
    SpectralCache,
    evolve,
    heat_evolve_line,
    spectral_cache,
)
from .transport import (
    DiscretePath,
    SolverOptions,
    TransportResult,
    action,
    displacement_interpolation_1d,
    minimize_action,
    minimize_action_xi,
    reparametrize_eps_geodesic,
    t2_two_point_exact,
    w2_quantile_1d,
)
from .triples import (
    MarkovTriple,
    XiFunction,
    build_triple,
    entropy,
    entropy_production,
    fisher_information,
    gamma,
    gamma2,
    phi_entropy,
    solve_poisson,
    spectral_gap,
    xi_inverse,
    xi_power,
)

__version__ = "0.1.0"
