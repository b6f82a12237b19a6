"""Traces of products of Toeplitz matrices and their integral limits."""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .symbol import (CATALOG, AbsSine, Constant, Farima, PowerLaw, Scaled, Sum,
                     Symbol, TrigPolynomial, cos_symbol, evaluate, singularity_profile,
                     symbol_from_record, theorem3_gamma)
from .quadrature import QuadratureSpec
from .spectral import (FourierTable, fourier_coeff, fourier_table, limit_integral, phi,
                       phi_holder_estimate)
from .toeplitz import ToeplitzOperator, build_dense, embed_circulant, matvec
from .trace import (TraceRecord, delta, delta_integral_representation, trace_nu1_closed,
                    trace_product_dense, trace_product_matfree)
from .analysis import (DivergenceReport, ModulusCurve, check_dirichlet_bound, dirichlet,
                       divergence_demo, lemma2_identity, lemma2_scaling, lemma3_Bi,
                       lemma3_stability, lipschitz_fit, lp_inequality_check,
                       modulus_continuity)
from .config import ExperimentConfig, load_config
from .harness import RateFit, fit_rate, preset, run_sweep, verify_all
