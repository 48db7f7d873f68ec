"""gridmrf: simulation and statistical inference for finite-valued,
homogeneous, pairwise-interaction Markov random fields on 2-D lattices,
with hidden-MRF Gaussian mixture segmentation and an exact brute-force
oracle at toy scale.
"""

__version__ = "0.1.0"

from .fields import (DiscreteField, FieldFormatError, PixelRegion, RealField,
                     read_discrete_field, read_pgm, read_real_csv,
                     read_region, write_discrete_field, write_pgm,
                     write_real_csv, write_region)
from .interactions import (InteractionStructure, build_structure, difference,
                           read_positions, subset, union, write_positions)
from .potentials import (FAMILIES, PotentialArray, expand_array, family_dim,
                         read_model_spec, summarize_array, validate_family,
                         write_model_spec)
from .kernel import (CooccurrenceHistogram, SufficientStatistics, cohist,
                     conditional_probs, energy, local_field,
                     pseudo_likelihood, pl_gradient, suff_stat)
from .sampler import GibbsChain, SamplerConfig, sample_conditional, sample_mrf
from .estimators import (FitError, MrfFit, default_gamma_sequence, fit_pl,
                         fit_sa, select_interactions)
from .hmrf import (BasisSet, HmrfFit, MixtureParams, fit_ghm, fourier_basis,
                   init_from_quantiles, polynomial_basis)
from .oracle import (EnumerationBoundError, ExactModel, MleBoundaryError,
                     exact_conditional, exact_expected_stats, exact_mle,
                     partition_function, partition_function_transfer)
from .render import render_field, render_to_png
from .cli import run, summary_report

__all__ = [
    "DiscreteField", "RealField", "PixelRegion", "FieldFormatError",
    "read_discrete_field", "write_discrete_field", "read_pgm", "write_pgm",
    "read_real_csv", "write_real_csv", "read_region", "write_region",
    "InteractionStructure", "build_structure", "union", "difference",
    "subset", "read_positions", "write_positions",
    "FAMILIES", "PotentialArray", "expand_array", "summarize_array",
    "validate_family", "family_dim", "read_model_spec", "write_model_spec",
    "CooccurrenceHistogram", "SufficientStatistics", "cohist", "suff_stat",
    "energy", "local_field", "conditional_probs", "pseudo_likelihood",
    "pl_gradient",
    "SamplerConfig", "GibbsChain", "sample_mrf", "sample_conditional",
    "MrfFit", "FitError", "fit_pl", "fit_sa", "select_interactions",
    "default_gamma_sequence",
    "MixtureParams", "BasisSet", "HmrfFit", "polynomial_basis",
    "fourier_basis", "init_from_quantiles", "fit_ghm",
    "ExactModel", "EnumerationBoundError", "MleBoundaryError",
    "partition_function", "partition_function_transfer", "exact_conditional",
    "exact_expected_stats", "exact_mle",
    "render_field", "render_to_png",
    "run", "summary_report",
]
