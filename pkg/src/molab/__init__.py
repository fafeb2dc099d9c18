"""Numerical laboratory for Musielak-Orlicz spaces.

Modulars with divergence certificates, Luxemburg norms, singular-set
estimates, the smooth density pipeline and witnesses against density.
"""

__version__ = "0.1.0"

from .density import (ApproximationTrace, NondensityWitness, PreconditionError, approximate_in_E,
                      approximate_indicator, measure_convergence_check, smooth_urysohn, witness_nondensity)
from .descriptors import Descriptor
from .families import (Delta2Certificate, Delta2Rejection, MOFunction, PoleInfo, check_double_phase_delta2,
                       family_from_json, level_set_decomposition, make_double_phase, make_orlicz, make_phi1,
                       make_phi2, make_variable_exponent, make_weighted_linear, validate_mo_function,
                       verify_delta2)
from .functions import Bump, PiecewiseFunction, combine, smoothstep
from .geometry import Box, BoxSet, nested_open_covers
from .luxemburg import NormResult, luxemburg_norm, membership_probe, norm_modular_convergence_check
from .modular import Accuracy, DivergenceCertificate, ModularResult, check_certificate, modular, modular_oracle
from .singular import closedness_check, estimate_singular_set, local_integrability_probe

__all__ = [
    "Accuracy", "ApproximationTrace", "Box", "BoxSet", "Bump", "Delta2Certificate", "Delta2Rejection",
    "Descriptor", "DivergenceCertificate", "MOFunction", "ModularResult", "NondensityWitness", "NormResult",
    "PiecewiseFunction", "PoleInfo", "PreconditionError", "approximate_in_E", "approximate_indicator",
    "check_certificate", "check_double_phase_delta2", "closedness_check", "combine", "estimate_singular_set",
    "family_from_json", "level_set_decomposition", "local_integrability_probe", "luxemburg_norm",
    "make_double_phase", "make_orlicz", "make_phi1", "make_phi2", "make_variable_exponent",
    "make_weighted_linear", "measure_convergence_check", "membership_probe", "modular", "modular_oracle",
    "nested_open_covers", "norm_modular_convergence_check", "smooth_urysohn", "smoothstep",
    "validate_mo_function", "verify_delta2", "witness_nondensity",
]
