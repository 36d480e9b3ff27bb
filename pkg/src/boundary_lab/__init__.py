"""Exact boundary-representation audits on tree models of hyperbolic groups."""

from .audit import AuditReport
from .errors import (CacheError, ConfigError, DomainError, LabError, ParameterError,
                     RefinementRequired, ResourceError)
from .intertwiner import apply_It, kernel_value, riesz, self_energy, sigma, sigma_tilde
from .lorentz import lorentz_norm, rearrangement
from .measure import CylinderFunction, cylinders, pairing, ps_mass, refine, visual_distance
from .representation import (GroupAverage, RepParameter, apply_pi, matrix_coefficient,
                             operator_norm, phi_tilde, spherical)
from .tree import (TreeModel, Word, busemann, gromov, inverse, multiply, reduce,
                   shadow_cylinder, sphere_band)

__all__ = [
    "AuditReport", "CacheError", "ConfigError", "CylinderFunction", "DomainError",
    "GroupAverage", "LabError", "ParameterError", "RefinementRequired", "RepParameter",
    "ResourceError", "TreeModel", "Word", "apply_It", "apply_pi", "busemann", "cylinders",
    "gromov", "inverse", "kernel_value", "lorentz_norm", "matrix_coefficient", "multiply",
    "operator_norm", "pairing", "phi_tilde", "ps_mass", "rearrangement", "reduce", "refine",
    "riesz", "self_energy", "shadow_cylinder", "sigma", "sigma_tilde", "sphere_band",
    "spherical", "visual_distance",
]

__version__ = "0.1.0"
