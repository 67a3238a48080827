"""weightlab: numerical verification of weight theory on finite-dimensional
C*-algebras: GNS constructions, KMS and modular theory, slice maps, tensor
product weights and convex extraction."""

from .algebra import Element, FdAlgebra, func_calc, is_positive, make_algebra
from .dynamics import (OneParamGroup, act, analytic_ext, gaussian_smooth,
                       gibbs_weight, kms_check, modular_group_of,
                       modular_objects, tomita_check)
from .gns import gns_construct, lift_automorphism, t_omega, wstar_lift, xi_omega
from .hullx import convex_extract, hull_project, strong_star_variant
from .slicemaps import TensorElement, ksgns, slice_b, slice_phi, tensor_embed
from .tensorprod import joint_gns, tensor_weight
from .weights import (Functional, Weight, combes_sup, functional_abs,
                      gphi_chain, is_dominated, random_faithful_weight,
                      trace_weight)

__version__ = "0.1.0"

__all__ = [
    "Element", "FdAlgebra", "func_calc", "is_positive", "make_algebra",
    "OneParamGroup", "act", "analytic_ext", "gaussian_smooth", "gibbs_weight",
    "kms_check", "modular_group_of", "modular_objects", "tomita_check",
    "gns_construct", "lift_automorphism", "t_omega", "wstar_lift", "xi_omega",
    "convex_extract", "hull_project", "strong_star_variant",
    "TensorElement", "ksgns", "slice_b", "slice_phi", "tensor_embed",
    "joint_gns", "tensor_weight",
    "Functional", "Weight", "combes_sup", "functional_abs", "gphi_chain",
    "is_dominated", "random_faithful_weight", "trace_weight",
]
