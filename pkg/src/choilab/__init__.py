"""Choi-matrix calculus for positive maps on matrix algebras."""
from .choi import (ChoiSplit, LinearMap, ad_v_choi, adjoint_map, apply_map, choi_of_map, identity_map,
                   kraus_map, phi_lambda, split_choi, trace_map, transpose_conjugate)
from .config import RunConfig
from .norms import (Cone, NormResult, SchmidtInfo, ky_fan_proj, ky_fan_sq, map_cone_norm, schmidt_info,
                    schmidt_op_norm, schmidt_vector_norm)

__version__ = "0.1.0"
