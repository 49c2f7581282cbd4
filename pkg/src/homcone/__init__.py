"""Wishart laws on homogeneous cones in matrix realization.

A cone is described by a :class:`BlockStructure`; the cone ``P_V`` and its dual
``Q_V`` live in the space ``Z_V`` of symmetric matrices with prescribed blocks.
"""
from .errors import (ConeError, InvalidShape, NotHomogeneous, NotInCone, NotInDualCone, NotInZ,
                     NotPositiveDefinite, PermutationNotFound, StructureError)
from .structure import (BlockStructure, ValidationReport, dual_vinberg, full_structure,
                        graph_to_structure, preset, project_pi, validate_structure, vinberg)
from .power import Delta, delta, grad_log_Delta, grad_log_delta, phi, phi_check, psi_formula, q
from .triangular import chi, cholesky_P, decompose_Q, hat, rho, rho_star
from .wishart import (GindikinClass, ZOperator, gindikin, inverse_mean_P, inverse_mean_Q,
                      laplace_P, laplace_Q, lauritzen, mean_P, mean_Q, variance_P, variance_Q)
from .dual import DualRealization, check_strange, dualize, phi_big, variance_P_via_dual
from .kernels import BACKEND

__version__ = "0.1.0"
