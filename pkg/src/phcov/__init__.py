"""Time-variant port-Hamiltonian systems with connections.

Library layers: :mod:`phcov.geometry` (charts, connections, covariant
derivative), :mod:`phcov.fields`, :mod:`phcov.systems`,
:mod:`phcov.transform`, :mod:`phcov.mechanics`, :mod:`phcov.tracking`
and :mod:`phcov.runner` (integration, scenarios, CLI support).
"""

from .fields import (DissipationField, InputField, ScalarField, StructureField, check_structure,
                     decompose_dH, grad_check)
from .geometry import (BundleChart, Connection, CotangentVector, Curve, SplitCotangent,
                       SplitTangent, TangentVector, covariant_derivative, split_cotangent,
                       split_tangent, transform_connection)
from .systems import (InputSignal, PortHamiltonianSystem, PowerTerms, collocated_output,
                      eval_dynamics, linear_system, power_decomposition, vertical_field)
from .transform import (InputTransformation, MatchingCandidate, MatchingFailure,
                        StateTransformation, matching_residual, push_system, solve_matching_lq,
                        transformed_output)

__version__ = "0.1.0"
