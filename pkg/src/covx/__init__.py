"""Extremality tests, witnesses and linear optimization for group-covariant
POVMs and quantum operations in finite dimension."""
from .channels import (ChoiOperator, CovariantChoi, apply_channel, apply_heisenberg, builtin_examples,
                       check_tni, choi_extremality_noncov, choi_from_kraus, covariance_check, covariant_choi,
                       from_commutant, kraus_from_choi, project_covariant, qo_extremality)
from .config import RunConfig
from .engine import ExtremalityReport
from .errors import (ContractViolation, CovxError, DecompositionError, DimensionError, ParseError,
                     ProjectionError, UnsupportedCombination)
from .numkernel import (hermitian_eig, is_hermitian, is_psd, is_unitary, op_to_vec, partial_trace,
                        psd_factor, span_dimension, svd, vec_to_op)
from .optimizer import ConvexSetSpec, CostOperator, maximize_linear, project_feasible
from .povm import (PovmSeed, check_seed, density_at, extremality, necessary_rank_bound,
                   probability_density, single_class_extremality)
from .reps import (FiniteGroup, GroupElement, IsotypicDecomposition, SUdTensor, U1Weights,
                   isotypic_decompose)

__version__ = "0.1.0"
