"""Weighted statistics of the last n decimal digits of powers of two."""
from .digits import (
    BoundaryVector,
    CongruenceSolution,
    WeightFunction,
    boundary_vector,
    congruence_solutions,
    decimal_value,
    omega_size,
)
from .kernels import BACKEND
from .transfer import (
    InfeasiblePlan,
    MeetPlan,
    SparseState,
    TransferState,
    backward_step,
    choose_meet,
    forward_step,
    forward_vector,
    weighted_omega_sum,
    weighted_omega_sum_exact,
)
from .bounds import PsiResult, psi

__version__ = "0.1.0"
