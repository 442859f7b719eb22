"""Dense LP/SDP solver layer with a uniform status and certificate contract."""

from .lp import farkas_violation, solve_lp
from .problems import (DEFAULT_TOL, LMI, Certificate, LinearProgram,
                       SemidefiniteProgram, Sense, SolveResult, Status)
from .sdp import lmi_farkas_violation, matrix_farkas_violation, solve_sdp

__all__ = [
    "DEFAULT_TOL", "LMI", "Certificate", "LinearProgram", "SemidefiniteProgram",
    "Sense", "SolveResult", "Status", "farkas_violation", "lmi_farkas_violation",
    "matrix_farkas_violation", "solve_lp", "solve_sdp",
]
