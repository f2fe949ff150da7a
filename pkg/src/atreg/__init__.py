"""Arnoldi-Tikhonov regularization for discrete ill-posed problems.

The solver picks the Tikhonov parameter on the fly from the GMRES
residual of the same Krylov subspace, so the noise level need not be known.
"""
from .arnoldi import ArnoldiState, arnoldi, arnoldi_init, arnoldi_step
from .errors import *  # noqa: F401,F403
from .operators import (LinearOperator, RegOperator, blur_operator,
                        dense_operator, deriv1, deriv2, grad2d, identity)
from .problems import (NoisySystem, TestProblem, add_noise, gen_baart,
                       gen_blur, gen_foxgood, gen_ilaplace, gen_shaw,
                       make_problem)
from .tikhonov import IterationRecord, SolveResult, SolverConfig, at_solve

__version__ = '0.1.0'
