"""
Solver Settings and Linear Solves
==================================

Every implicit step ends in a sparse symmetric system

    (I + dt A - dt diag(c)) x = b

1D systems are tridiagonal and go straight to a direct solve. 2D systems
use conjugate gradients with a Jacobi preconditioner; if CG fails to reach
the tolerance the solve falls back to the direct path with a warning.
"""

from enum import Enum

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.linalg import cg, spsolve

from gliorad.core.errors import SolverError
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


class AdjointScheme(str, Enum):
    """
    How the adjoint equation is discretized.

    continuous: backward Euler on the time-reversed adjoint PDE.
    discrete:   exact transpose of the discretized forward map, so adjoint
                gradients agree with finite differences to solver precision.
    """

    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class SolverConfig(BaseModel):
    """Newton and linear-solver tolerances shared by all time steppers."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    newton_tolerance: float = Field(default=1e-10, gt=0)
    newton_max_iterations: int = Field(default=50, ge=1)
    linear_solver_tolerance: float = Field(default=1e-12, gt=0)
    adjoint_scheme: AdjointScheme = AdjointScheme.CONTINUOUS


class StepSystem:
    """
    The implicit-step matrix I + dt A - dt diag(reaction).

    The sparsity pattern of I + dt A is built once; each call only rewrites
    the diagonal, since Newton and the adjoint sweep change nothing else.
    """

    def __init__(
        self,
        operator_matrix: sp.csr_matrix,
        dt: float,
        config: SolverConfig,
        iterative: bool = False,
    ):
        size = operator_matrix.shape[0]
        base = (sp.identity(size, format="csr") + dt * operator_matrix).tocsr()
        base.sort_indices()
        rows = np.repeat(np.arange(size), np.diff(base.indptr))
        self._diagonal = np.flatnonzero(base.indices == rows)
        self._base = base
        self._base_diagonal = base.data[self._diagonal].copy()
        self.dt = dt
        self.config = config
        self.iterative = iterative

    def matrix(self, reaction: np.ndarray) -> sp.csr_matrix:
        system = self._base.copy()
        system.data[self._diagonal] = self._base_diagonal - self.dt * reaction
        return system

    def solve(self, reaction: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        return solve_linear(self.matrix(reaction), rhs, self.config, iterative=self.iterative)


def solve_linear(
    matrix: sp.csr_matrix,
    rhs: np.ndarray,
    config: SolverConfig,
    iterative: bool = False,
) -> np.ndarray:
    """
    Solve matrix @ x = rhs.

    Raises:
        SolverError: if the result is not finite.
    """
    if iterative:
        diagonal = matrix.diagonal()
        preconditioner = sp.diags(1.0 / diagonal)
        solution, info = cg(
            matrix, rhs, rtol=config.linear_solver_tolerance, atol=0.0, M=preconditioner
        )
        if info != 0:
            logger.warning(f"CG stopped with info={info}; falling back to a direct solve")
            solution = spsolve(matrix.tocsc(), rhs)
    else:
        solution = spsolve(matrix.tocsc(), rhs)

    solution = np.asarray(solution, dtype=float).reshape(np.shape(rhs))
    if not np.all(np.isfinite(solution)):
        raise SolverError("linear solve produced non-finite values")
    return solution
