"""
gliorad - Glioma Radiotherapy Optimal Control
==============================================

Simulates the reaction-diffusion tumor model

    u_t - div(D(x) grad u) = (rho - R(x, t)) u (1 - u),   no-flux boundary,

computes adjoint-based gradients of the tumor-burden objective and searches
for optimal radiation schedules R(x, t) by projected gradient descent and by
the closed-form bathtub reconstruction.

Subpackages:
  - gliorad.core          grids, tissue maps, space-time fields
  - gliorad.solvers       forward, adjoint and sensitivity time stepping
  - gliorad.control       objectives, gradients, optimizer, bathtub principle
  - gliorad.verification  oracles and invariant suites
  - gliorad.io            configuration, result files, run orchestration
  - gliorad.cli           command-line entry point
"""

__version__ = "0.1.0"
