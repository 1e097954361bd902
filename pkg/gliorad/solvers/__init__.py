"""
Solvers Module
==============
Backward-Euler time stepping for the forward, adjoint and sensitivity equations.
"""
