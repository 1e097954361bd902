"""
Control Module
==============
Objectives, adjoint gradients, projected gradient descent and the bathtub principle.
"""
