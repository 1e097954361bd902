"""
Core Module
===========
Discretization geometry, tissue maps, space-time fields and their algebra.
"""
