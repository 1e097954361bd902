"""
I/O Module
===========
Run configuration, result files and run orchestration.
"""
