"""
Verification Module
===================
Closed-form oracles, manufactured solutions and invariant suites.
"""
