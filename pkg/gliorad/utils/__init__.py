"""Utility modules shared across gliorad."""
