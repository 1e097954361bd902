"""Command-line interface for gliorad."""
