"""gliorad test suite."""
