"""
Entry point for `python -m gliorad`.

Delegates to the CLI so both `python -m gliorad` and the `gliorad`
console script behave identically.
"""

from gliorad.cli.__main__ import run


if __name__ == "__main__":
    run()
