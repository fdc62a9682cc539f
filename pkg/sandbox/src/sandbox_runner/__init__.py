"""Isolated executor for generated encoding programs.

One subprocess per request, a stripped environment, a hard wall-clock
kill, and a bridge package (importable as ``pysat``) that delegates
optimisation to an external solver command.
"""

__version__ = "0.1.0"
