"""Minimal solver-construction interface for sandboxed programs.

Provides exactly the surface generated programs are told to use:
``pysat.formula.WCNF`` and ``pysat.examples.rc2.RC2``.
"""
