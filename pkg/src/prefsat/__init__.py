"""Preference-based MaxSAT workbench.

Turns preference-laden optimisation problems (independent set, single-machine
scheduling, set cover) into weighted partial MaxSAT instances, solves them
exactly, verifies candidate solutions, and evaluates LLM-driven encoding
strategies against the exact optima.
"""

__version__ = "0.1.0"
