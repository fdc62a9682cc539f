"""Namespace for the ``rc2`` optimiser bridge."""
