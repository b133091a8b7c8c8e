"""Entropy, integrability and evolutionary-form diagnostics for ideal-gas flows."""

__version__ = "0.1.0"
