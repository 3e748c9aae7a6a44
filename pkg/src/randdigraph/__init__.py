"""Random digraph phase transition: exact, asymptotic and brute-force probabilities."""

__version__ = "0.1.0"
