"""Certificates, checks and counterexample search for operator Bohr-type inequalities."""

__version__ = "0.1.0"
