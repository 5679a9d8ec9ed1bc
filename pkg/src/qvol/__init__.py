"""Reshetikhin-Turaev invariants of twist-knot fillings and their hyperbolic volume."""

__version__ = "0.1.0"
