"""Exact verification of relative unitary and doubly laced Steinberg presentations
over small finite rings."""

__version__ = "0.1.0"
