"""Dirichlet improvability for L_p norms: continued fractions, critical
lattices, lattice flow, pattern classification and witness constructions."""

__version__ = "0.1.0"
