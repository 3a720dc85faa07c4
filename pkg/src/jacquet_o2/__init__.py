"""Exact twisted Jacquet modules of parabolically induced representations of
GL_4 over o2 = F_q[w]/(w^2)."""

__version__ = "0.1.0"
