"""Exact desk-scale toolkit for decalage, Bockstein complexes, Witt vectors,
q-de Rham complexes of tori and F-V-procomplexes."""

__version__ = "0.1.0"
