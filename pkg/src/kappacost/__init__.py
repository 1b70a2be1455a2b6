"""Exact PPT entanglement cost toolkit for bipartite states and channels."""

__version__ = "0.1.0"
