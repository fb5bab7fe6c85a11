"""Sparse random linear network coding with overlapping classes."""
