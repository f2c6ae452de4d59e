"""First-passage percolation on random graphs: shortest-path-tree degrees and
the limiting laws they converge to."""

__version__ = "0.1.0"
