"""Prime censuses for CM elliptic curves: square-free and cyclic reductions."""
__version__ = "0.1.0"
