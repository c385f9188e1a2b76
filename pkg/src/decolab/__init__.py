"""Numerical decoherence lab: pointer-state overlaps, reduced density
matrices and premeasurement under purely unitary evolution."""

__version__ = "0.1.0"
