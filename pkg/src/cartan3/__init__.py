"""Numerics for type III Cartan domains: kernels, moment maps, Toeplitz spectra."""
__version__ = "0.1.0"
