"""Exact Fourier analysis and wavelet characterization on local fields of positive characteristic."""
