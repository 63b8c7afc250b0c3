"""Numerical core: linear algebra, spectra, solvers, theory and experiments"""
