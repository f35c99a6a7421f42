"""Numerical tolerances shared by every module and test."""

UNITARITY = 1e-10
DENSITY = 1e-10
NORMALIZATION = 1e-12
ZERO_AMPLITUDE = 1e-12  # applied to weights (squared norms)
TRACE = 1e-12
EIG_RECONSTRUCTION = 1e-9
EIG_NONZERO = 1e-10
FIDELITY = 1e-10
IDENTITY_CHECK = 1e-10
DEUTSCH_RESIDUAL = 1e-10
DEUTSCH_AGREEMENT = 1e-8
DEUTSCH_EIGENVALUE_ONE = 1e-8
DEUTSCH_MAX_ITERATIONS = 10_000
