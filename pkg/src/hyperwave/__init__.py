"""Quasi-periodic solutions of nonlinear wave equations on lattices.

Exact radical arithmetic for the genericity conditions, bi-characteristics
of the linear flow, the doubled linearized operator and its gaps, a
Lyapunov-Schmidt Newton solver and a pseudospectral Cauchy integrator.
"""
__version__ = "0.1.0"

from .radicals import RadicalNumber, radical_det  # noqa: E402
from .lattice import AnalyticNorm, SpectralCoeffs, convolution_power, convolve  # noqa: E402
from .genericity import LinearSeed, SeedError, certify  # noqa: E402
from .characteristics import Box, enumerate_characteristics, diophantine_profile  # noqa: E402
from .operator import assemble_FprimeN, truncated_gap  # noqa: E402
from .solver import SolutionArtifact, solve  # noqa: E402
from .cauchy import initial_from_seed, lifetime_run  # noqa: E402

__all__ = ["RadicalNumber", "radical_det", "AnalyticNorm", "SpectralCoeffs", "convolution_power",
           "convolve", "LinearSeed", "SeedError", "certify", "Box", "enumerate_characteristics",
           "diophantine_profile", "assemble_FprimeN", "truncated_gap", "SolutionArtifact", "solve",
           "initial_from_seed", "lifetime_run", "__version__"]
