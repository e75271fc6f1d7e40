"""Half-space nonlocal gradient operators and asymptotically compatible solvers.

The library evaluates one-sided (half-space) nonlocal gradient and divergence
operators driven by radial kernels, their Fourier symbols with the associated
inequality checks, 1-D Galerkin discretizations of nonlocal diffusion under a
volume constraint, parameter sweeps for nonlocal-to-local limits, and a
box-constrained optimal control solver for the nonlocal state equation.
"""

from . import kernels, symbols, operators, fem1d, experiments, control, cli

__version__ = "0.1.0"

__all__ = [
    "kernels",
    "symbols",
    "operators",
    "fem1d",
    "experiments",
    "control",
    "cli",
    "__version__",
]
