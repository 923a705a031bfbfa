"""Numerical experiments for the one-dimensional periodic Dysthe equation.

Submodules:

* :mod:`dysthe.spectral`: Fourier fields, the dispersion relation, propagators
* :mod:`dysthe.resonance`: counting solutions of the resonance equation
* :mod:`dysthe.norms`: Sobolev, Lebesgue and Bourgain norms
* :mod:`dysthe.estimates`: empirical checks of Strichartz and multilinear bounds
* :mod:`dysthe.dynamics`: nonlinearity, Picard iterates, viscous solver
* :mod:`dysthe.cli`: the ``dysthe`` command
"""
from .spectral import (
    SpaceTimeField,
    SpectralField,
    dispersion,
    free_evolution,
    propagate,
)
from .resonance import ResonanceQuery, count_bruteforce, count_divisor
from .norms import lp_norm, sobolev_norm, xsb_norm, ysb_norm, zsb_norm
from .estimates import RandomFieldSpec, RatioReport
from .dynamics import ViscousParams, illposedness_experiment, third_picard_iterate, viscous_solve

__version__ = "0.1.0"

__all__ = [
    "SpectralField",
    "SpaceTimeField",
    "dispersion",
    "propagate",
    "free_evolution",
    "ResonanceQuery",
    "count_bruteforce",
    "count_divisor",
    "lp_norm",
    "sobolev_norm",
    "xsb_norm",
    "ysb_norm",
    "zsb_norm",
    "RandomFieldSpec",
    "RatioReport",
    "ViscousParams",
    "illposedness_experiment",
    "third_picard_iterate",
    "viscous_solve",
]
