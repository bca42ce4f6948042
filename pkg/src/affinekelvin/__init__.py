"""Transition densities and derivative pricing for affine processes.

The exponential-affine ("wave") ansatz with time-dependent wave vectors turns
the backward equations of affine diffusions and jump-diffusions into small ODE
systems. This package solves those systems in closed form where possible and
numerically otherwise, builds transition densities and characteristic
functions on top, and uses them for option, swap, bond and market-maker-hedge
pricing, with a Monte Carlo lab as the independent cross-check.
"""

__version__ = "0.1.0"

from . import amm, gaussian, hydro, mclab, nongaussian, numerics, odes, pricing

__all__ = ["amm", "gaussian", "hydro", "mclab", "nongaussian", "numerics",
           "odes", "pricing", "__version__"]
