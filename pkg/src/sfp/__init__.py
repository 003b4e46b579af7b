"""Scale-free / long-range percolation on finite lattice boxes.

Simulation with exactly coupled models, closed-form and quadrature
moment calculators, path-hierarchy machinery, and a reproducible
Monte-Carlo experiment harness.  See the `sfp` command-line entry point.
"""

__version__ = "0.1.0"

from .params import (DerivedExponents, ModelKind, ModelParams, Regime,
                     RegimeLabel, classify_regime, derived_exponents,
                     validate_params)

__all__ = [
    "__version__",
    "DerivedExponents", "ModelKind", "ModelParams", "Regime", "RegimeLabel",
    "classify_regime", "derived_exponents", "validate_params",
]
