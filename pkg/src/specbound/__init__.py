"""Finite spectral models and eigenvalue-enclosure checks for Schrodinger
operators with complex potentials."""

__version__ = "0.1.0"

from . import bounds, linalg, manifolds, operators, potentials, randomization, regions

__all__ = [
    "__version__",
    "bounds",
    "linalg",
    "manifolds",
    "operators",
    "potentials",
    "randomization",
    "regions",
]
