"""Numerical verification toolkit for positive-isotropic-curvature band geometry.

Subpackages cover exact exterior/Clifford algebra, algebraic curvature
tensors and PIC frame searches, comparison-geometry barriers with an ODE
oracle, the bandwidth and focal-radius potential constructions, flat-grid
integral identities, and twisted discrete Hodge theory.
"""

__version__ = "0.1.0"
