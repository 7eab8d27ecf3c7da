"""Finite-scale experiments around dense sets, Erdős cubes and sumsets.

Modules: ``setspec`` (integer sets and densities), ``correspondence``
(sets as symbolic points), ``dynsys`` (rotations, skew product, orbit
scans), ``cube`` (cube calculus and cube tests), ``measure`` (exact cube
measures and Birkhoff averages), ``sumset`` (greedy and exhaustive sumset
search) and ``cli``.
"""

from .errors import (BoundExceededError, SpecError, SumsetLabError,
                     WindowOverflowError)

__version__ = "0.1.0"

__all__ = ["BoundExceededError", "SpecError", "SumsetLabError", "WindowOverflowError",
           "__version__"]
