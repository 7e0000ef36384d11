"""Ergodic averages over balls, shells and bi-sectors in rank one Lie groups.

Subpackages, in dependency order:

``geometry``    PSL2(R), the upper half-plane, Cartan / Iwasawa / KNK coordinates
``arcs``        arc sets and piecewise-constant densities on K
``radial``      radial Haar densities and inverse-CDF samplers
``measures``    the averaging families and their group-valued samplers
``dynamics``    the modular surface and torus flows
``estimators``  Monte Carlo and quadrature averages, sweeps, maximal ratios
``config``, ``reports``, ``cli``  experiment files and the command line
"""

__version__ = "0.1.0"

from hypererg.arcs import ArcSet, KDensity
from hypererg.errors import (
    ConfigError,
    DegenerateEvaluationError,
    DomainError,
    NotUnimodularError,
    QuadratureError,
)
from hypererg.geometry import GroupElement, Point, RankOneProfile
from hypererg.measures import MeasureFamily

__all__ = [
    "ArcSet", "KDensity", "GroupElement", "Point", "RankOneProfile", "MeasureFamily",
    "ConfigError", "DegenerateEvaluationError", "DomainError", "NotUnimodularError",
    "QuadratureError", "__version__",
]
