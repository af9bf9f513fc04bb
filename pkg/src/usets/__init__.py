"""Set-based uncertainty modeling and estimation.

Uncertainty is carried by regions instead of distributions: a variable is a
set of possible realizations, conditioning is a set-valued map, marginals are
projections of the joint set, and evidence updates are intersections.  On
top of that substrate the package provides DAG-factorized uncertainty
networks with d-separation, a scaling-variable point estimator with a
Gaussian MAP backend, triangulation, and a set-membership filter.
"""

from .geometry import (
    Box,
    Ellipsoid,
    EmptyRegion,
    FullRegion,
    HPolytope,
    MembershipOracle,
    Region,
    UnionOfPolytopes,
    Verdict,
    box,
    interval,
    polytope,
    union_of,
)
from .core import (
    ConditionalMap,
    JointVariable,
    UncertaintyVariable,
    VariableSignature,
)
from .network import Dag, DSepQuery, UncertaintyNetwork
from .estimate import EstimateProblem, EstimateResult, GaussianFactor, GaussianNetwork
from .filters import DynamicsModel, NaiveBayesModel, Scenario, Sensor

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Ellipsoid",
    "EmptyRegion",
    "FullRegion",
    "HPolytope",
    "MembershipOracle",
    "Region",
    "UnionOfPolytopes",
    "Verdict",
    "box",
    "interval",
    "polytope",
    "union_of",
    "ConditionalMap",
    "JointVariable",
    "UncertaintyVariable",
    "VariableSignature",
    "Dag",
    "DSepQuery",
    "UncertaintyNetwork",
    "EstimateProblem",
    "EstimateResult",
    "GaussianFactor",
    "GaussianNetwork",
    "DynamicsModel",
    "NaiveBayesModel",
    "Scenario",
    "Sensor",
    "__version__",
]
