"""Flows of vector fields on graded domains, computed in a single chart."""

from .config import DEFAULT, Config
from .errors import *  # noqa: F401,F403
from .expr import parse
from .flow_nonzero import NonzeroFlow, component_function, flow_even, flow_nonzero, flow_odd
from .flow_zero import (
    FlowJet,
    crosscheck_weight_one,
    fundamental_matrix,
    integrate_underlying,
    reseed,
    solve_pivotal,
)
from .graded import (
    Coordinate,
    GradedFunction,
    GradedSignature,
    enumerate_multiindices,
    parse_graded,
    product_sign,
    split_sign,
)
from .gradedmap import GradedMap, compose, identity, pullback, related
from .problem import ProblemSpec, dumps, load, loads
from .vectorfield import VectorField, apply, bracket, is_homological, underlying_vector_field
from .verify import (
    check_commuting_flows,
    check_flow_axioms,
    check_invariance,
    check_related_equivariance,
    estimate_commuting_domain,
)

__version__ = "0.1.0"
