"""Finite Hart-Shelah classes K^n: models, solutions, types, nonforking and amalgamation."""

from __future__ import annotations

from .amalgamation import (
    Amalgam,
    amalgams_equivalent,
    disjoint_amalgam,
    mediator,
    non_uniqueness_witness,
    uniqueness_check_one_point,
)
from .forking import ForkingQuery, Nonforking, nonforking_decide, splits_finite
from .galois import TypeInstance, existential_fingerprint, galois_type_equal, is_basic_type
from .generators import gen_random_model, make_rng
from .io import parse_element, parse_embedding, parse_model, parse_solution, serialize_model
from .morphisms import Embedding, check_embedding, compose, identity, inclusion, invert
from .nf import NFChain, build_nf_witness, nf_decide
from .solutions import (
    Solution,
    Unsat,
    amalgamate_solutions,
    check_solution,
    extend_solution,
    iso_from_solutions,
    solve_solution,
)
from .structure import Element, Model, ModelError, StalkPoint, make_model, make_standard_model, validate_model
from .suites import SuiteReport, replay, run_property_suite

__version__ = "0.1.0"
