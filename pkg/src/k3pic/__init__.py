"""Picard lattices of K3 surfaces in the 95 weighted-projective families.

Pipeline: weights -> Newton polytope -> toric resolution -> curve graph and
Picard rank -> elliptic fibrations -> discriminant forms -> overlattices,
plus the mirror scan over the family table.
"""

from .budget import Budget
from .discform import (FiniteQuadraticForm, atom, canonical_label, discriminant_form,
                       enumerate_isotropic, find_isomorphism, is_isomorphic, negate,
                       overlattice_gram, parse_form, quotient_form)
from .fibration import (FibrationReport, KodairaFibre, find_fibrations, jacobian_analysis,
                        mw_bounds, shioda_tate_check)
from .fixtures import FamilyRecord, load_fixtures
from .lattice import GramLattice, parse_lattice_expr, to_gram
from .mirror import MirrorVerdict, mirror_check, mirror_scan
from .polytope import LatticePolytope, WeightVector, build_newton_polytope
from .resolution import CurveGraph, build_curve_graph, picard_rank, resolve_edges

__version__ = "0.1.0"

__all__ = [
    "Budget", "FiniteQuadraticForm", "atom", "canonical_label", "discriminant_form",
    "enumerate_isotropic", "find_isomorphism", "is_isomorphic", "negate",
    "overlattice_gram", "parse_form", "quotient_form", "FibrationReport", "KodairaFibre",
    "find_fibrations", "jacobian_analysis", "mw_bounds", "shioda_tate_check",
    "FamilyRecord", "load_fixtures", "GramLattice", "parse_lattice_expr", "to_gram",
    "MirrorVerdict", "mirror_check", "mirror_scan", "LatticePolytope", "WeightVector",
    "build_newton_polytope", "CurveGraph", "build_curve_graph", "picard_rank",
    "resolve_edges",
]
