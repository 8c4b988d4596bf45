"""Reductions between representations and the concrete catalog."""

from .catalog import (
    bika_par_transitive, bika_seq_transitive, catalog, cka_expand, cka_hoare_zero, cka_leq_one, cka_top,
    ka_transitive, tree_above, tree_hoare_zero, tree_top,
)
from .core import (
    BoundConfig, CommutationReport, CompositionError, ItemReport, Rejected, ReductionReport, ReductionWitness,
    Representation, check_closure_commutation, check_reduction, compose, homomorphic_reduction, identity,
    identity_reduction, reindex,
)

__all__ = [
    "BoundConfig", "CommutationReport", "CompositionError", "ItemReport", "Rejected", "ReductionReport",
    "ReductionWitness", "Representation", "bika_par_transitive", "bika_seq_transitive", "catalog",
    "check_closure_commutation", "check_reduction", "cka_expand", "cka_hoare_zero", "cka_leq_one", "cka_top",
    "compose", "homomorphic_reduction", "identity", "identity_reduction", "ka_transitive", "reindex",
    "tree_above", "tree_hoare_zero", "tree_top",
]
