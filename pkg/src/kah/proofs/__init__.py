"""Horn-theory deduction: axiomatisations, derivations, provers and the counter-model."""

from .core import (
    Axiomatisation, CheckResult, Derivation, HornSentence, axiomatisation, check_derivation,
    derivation_from_json, derivation_to_json, instance_axioms, naive_axioms,
)
from .countermodel import CElem, CountermodelReport, countermodel_check, countermodel_eval
from .kit import Eq, Kit, ProofError
from .provers import (
    MembershipProver, NotAMember, NotFound, prove_inclusion_fixpointfree, prove_membership, sum_of_terms,
)

__all__ = [
    "Axiomatisation", "CElem", "CheckResult", "CountermodelReport", "Derivation", "Eq", "HornSentence", "Kit",
    "MembershipProver", "NotAMember", "NotFound", "ProofError", "axiomatisation", "check_derivation",
    "countermodel_check", "countermodel_eval", "derivation_from_json", "derivation_to_json", "instance_axioms",
    "naive_axioms", "prove_inclusion_fixpointfree", "prove_membership", "sum_of_terms",
]
