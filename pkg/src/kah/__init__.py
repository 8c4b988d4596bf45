"""Kleene algebra with hypotheses: bounded semantics, derivations, decision procedures and reductions."""
