"""Primal-dual verification workbench.

A generic Lagrangian primal-dual engine and its instances for safety
(predicate-abstraction CEGAR, ICE learning, primal-dual Houdini),
termination (ranking functions and disjunctive well-foundedness),
quantified linear rational arithmetic (strategy skeletons) and fixpoint
logic validity.
"""
__version__ = "0.1.0"
