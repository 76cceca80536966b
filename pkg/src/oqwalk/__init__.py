"""Open-quantum-walk toolkit: exact evolution, closed-form chain analysis,
channel realizations, unitary dilations, and gate-level circuit synthesis."""

from .core import (
    DiagonalState,
    LinearChainSpec,
    OqwSpec,
    chain_to_spec,
    evolve,
    node_distribution,
    step,
    validate,
)

__all__ = [
    "OqwSpec",
    "DiagonalState",
    "LinearChainSpec",
    "validate",
    "step",
    "evolve",
    "node_distribution",
    "chain_to_spec",
]
