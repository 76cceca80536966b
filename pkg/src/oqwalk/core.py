"""Open-quantum-walk formalism: validated walk specifications, the one-step
recursion on diagonal states, and the linear-chain computation model.

A walk is a graph whose directed edges (i, j) carry jump operators B_i^j on
the walker's internal space, subject to the completeness condition
sum_j B_i^j† B_i^j = I at every node. States are kept in diagonal form,
one unnormalized block per node; evolution never produces cross-node
blocks, so the representation is closed under stepping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .matrixkit import asmatrix, dagger, is_unitary

CONSTRUCTION_TOL = 1e-10


@dataclass(frozen=True)
class OqwSpec:
    """Walk specification: node count, walker dimension, jump operators.

    ``jumps`` maps (source, target) to the jump operator for that edge;
    absent pairs are zero operators (omitted edges).
    """

    n_nodes: int
    walker_dim: int
    jumps: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("need at least one node")
        if self.walker_dim < 1:
            raise ValueError("walker dimension must be positive")
        for (i, j), b in self.jumps.items():
            b = asmatrix(b)
            if b.shape != (self.walker_dim, self.walker_dim):
                raise ValueError(f"jump ({i},{j}) has shape {b.shape}, "
                                 f"expected {(self.walker_dim,) * 2}")
            for node in (i, j):
                if not 0 <= node < self.n_nodes:
                    raise ValueError(f"jump ({i},{j}) references a node outside "
                                     f"0..{self.n_nodes - 1}")

    def jump(self, i: int, j: int) -> np.ndarray:
        return self.jumps.get((i, j), np.zeros((self.walker_dim,) * 2, dtype=complex))


@dataclass
class DiagonalState:
    """Diagonal-form state: one unnormalized PSD block per node.

    Blocks missing from the map are zero. Total trace should be 1 for a
    normalized state.
    """

    n_nodes: int
    blocks: dict = field(default_factory=dict)

    def block(self, i: int) -> np.ndarray:
        if i in self.blocks:
            return self.blocks[i]
        dims = next(iter(self.blocks.values())).shape
        return np.zeros(dims, dtype=complex)

    @property
    def walker_dim(self) -> int:
        return next(iter(self.blocks.values())).shape[0]

    def total_trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks.values()))

    def validate(self, tol: float = CONSTRUCTION_TOL) -> None:
        if abs(self.total_trace() - 1.0) > tol:
            raise ValueError(f"state trace {self.total_trace()} is not 1")
        for i, b in self.blocks.items():
            lo = np.linalg.eigvalsh((b + b.conj().T) / 2).min()
            if lo < -tol:
                raise ValueError(f"block {i} is not PSD (min eigenvalue {lo:.3e})")

    @staticmethod
    def pure(psi, node: int, n_nodes: int) -> "DiagonalState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return DiagonalState(n_nodes, {node: np.outer(psi, psi.conj())})


@dataclass(frozen=True)
class LinearChainSpec:
    """Linear-chain computation model: N nodes, rightward bias omega, and
    unitaries U_0 .. U_{N-2} applied on the rightward jumps.

    The walker steps right with probability omega applying U_i, left with
    probability 1 - omega applying U_{i-1}†, and holds at the boundaries.
    """

    n_nodes: int
    omega: float
    unitaries: tuple

    def __init__(self, n_nodes: int, omega: float, unitaries):
        if n_nodes < 2:
            raise ValueError("a chain needs at least two nodes")
        if not 0.0 <= omega <= 1.0:
            raise ValueError(f"omega must be in [0, 1], got {omega}")
        us = tuple(asmatrix(u) for u in unitaries)
        if len(us) != n_nodes - 1:
            raise ValueError(f"need {n_nodes - 1} unitaries for {n_nodes} nodes, got {len(us)}")
        dim = us[0].shape[0]
        for k, u in enumerate(us):
            if u.shape != (dim, dim):
                raise ValueError(f"unitary {k} has shape {u.shape}, expected {(dim, dim)}")
            if not is_unitary(u, CONSTRUCTION_TOL):
                raise ValueError(f"matrix {k} is not unitary within {CONSTRUCTION_TOL}")
        object.__setattr__(self, "n_nodes", n_nodes)
        object.__setattr__(self, "omega", float(omega))
        object.__setattr__(self, "unitaries", us)

    @property
    def lam(self) -> float:
        return 1.0 - self.omega

    @property
    def walker_dim(self) -> int:
        return self.unitaries[0].shape[0]


def validate(spec: OqwSpec, tol: float = CONSTRUCTION_TOL) -> list:
    """Check the completeness sum at every node.

    Returns a list of (node, deviation) pairs, empty iff
    max |sum_j B_i^j† B_i^j - I| <= tol at every node i.
    """
    violations = []
    eye = np.eye(spec.walker_dim)
    for i in range(spec.n_nodes):
        acc = np.zeros((spec.walker_dim,) * 2, dtype=complex)
        for (src, _), b in spec.jumps.items():
            if src == i:
                acc += dagger(b) @ asmatrix(b)
        dev = float(np.abs(acc - eye).max())
        if dev > tol:
            violations.append((i, dev))
    return violations


def step(spec: OqwSpec, state: DiagonalState) -> DiagonalState:
    """One walk step: rho'_j = sum_i B_i^j rho_i B_i^j†.

    Total trace is preserved (to roundoff) whenever the spec satisfies the
    completeness condition.
    """
    if state.n_nodes != spec.n_nodes:
        raise ValueError(f"state has {state.n_nodes} nodes, spec has {spec.n_nodes}")
    if state.walker_dim != spec.walker_dim:
        raise ValueError(f"state walker dim {state.walker_dim} != spec dim {spec.walker_dim}")
    out: dict = {}
    for (i, j), b in spec.jumps.items():
        rho_i = state.blocks.get(i)
        if rho_i is None:
            continue
        b = asmatrix(b)
        contrib = b @ rho_i @ b.conj().T
        if j in out:
            out[j] += contrib
        else:
            out[j] = contrib
    return DiagonalState(spec.n_nodes, out)


def evolve(spec: OqwSpec, state: DiagonalState, n: int) -> DiagonalState:
    """n-fold composition of ``step``; n = 0 returns the input unchanged."""
    if n < 0:
        raise ValueError("step count must be non-negative")
    for _ in range(n):
        state = step(spec, state)
    return state


def node_distribution(state: DiagonalState) -> list:
    """Per-node occupation probabilities Tr(rho_i), one entry per node."""
    return [float(np.trace(state.block(i)).real) for i in range(state.n_nodes)]


def chain_to_spec(chain: LinearChainSpec) -> OqwSpec:
    """Jump operators of the linear-chain model.

    Edge rules: B_i^{i+1} = sqrt(omega) U_i, B_i^{i-1} = sqrt(lambda) U_{i-1}†,
    plus the two boundary self-loops sqrt(lambda) I at node 0 and
    sqrt(omega) I at node N-1. The construction satisfies the completeness
    condition because omega + lambda = 1.
    """
    n, w, lam = chain.n_nodes, chain.omega, chain.lam
    d = chain.walker_dim
    eye = np.eye(d, dtype=complex)
    jumps = {}
    for i in range(n - 1):
        jumps[(i, i + 1)] = np.sqrt(w) * chain.unitaries[i]
    for i in range(1, n):
        jumps[(i, i - 1)] = np.sqrt(lam) * chain.unitaries[i - 1].conj().T
    jumps[(0, 0)] = np.sqrt(lam) * eye
    jumps[(n - 1, n - 1)] = np.sqrt(w) * eye
    return OqwSpec(n, d, jumps)


# --- JSON wire format ------------------------------------------------------
#
# Matrices are encoded as {"re": [[...]], "im": [[...]]}. Python floats
# round-trip exactly through json, so parse(emit(x)) is the identity.

def _matrix_to_json(m) -> dict:
    m = asmatrix(m)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _matrix_from_json(obj) -> np.ndarray:
    return np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)


def spec_to_json(spec: OqwSpec) -> str:
    jumps = [{"from": i, "to": j, **_matrix_to_json(b)}
             for (i, j), b in sorted(spec.jumps.items())]
    return json.dumps({"N": spec.n_nodes, "dH": spec.walker_dim, "jumps": jumps}, indent=1)


def spec_from_json(text: str) -> OqwSpec:
    obj = json.loads(text)
    jumps = {(e["from"], e["to"]): _matrix_from_json(e) for e in obj["jumps"]}
    return OqwSpec(obj["N"], obj["dH"], jumps)


def chain_to_json(chain: LinearChainSpec) -> str:
    return json.dumps({"N": chain.n_nodes, "omega": chain.omega,
                       "unitaries": [_matrix_to_json(u) for u in chain.unitaries]}, indent=1)


def chain_from_json(text: str) -> LinearChainSpec:
    obj = json.loads(text)
    return LinearChainSpec(obj["N"], obj["omega"],
                           [_matrix_from_json(u) for u in obj["unitaries"]])
