"""Quantum channels realized as open quantum walks.

A channel realization packages a linear chain, an initial diagonal state,
and the node whose post-selected long-run block reproduces the channel's
action. Covers dephasing, depolarizing, and arbitrary convex combinations
of unitaries (random unitary evolutions).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .matrixkit import X, Y, Z, asmatrix, is_unitary, trace_distance


@dataclass
class ChannelRealization:
    """Walk that realizes a channel on its final node.

    ``analytic_limit`` is the channel's predicted output, computed from the
    channel formula itself; ``limit_state`` recomputes the limit from the
    walk structure so the two can be compared independently.
    """

    chain: core.LinearChainSpec
    spec: core.OqwSpec
    initial: core.DiagonalState
    target_node: int
    analytic_limit: np.ndarray

    def __post_init__(self):
        self.initial.validate()
        if abs(np.trace(self.analytic_limit).real - 1.0) > 1e-10:
            raise ValueError("analytic limit must have unit trace")
        if self.target_node != self.chain.n_nodes - 1:
            raise ValueError("target node must be the last node of the chain")


def coefficient_evolution(chain: core.LinearChainSpec, initial_masses, n: int) -> np.ndarray:
    """Contribution coefficients a_j^(i,n) after n steps.

    Entry [i][j] weighs, at node i, the evolved image of the block that
    started at node j. Starts from the identity (a_j^(i,0) = delta_ij) and
    applies the three-case recursion (interior / left boundary / right
    boundary); each column evolves exactly like the classical transition
    matrix acting on the node index.
    """
    masses = np.asarray(initial_masses, dtype=float)
    nn = chain.n_nodes
    if masses.shape != (nn,):
        raise ValueError(f"need {nn} masses, got {masses.shape}")
    if abs(masses.sum() - 1.0) > 1e-10:
        raise ValueError(f"masses must sum to 1, got {masses.sum()}")
    w, lam = chain.omega, chain.lam
    a = np.eye(nn)
    for _ in range(n):
        nxt = np.empty_like(a)
        nxt[0, :] = lam * a[0, :] + lam * a[1, :]
        for i in range(1, nn - 1):
            nxt[i, :] = w * a[i - 1, :] + lam * a[i + 1, :]
        nxt[nn - 1, :] = w * a[nn - 2, :] + w * a[nn - 1, :]
        a = nxt
    return a


def postselect(state: core.DiagonalState, node: int) -> np.ndarray:
    """Block at ``node``, renormalized to unit trace.

    Rejects nodes carrying (numerically) zero mass, where conditioning is
    undefined.
    """
    block = state.block(node)
    mass = float(np.trace(block).real)
    if mass <= 1e-14:
        raise ValueError(f"cannot post-select node {node}: occupation {mass:.3e} is zero")
    return block / mass


def dephasing_realization(p: float, rho, omega: float = 0.5) -> ChannelRealization:
    """Two-node walk realizing (1-p) rho + p Z rho Z.

    Initial state puts mass p at node 0 and 1-p at node 1, both carrying
    rho; the single chain unitary is Z. The realization reaches its steady
    state after one step and the post-selected limit does not depend on
    omega.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rho = asmatrix(rho)
    chain = core.LinearChainSpec(2, omega, [Z])
    blocks = {}
    if p > 0:
        blocks[0] = p * rho
    if p < 1:
        blocks[1] = (1.0 - p) * rho
    initial = core.DiagonalState(2, blocks)
    limit = (1.0 - p) * rho + p * (Z @ rho @ Z)
    return ChannelRealization(chain, core.chain_to_spec(chain), initial, 1, limit)


def depolarizing_realization(lam: float, rho, omega: float = 0.5) -> ChannelRealization:
    """Three-node walk realizing the depolarizing channel of strength lam.

    Chain unitaries -iY and X exploit Pauli products so only three nodes
    are needed: pushing the initial blocks through the remaining unitaries
    produces the X, Y and Z conjugations. For qubits the limit equals
    (1 - lam) rho + lam I/2.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"channel parameter must be in [0, 1], got {lam}")
    rho = asmatrix(rho)
    chain = core.LinearChainSpec(3, omega, [-1j * Y, X])
    blocks = {
        0: (lam / 4.0) * rho + (lam / 4.0) * (X @ rho @ X),
        1: (lam / 4.0) * rho,
        2: (1.0 - 3.0 * lam / 4.0) * rho,
    }
    initial = core.DiagonalState(3, {i: b for i, b in blocks.items() if np.trace(b).real > 0})
    limit = ((1.0 - 3.0 * lam / 4.0) * rho
             + (lam / 4.0) * (X @ rho @ X + Y @ rho @ Y + Z @ rho @ Z))
    return ChannelRealization(chain, core.chain_to_spec(chain), initial, 2, limit)


def embed_random_unitary(pairs, rho) -> ChannelRealization:
    """Walk realizing the convex combination sum_i q_i V_i rho V_i†.

    Default construction: all chain unitaries are the identity and node j
    starts with the already-conjugated block q_j V_j rho V_j†, so the
    post-selected limit is the target mixture. A single pair is padded to
    a two-node chain (a chain needs at least two nodes).
    """
    pairs = [(float(q), asmatrix(v)) for q, v in pairs]
    if not pairs:
        raise ValueError("need at least one (weight, unitary) pair")
    weights = np.array([q for q, _ in pairs])
    if weights.min() < -1e-12:
        raise ValueError(f"weights must be non-negative, got min {weights.min()}")
    if abs(weights.sum() - 1.0) > 1e-10:
        raise ValueError(f"weights must sum to 1, got {weights.sum()}")
    for k, (_, v) in enumerate(pairs):
        if not is_unitary(v, 1e-10):
            raise ValueError(f"matrix {k} is not unitary")
    rho = asmatrix(rho)
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError("rho must have unit trace")
    d = rho.shape[0]
    n = max(len(pairs), 2)
    chain = core.LinearChainSpec(n, 0.5, [np.eye(d)] * (n - 1))
    blocks = {j: q * (v @ rho @ v.conj().T) for j, (q, v) in enumerate(pairs) if q > 0}
    initial = core.DiagonalState(n, blocks)
    limit = sum(q * (v @ rho @ v.conj().T) for q, v in pairs)
    return ChannelRealization(chain, core.chain_to_spec(chain), initial, n - 1, limit)


def limit_state(real: ChannelRealization, mode: str = "analytic",
                max_steps: int = 500, tol: float = 1e-10) -> np.ndarray:
    """Long-run post-selected state of the realization.

    ``analytic`` pushes every initial block through the chain unitaries
    that lie between its node and the target node and sums the images
    (exact, and already trace-1 because the initial masses sum to 1).
    ``iterate`` evolves the walk and post-selects until successive results
    stop moving; see ``iterate_limit``.
    """
    if mode == "analytic":
        chain, n = real.chain, real.chain.n_nodes
        d = real.initial.walker_dim
        out = np.zeros((d, d), dtype=complex)
        for j in range(n):
            block = real.initial.block(j)
            # product U_{N-2} ... U_j, identity for the target node itself
            u = np.eye(d, dtype=complex)
            for k in range(j, n - 1):
                u = chain.unitaries[k] @ u
            out += u @ block @ u.conj().T
        return out
    if mode == "iterate":
        state, _ = iterate_limit(real, max_steps, tol)
        return state
    raise ValueError(f"unknown mode {mode!r}")


def iterate_limit(real: ChannelRealization, max_steps: int = 500,
                  tol: float = 1e-10) -> tuple:
    """Evolve and post-select until converged; returns (state, steps).

    Convergence requires the trace distance between consecutive
    post-selected states to stay below ``tol`` for three consecutive steps,
    which guards against even/odd oscillation on finite chains. The
    returned step count is the step at which the state stopped moving.
    """
    state = core.evolve(real.spec, real.initial, 1)
    first = 1
    # mass may not have reached the readout node yet when it starts far away
    while first < max_steps and np.trace(state.block(real.target_node)).real <= 1e-14:
        state = core.step(real.spec, state)
        first += 1
    prev = postselect(state, real.target_node)
    quiet, n = 0, first
    for k in range(first + 1, max_steps + 1):
        state = core.step(real.spec, state)
        cur = postselect(state, real.target_node)
        if trace_distance(cur, prev) < tol:
            if quiet == 0:
                n = k - 1
            quiet += 1
            if quiet >= 3:
                return cur, n
        else:
            quiet = 0
        prev = cur
    raise RuntimeError(f"no convergence within {max_steps} steps "
                       f"(last delta vs tol {tol})")
