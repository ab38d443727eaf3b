"""Block-sparse three-mode states and exact unitary evolution.

A pure state is stored as a map from BlockIndex to a local coefficient
vector, so only the invariant subspaces that are actually populated are
kept.  Evolution applies the cached eigendecomposition of each block and
never mixes blocks.

dense_oracle_evolve is an independent cross-check: it builds the full
Hamiltonian on a truncated Fock cube straight from the ladder rules and
exponentiates it.  Desk scale only (cutoff at most 8).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh

from .blocks import (
    BlockIndex,
    FockTriple,
    block_occupations,
    build_block_hamiltonian,
    build_recombination_hamiltonian,
    fock_to_block,
)

MAX_ORACLE_CUTOFF = 8


@dataclass
class ThreeModeState:
    """Pure state of the three modes, block-sparse.

    blocks maps each populated BlockIndex to its complex coefficient
    vector in the local basis |k-n, s-k-n, n>.  trunc_error records the
    probability discarded when the state was constructed from a state with
    unbounded support; it is carried through evolution unchanged.
    """

    blocks: dict[BlockIndex, np.ndarray] = field(default_factory=dict)
    trunc_error: float = 0.0

    @classmethod
    def from_fock_dict(cls, amplitudes, normalize: bool = True, trunc_error: float = 0.0):
        """Build a state from {(n_a, n_b, n_c): amplitude}."""
        blocks: dict[BlockIndex, np.ndarray] = {}
        for triple, amp in amplitudes.items():
            index, n = fock_to_block(triple)
            vec = blocks.get(index)
            if vec is None:
                vec = np.zeros(min(index.k, index.s - index.k) + 1, dtype=complex)
                blocks[index] = vec
            vec[n] += amp
        state = cls(blocks=blocks, trunc_error=trunc_error)
        if normalize:
            norm = state.norm()
            if norm == 0.0:
                raise ValueError("cannot normalize a zero state")
            for vec in blocks.values():
                vec /= norm
        return state

    def norm(self) -> float:
        return np.sqrt(sum(float(np.vdot(v, v).real) for v in self.blocks.values()))

    def amplitude(self, triple) -> complex:
        index, n = fock_to_block(triple)
        vec = self.blocks.get(index)
        if vec is None or n >= len(vec):
            return 0.0 + 0.0j
        return complex(vec[n])

    def to_fock_dict(self) -> dict[FockTriple, complex]:
        out: dict[FockTriple, complex] = {}
        for index, vec in self.blocks.items():
            n_a, n_b, n_c = block_occupations(index)
            for j in range(len(vec)):
                out[FockTriple(int(n_a[j]), int(n_b[j]), int(n_c[j]))] = complex(vec[j])
        return out

    def mode_support(self) -> tuple[int, int, int]:
        """Structural maxima (n_a, n_b, n_c) over the stored blocks."""
        na = nb = nc = 0
        for s, k in self.blocks:
            na = max(na, k)
            nb = max(nb, s - k)
            nc = max(nc, min(k, s - k))
        return na, nb, nc


def evolve(state: ThreeModeState, tau: float) -> ThreeModeState:
    """Evolve under the trilinear Hamiltonian for dimensionless time tau."""
    blocks = {
        index: build_block_hamiltonian(index).propagate(vec, tau)
        for index, vec in state.blocks.items()
    }
    return ThreeModeState(blocks=blocks, trunc_error=state.trunc_error)


def evolve_recombination(state: ThreeModeState, tau: float) -> ThreeModeState:
    """Evolve under the ideal recombination Hamiltonian (reference dynamics)."""
    blocks = {
        index: build_recombination_hamiltonian(index).propagate(vec, tau)
        for index, vec in state.blocks.items()
    }
    return ThreeModeState(blocks=blocks, trunc_error=state.trunc_error)


def dense_oracle_evolve(amplitudes: np.ndarray, tau: float, cutoff: int) -> np.ndarray:
    """Evolve a full Fock-cube amplitude array by dense diagonalization.

    amplitudes has shape (cutoff+1, cutoff+1, cutoff+1) indexed
    [n_a, n_b, n_c].  The caller must keep enough headroom that no
    population can reach the cube boundary; with support on weight
    n_a + n_b + 2 n_c <= cutoff that is automatic.
    """
    if cutoff < 0 or cutoff > MAX_ORACLE_CUTOFF:
        raise ValueError(f"oracle cutoff must be in [0, {MAX_ORACLE_CUTOFF}], got {cutoff}")
    dim = cutoff + 1
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape != (dim, dim, dim):
        raise ValueError(f"amplitude array must have shape {(dim, dim, dim)}")
    vals, vecs = _oracle_eigensystem(cutoff)
    flat = amplitudes.reshape(-1)
    w = vecs.conj().T @ flat
    w = np.exp(-1j * tau * vals) * w
    return (vecs @ w).reshape(dim, dim, dim)


@lru_cache(maxsize=None)
def _oracle_eigensystem(cutoff: int):
    dim = cutoff + 1
    total = dim**3
    ham = np.zeros((total, total))

    def flat(a, b, c):
        return (a * dim + b) * dim + c

    for n_a in range(dim):
        for n_b in range(dim):
            for n_c in range(dim):
                # a b c^dag term, plus Hermitian partner via symmetric fill
                if n_a >= 1 and n_b >= 1 and n_c + 1 < dim:
                    amp = np.sqrt(n_a * n_b * (n_c + 1))
                    i = flat(n_a - 1, n_b - 1, n_c + 1)
                    j = flat(n_a, n_b, n_c)
                    ham[i, j] += amp
                    ham[j, i] += amp
    return eigh(ham)
