"""Block decomposition: indexing, dimensions, and tridiagonal matrices."""
import math

import numpy as np
import pytest

from triwave import (
    BlockIndex,
    FockTriple,
    block_dimension,
    block_to_fock,
    build_block_hamiltonian,
    build_recombination_hamiltonian,
    fock_to_block,
    recombination_offdiag,
    trilinear_offdiag,
)
from triwave.blocks import block_occupations


def all_triples(s_max):
    for na in range(s_max + 1):
        for nb in range(s_max + 1):
            for nc in range((s_max - na - nb) // 2 + 1):
                if na + nb + 2 * nc <= s_max:
                    yield na, nb, nc


@pytest.mark.parametrize("s,k,dim", [(0, 0, 1), (4, 2, 3), (5, 1, 2), (5, 4, 2), (8, 8, 1), (12, 6, 7)])
def test_block_dimension_values(s, k, dim):
    assert block_dimension(s, k) == dim


def test_block_dimension_matches_fock_enumeration():
    # brute-force count of triples sharing (s, k)
    counts = {}
    for na, nb, nc in all_triples(12):
        key = (na + nb + 2 * nc, na + nc)
        counts[key] = counts.get(key, 0) + 1
    for (s, k), count in counts.items():
        assert block_dimension(s, k) == count


@pytest.mark.parametrize("s,k", [(-1, 0), (2, -1), (2, 3)])
def test_block_index_validation(s, k):
    with pytest.raises(ValueError):
        block_dimension(s, k)


def test_fock_block_roundtrip():
    for na, nb, nc in all_triples(10):
        index, n = fock_to_block(FockTriple(na, nb, nc))
        assert index.s == na + nb + 2 * nc
        assert index.k == na + nc
        assert n == nc
        assert block_to_fock(index, n) == (na, nb, nc)


def test_block_to_fock_explicit():
    index = BlockIndex(4, 2)
    triples = [block_to_fock(index, n) for n in range(3)]
    assert triples == [(2, 2, 0), (1, 1, 1), (0, 0, 2)]


def test_trilinear_offdiag_frozen_values():
    got = trilinear_offdiag(BlockIndex(4, 2))
    assert np.allclose(got, [2.0, math.sqrt(2.0)], atol=1e-14)
    assert np.allclose(trilinear_offdiag(BlockIndex(5, 1)), [2.0], atol=1e-14)


def test_recombination_offdiag_frozen_values():
    assert np.allclose(recombination_offdiag(BlockIndex(4, 2)), [math.sqrt(2.0), math.sqrt(2.0)], atol=1e-14)
    assert np.allclose(recombination_offdiag(BlockIndex(6, 3)), [math.sqrt(3.0), 2.0, math.sqrt(3.0)], atol=1e-14)
    assert np.allclose(recombination_offdiag(BlockIndex(5, 1)), [1.0], atol=1e-14)


def test_offdiag_general_rule():
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = int(rng.integers(0, 14))
        k = int(rng.integers(0, s + 1))
        d = block_dimension(s, k)
        n = np.arange(d - 1)
        tri = trilinear_offdiag(BlockIndex(s, k))
        rec = recombination_offdiag(BlockIndex(s, k))
        assert np.allclose(tri, np.sqrt((k - n) * (s - k - n) * (n + 1)), atol=1e-13)
        assert np.allclose(rec, np.sqrt((k - n) * (n + 1)), atol=1e-13)


def test_block_coincidence_condition():
    # the two Hamiltonians agree exactly when the block is trivial or one
    # beam mode is pinned to a single quantum
    for s in range(13):
        for k in range(s + 1):
            tri = trilinear_offdiag(BlockIndex(s, k))
            rec = recombination_offdiag(BlockIndex(s, k))
            same = tri.shape == rec.shape and np.allclose(tri, rec, atol=1e-13)
            expected = block_dimension(s, k) == 1 or s - k == 1
            assert same == expected, (s, k)


def test_hamiltonian_matrix_structure():
    ham = build_block_hamiltonian(BlockIndex(9, 4))
    mat = ham.matrix()
    assert mat.shape == (5, 5)
    assert np.allclose(mat, mat.T, atol=0.0)
    assert np.allclose(np.diag(mat), 0.0, atol=0.0)
    assert np.allclose(np.diag(mat, 2), 0.0, atol=0.0)


def test_eigendecomposition_reconstructs_matrix():
    for index in [BlockIndex(4, 2), BlockIndex(9, 4), BlockIndex(20, 10)]:
        ham = build_block_hamiltonian(index)
        rebuilt = ham.eigenvectors @ np.diag(ham.eigenvalues) @ ham.eigenvectors.T
        assert np.allclose(rebuilt, ham.matrix(), atol=1e-12)


def test_spectrum_symmetric_about_zero():
    # zero diagonal tridiagonal matrices have sign-flip symmetric spectra
    w = build_block_hamiltonian(BlockIndex(15, 7)).eigenvalues
    assert np.allclose(np.sort(w), np.sort(-w), atol=1e-11)


def test_builders_cache_instances():
    assert build_block_hamiltonian(BlockIndex(6, 3)) is build_block_hamiltonian(BlockIndex(6, 3))
    assert build_recombination_hamiltonian(BlockIndex(6, 3)) is build_recombination_hamiltonian(BlockIndex(6, 3))


def test_block_occupations_values():
    n_a, n_b, n_c = block_occupations(BlockIndex(4, 2))
    assert np.array_equal(n_a, [2, 1, 0])
    assert np.array_equal(n_b, [2, 1, 0])
    assert np.array_equal(n_c, [0, 1, 2])


def test_propagate_unitary_seeded():
    rng = np.random.default_rng(123)
    ham = build_block_hamiltonian(BlockIndex(11, 5))
    for _ in range(10):
        vec = rng.normal(size=6) + 1j * rng.normal(size=6)
        vec /= np.linalg.norm(vec)
        out = ham.propagate(vec, 1.7)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_propagate_zero_time_is_identity():
    ham = build_block_hamiltonian(BlockIndex(7, 3))
    vec = np.array([0.5, -0.5j, 0.5, 0.5j])
    assert np.allclose(ham.propagate(vec, 0.0), vec, atol=1e-14)
