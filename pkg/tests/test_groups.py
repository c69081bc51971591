"""Group averaging: projector algebra, commutant bases, decoupling search.

The projector and the commutant are each checked against brute-force
oracles (explicit conjugation sums, stacked-kron null spaces) so that a
bug in the library cannot hide behind itself.
"""

import itertools

import numpy as np
import pytest

from decoupling import (
    DecouplingGroup,
    Operator,
    check_decoupling,
    commutant_basis,
    group_from_words,
    interaction_space,
    minimal_group_search,
    pauli_group,
    pauli_word_operator,
    project_commutant,
    trivial_group,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
PAULI_1Q = {"I": np.eye(2, dtype=complex), "X": SX, "Y": SY, "Z": SZ}


def word_matrix(word):
    out = PAULI_1Q[word[0]].copy()
    for ch in word[1:]:
        out = np.kron(out, PAULI_1Q[ch])
    return out


def average_oracle(group, mat):
    """Conjugation average written as a plain loop."""
    acc = np.zeros_like(mat)
    for g in group.elements:
        acc = acc + g.matrix.conj().T @ mat @ g.matrix
    return acc / group.order


def random_matrix(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_pauli_word_operator_matches_kron():
    for word in ("I", "X", "ZY", "XIZ"):
        got = pauli_word_operator(word)
        assert got.dims == (2,) * len(word)
        assert np.allclose(got.matrix, word_matrix(word))
    with pytest.raises(ValueError):
        pauli_word_operator("XQ")
    with pytest.raises(ValueError):
        pauli_word_operator("")


def test_named_groups_have_expected_elements():
    assert trivial_group(1).order == 1
    flip = pauli_group(1, "flip")
    assert flip.order == 2
    assert flip.labels == ("I", "X")
    full1 = pauli_group(1, "full")
    assert full1.order == 4
    assert full1.labels == ("I", "X", "Y", "Z")
    coll2 = pauli_group(2, "collective")
    assert coll2.order == 4
    assert coll2.labels == ("II", "XX", "YY", "ZZ")
    full2 = pauli_group(2, "full")
    assert full2.order == 16
    with pytest.raises(ValueError):
        pauli_group(1, "cyclic")


def test_group_requires_identity_first():
    with pytest.raises(ValueError):
        group_from_words(["X", "I"])
    g = group_from_words(["I", "X"])
    assert g.labels == ("I", "X")


def test_group_rejects_unclosed_sets():
    with pytest.raises(ValueError, match="closed"):
        group_from_words(["II", "XX", "YY"])  # missing ZZ
    with pytest.raises(ValueError):
        DecouplingGroup((Operator(np.eye(2, dtype=complex), [2]),
                         Operator(1.001 * SX, [2])))  # not unitary


def test_group_rejects_duplicates_up_to_phase():
    eye = Operator(np.eye(2, dtype=complex), [2])
    phased_eye = Operator(1j * np.eye(2, dtype=complex), [2])
    with pytest.raises(ValueError):
        DecouplingGroup((eye, phased_eye))


def test_projector_matches_brute_force_average():
    rng = np.random.default_rng(101)
    groups = [trivial_group(1), pauli_group(1, "flip"), pauli_group(1, "full"),
              pauli_group(2, "collective"), pauli_group(2, "full")]
    for group in groups:
        d = group.dim
        for _ in range(5):
            s = Operator(random_matrix(rng, d), group.dims)
            got = project_commutant(s, group)
            want = average_oracle(group, s.matrix)
            assert np.max(np.abs(got.matrix - want)) < 1e-12


def test_projector_idempotent_unital_trace_preserving():
    rng = np.random.default_rng(103)
    group = pauli_group(2, "collective")
    eye = Operator(np.eye(4, dtype=complex), [2, 2])
    assert np.max(np.abs(project_commutant(eye, group).matrix - eye.matrix)) < 1e-12
    for _ in range(10):
        s = Operator(random_matrix(rng, 4), [2, 2])
        p1 = project_commutant(s, group)
        p2 = project_commutant(p1, group)
        assert np.max(np.abs(p2.matrix - p1.matrix)) < 1e-12
        assert abs(p1.trace() - s.trace()) < 1e-12
        for g in group.elements:
            comm = g.matrix @ p1.matrix - p1.matrix @ g.matrix
            assert np.max(np.abs(comm)) < 1e-12


def test_full_group_collapses_to_scalar():
    """Averaging over a unitary error basis leaves only the trace part."""
    rng = np.random.default_rng(107)
    for k in (1, 2):
        group = pauli_group(k, "full")
        d = 2**k
        s = Operator(random_matrix(rng, d), (2,) * k)
        got = project_commutant(s, group)
        want = (np.trace(s.matrix) / d) * np.eye(d)
        assert np.max(np.abs(got.matrix - want)) < 1e-12


def null_space_commutant_oracle(group):
    """Commutant as the null space of stacked commutator maps.

    Row-major vectorization turns X -> gX - Xg into
    (kron(g, I) - kron(I, g.T)) vec(X); the joint null space over all
    group elements is exactly the commutant.
    """
    d = group.dim
    eye = np.eye(d)
    blocks = [np.kron(g.matrix, eye) - np.kron(eye, g.matrix.T) for g in group.elements]
    stacked = np.vstack(blocks)
    _, svals, vh = np.linalg.svd(stacked)
    null_mask = np.concatenate([svals, np.zeros(vh.shape[0] - len(svals))]) < 1e-10
    return vh[null_mask].conj()


def test_commutant_basis_matches_null_space_oracle():
    for group in (pauli_group(1, "flip"), pauli_group(2, "collective"),
                  pauli_group(1, "full")):
        basis = commutant_basis(group)
        oracle = null_space_commutant_oracle(group)
        assert basis.dimension == oracle.shape[0]
        # every basis element lies in the oracle span and vice versa
        q, _ = np.linalg.qr(oracle.T)
        for op in basis.basis:
            v = op.matrix.ravel()
            res = v - q @ (q.conj().T @ v)
            assert np.linalg.norm(res) < 1e-10
        mine = np.array([op.matrix.ravel() for op in basis.basis])
        qm, _ = np.linalg.qr(mine.T)
        for row in oracle:
            res = row - qm @ (qm.conj().T @ row)
            assert np.linalg.norm(res) < 1e-10


def test_collective_commutant_contains_pair_words():
    basis = commutant_basis(pauli_group(2, "collective"))
    assert basis.dimension == 4
    mine = np.array([op.matrix.ravel() for op in basis.basis])
    q, _ = np.linalg.qr(mine.T)
    for word in ("II", "XX", "YY", "ZZ"):
        v = word_matrix(word).ravel()
        res = v - q @ (q.conj().T @ v)
        assert np.linalg.norm(res) < 1e-8 * np.linalg.norm(v)


def test_check_decoupling_modes():
    bath_agnostic = interaction_space([pauli_word_operator("Z")])
    h0 = Operator(np.zeros((2, 2), dtype=complex), [2])

    full = check_decoupling(pauli_group(1, "full"), bath_agnostic, h0)
    assert full.mode == "maximal"
    assert full.commutant_dimension == 1
    assert full.max_residual <= 1e-10

    flip = check_decoupling(pauli_group(1, "flip"), bath_agnostic, h0)
    assert flip.mode == "selective"
    assert flip.commutant_dimension == 2

    # flip group cannot remove an X coupling: the projection survives
    bad = check_decoupling(pauli_group(1, "flip"),
                           interaction_space([pauli_word_operator("X")]), h0)
    assert bad.mode == "none"
    assert bad.max_residual > 1.0


def test_check_decoupling_reports_effective_hamiltonian():
    h_s = Operator(0.25 * np.kron(SZ, SZ) + 0.1 * np.kron(SZ, np.eye(2)), [2, 2])
    space = interaction_space([Operator(np.kron(SZ, np.eye(2)) + np.kron(np.eye(2), SZ), [2, 2])])
    report = check_decoupling(pauli_group(2, "collective"), space, h_s)
    assert report.mode == "selective"
    want = 0.25 * np.kron(SZ, SZ)  # the epsilon term projects away
    assert np.max(np.abs(report.effective_h_s.matrix - want)) < 1e-12


def decouples_oracle(words, interaction_mats):
    """Check by explicit averaging whether the word set kills every channel."""
    mats = [word_matrix(w) for w in words]
    for s in interaction_mats:
        acc = np.zeros_like(s)
        for g in mats:
            acc = acc + g.conj().T @ s @ g
        if np.linalg.norm(acc / len(mats)) > 1e-10:
            return False
    return True


def test_minimal_search_single_qubit_dephasing():
    space = interaction_space([pauli_word_operator("Z")])
    hits = minimal_group_search(space, n_qubits=1)
    labels = sorted(h.labels for h in hits)
    assert labels == [("I", "X"), ("I", "Y")]
    # oracle: these are the only order-2 candidates that work
    for w in ("X", "Y", "Z"):
        expected = w in ("X", "Y")
        assert decouples_oracle(["I", w], [SZ]) == expected


def test_minimal_search_collective_two_qubits():
    coll = [word_matrix("XI") + word_matrix("IX"),
            word_matrix("YI") + word_matrix("IY"),
            word_matrix("ZI") + word_matrix("IZ")]
    space = interaction_space([Operator(m, [2, 2]) for m in coll])
    hits = minimal_group_search(space, n_qubits=2)
    assert hits, "search found no group"
    assert all(h.order == 4 for h in hits)
    assert ("II", "XX", "YY", "ZZ") in [h.labels for h in hits]
    # oracle part 1: every returned group really decouples, by direct average
    for h in hits:
        assert decouples_oracle(h.labels, coll)
    # oracle part 2: no order-2 group can (exhaustive over all 15 words)
    words = ["".join(p) for p in itertools.product("IXYZ", repeat=2)][1:]
    assert not any(decouples_oracle(["II", w], coll) for w in words)


def test_minimal_search_reports_empty_when_capped():
    # all three axes need the order-4 group; an order-2 cap finds nothing
    space = interaction_space([pauli_word_operator(w) for w in "XYZ"])
    hits = minimal_group_search(space, n_qubits=1, max_order=2)
    assert hits == []
    uncapped = minimal_group_search(space, n_qubits=1, max_order=4)
    assert [h.labels for h in uncapped] == [("I", "X", "Y", "Z")]


def test_scalar_shift_in_interaction_is_harmless():
    """A channel projecting onto a multiple of the identity does not
    decohere: the averaged coupling becomes a pure bath term."""
    space = interaction_space([Operator(np.eye(2, dtype=complex) + SZ, [2])])
    h0 = Operator(np.zeros((2, 2), dtype=complex), [2])
    report = check_decoupling(pauli_group(1, "flip"), space, h0)
    assert report.mode == "selective"
    assert report.max_residual <= 1e-10


def test_phase_canonicalization_makes_groups_comparable():
    phased = [np.eye(2, dtype=complex), np.exp(0.3j) * SX]
    g = DecouplingGroup(tuple(Operator(m, [2]) for m in phased))
    plain = pauli_group(1, "flip")
    for a, b in zip(g.elements, plain.elements):
        assert np.max(np.abs(a.matrix - b.matrix)) < 1e-12
