"""Average Hamiltonian series oracles.

The zeroth order is compared against a plain arithmetic mean of toggled
Hamiltonians and against factor-wise group projection; the first order
is compared against the explicit commutator double sum.
"""

import numpy as np
import pytest

from decoupling import (
    BathSpec,
    Operator,
    average_h0,
    average_h1,
    average_hamiltonian_series,
    build_spin_bath_model,
    pauli_group,
    project_commutant,
    schedule_from_group,
    symmetrize,
    toggled_hamiltonian,
    total_hamiltonian,
    truncation_error,
    trivial_group,
    group_from_words,
)
from decoupling.magnus import toggled_matrices


def make_model(seed=7, coupling="dephasing", n_qubits=1, h_s=None):
    bath = BathSpec(kind="spin-bath", n_modes=3, cutoff=1.0,
                    coupling_scale=0.4, seed=seed)
    return build_spin_bath_model(n_qubits, bath, coupling=coupling, h_s=h_s)


def test_toggled_hamiltonian_is_explicit_conjugation():
    model = make_model()
    group = pauli_group(1, "full")
    sched = schedule_from_group(group, delta_t=0.1)
    h0 = total_hamiltonian(model).matrix
    eye_b = np.eye(model.bath_dim, dtype=complex)
    for j, seg in enumerate(sched.segments):
        lift = np.kron(seg.frame.matrix, eye_b)
        want = lift.conj().T @ h0 @ lift
        got = toggled_hamiltonian(model, sched, j)
        assert np.max(np.abs(got.matrix - want)) < 1e-12
        assert got.is_hermitian()
    with pytest.raises(ValueError):
        toggled_hamiltonian(model, sched, 4)


def test_toggled_matrices_agree_with_single_lookups():
    model = make_model()
    sched = schedule_from_group(pauli_group(1, "flip"), delta_t=0.1)
    mats = toggled_matrices(model, sched)
    assert len(mats) == 2
    for j, m in enumerate(mats):
        assert np.max(np.abs(m - toggled_hamiltonian(model, sched, j).matrix)) < 1e-13


def test_average_h0_is_arithmetic_mean():
    model = make_model()
    sched = schedule_from_group(pauli_group(1, "full"), delta_t=0.07)
    mats = toggled_matrices(model, sched)
    want = sum(mats) / len(mats)
    got = average_h0(model, sched)
    assert np.max(np.abs(got.matrix - want)) < 1e-12


def test_average_h0_equals_factor_wise_projection():
    """Time averaging over the cycle equals group averaging channel by
    channel: project h_s and each system coupling factor, keep the bath."""
    model = make_model(coupling="total",
                       h_s=Operator(np.array([[0.3, 0.1], [0.1, -0.3]], dtype=complex), [2]))
    group = pauli_group(1, "full")
    sched = schedule_from_group(group, delta_t=0.05)
    eye_b = np.eye(model.bath_dim, dtype=complex)
    eye_s = np.eye(model.system_dim, dtype=complex)
    want = np.kron(project_commutant(model.h_s, group).matrix, eye_b)
    want = want + np.kron(eye_s, model.h_b.matrix)
    for s, b in model.couplings:
        want = want + np.kron(project_commutant(s, group).matrix, b.matrix)
    got = average_h0(model, sched)
    assert np.max(np.abs(got.matrix - want)) < 1e-10


def test_average_h0_invariant_under_cyclic_rotation():
    model = make_model()
    group = pauli_group(1, "full")
    base = average_h0(model, schedule_from_group(group, delta_t=0.1))
    for shift in (1, 2, 3):
        ordering = [(i + shift) % 4 for i in range(4)]
        rotated = schedule_from_group(group, delta_t=0.1, ordering=ordering)
        # a rotated cycle starts at a non-identity frame; same time average
        got = average_h0(model, rotated)
        assert np.max(np.abs(got.matrix - base.matrix)) < 1e-12


def test_average_h1_matches_double_sum():
    model = make_model(coupling="total")
    sched = schedule_from_group(pauli_group(1, "full"), delta_t=0.13)
    mats = toggled_matrices(model, sched)
    n = len(mats)
    dt = sched.delta_t
    acc = np.zeros_like(mats[0])
    for j in range(n):
        for l in range(j):
            hj, hl = mats[j], mats[l]
            acc = acc + (hj @ hl - hl @ hj)
    want = (-1j * dt / (2 * n)) * acc
    got = average_h1(model, sched)
    assert np.max(np.abs(got.matrix - want)) < 1e-12
    assert got.is_hermitian()


def test_average_h1_vanishes_for_symmetric_cycles():
    rng = np.random.default_rng(2024)
    for seed in rng.integers(0, 10_000, size=4):
        model = make_model(seed=int(seed), coupling="total")
        sched = symmetrize(schedule_from_group(pauli_group(1, "full"), delta_t=0.11))
        h1 = average_h1(model, sched)
        assert h1.norm() <= 1e-12


def test_average_h1_vanishes_for_single_segment():
    model = make_model()
    sched = schedule_from_group(trivial_group(1), delta_t=0.3)
    assert average_h1(model, sched).norm() == 0.0


def test_series_effective_orders():
    model = make_model()
    sched = schedule_from_group(pauli_group(1, "flip"), delta_t=0.1)
    series = average_hamiltonian_series(model, sched)
    assert np.array_equal(series.effective(0).matrix, series.h0.matrix)
    combined = series.h0.matrix + series.h1.matrix
    assert np.max(np.abs(series.effective(1).matrix - combined)) < 1e-14
    with pytest.raises(ValueError):
        series.effective(2)


def test_truncation_error_decreases_with_order_and_step():
    model = make_model()
    sched_a = schedule_from_group(pauli_group(1, "flip"), delta_t=0.1)
    sched_b = schedule_from_group(pauli_group(1, "flip"), delta_t=0.05)
    e0a = truncation_error(model, sched_a, order=0)
    e1a = truncation_error(model, sched_a, order=1)
    e0b = truncation_error(model, sched_b, order=0)
    assert e1a < e0a
    assert e0b < e0a
    with pytest.raises(ValueError):
        truncation_error(model, sched_a, order=3)


def test_flip_average_removes_dephasing_coupling():
    """For the two-segment echo the zeroth order is bath-only."""
    model = make_model()
    sched = schedule_from_group(pauli_group(1, "flip"), delta_t=0.1)
    h0bar = average_h0(model, sched)
    eye_s = np.eye(2, dtype=complex)
    want = np.kron(eye_s, model.h_b.matrix)
    assert np.max(np.abs(h0bar.matrix - want)) < 1e-12


def test_phase_flip_group_keeps_dephasing_coupling():
    model = make_model()
    phase = group_from_words(["I", "Z"])
    sched = schedule_from_group(phase, delta_t=0.1)
    h0bar = average_h0(model, sched)
    s, b = model.couplings[0]
    residual = h0bar.matrix - np.kron(np.eye(2, dtype=complex), model.h_b.matrix)
    want = np.kron(s.matrix, b.matrix)
    assert np.max(np.abs(residual - want)) < 1e-12
