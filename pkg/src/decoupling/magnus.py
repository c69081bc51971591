"""Average Hamiltonians of a control cycle, order by order.

Over one cycle the joint dynamics is generated segment by segment by the
toggled Hamiltonians

    H_j = (g_j (x) 1)^dag  H  (g_j (x) 1),

and the exact cycle propagator equals ``exp(-i (H0 + H1 + ...) T_c)`` for
the series computed here. The leading term ``H0`` is the duration-weighted
mean of the toggled Hamiltonians; when the frames run over a decoupling
group this is exactly the group-averaging projector applied to each
system factor, which is what makes unwanted couplings vanish to first
order. The next term,

    H1 = (-i / (2 T_c)) * sum_{j>l} tau_j tau_l [H_j, H_l],

is the leading correction; it flips sign under time reversal of the
cycle, so palindromic cycles cancel it identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import Operator, distance, expm_hermitian, identity, tensor
from .model import SystemBathModel, total_hamiltonian
from .sequence import CycleSchedule


def toggled_hamiltonian(model: SystemBathModel, schedule: CycleSchedule, j: int) -> Operator:
    """Joint Hamiltonian seen in the control frame of segment ``j``.

    The frame acts on the system factor only, so the bath term passes
    through untouched: the result is ``g_j^dag H_S g_j (x) 1 + 1 (x) H_B
    + sum_a g_j^dag S_a g_j (x) B_a``.
    """
    if schedule.dims != model.h_s.dims:
        raise ValueError(
            f"schedule acts on dims {schedule.dims}, model system has {model.h_s.dims}"
        )
    if not 0 <= j < schedule.n_segments:
        raise ValueError(f"segment index {j} out of range for {schedule.n_segments} segments")
    lift = tensor(schedule.segments[j].frame, identity(list(model.h_b.dims)))
    h = total_hamiltonian(model)
    return lift.dagger() @ h @ lift


def toggled_matrices(model: SystemBathModel, schedule: CycleSchedule) -> list[np.ndarray]:
    """Raw matrices of every segment's toggled Hamiltonian.

    Builds the total Hamiltonian once and conjugates it per segment;
    equivalent to calling :func:`toggled_hamiltonian` for each index.
    """
    if schedule.dims != model.h_s.dims:
        raise ValueError(
            f"schedule acts on dims {schedule.dims}, model system has {model.h_s.dims}"
        )
    h = total_hamiltonian(model).matrix
    eye_b = np.eye(model.bath_dim)
    out = []
    for seg in schedule.segments:
        lift = np.kron(seg.frame.matrix, eye_b)
        out.append(lift.conj().T @ h @ lift)
    return out


def average_h0(model: SystemBathModel, schedule: CycleSchedule) -> Operator:
    """Zeroth-order average: duration-weighted mean of toggled Hamiltonians."""
    acc = None
    for seg, h_j in zip(schedule.segments, toggled_matrices(model, schedule)):
        term = seg.multiplier * h_j
        acc = term if acc is None else acc + term
    joint_dims = tuple(model.h_s.dims) + tuple(model.h_b.dims)
    return Operator(acc / schedule.total_units, joint_dims)


def average_h1(model: SystemBathModel, schedule: CycleSchedule) -> Operator:
    """First-order correction from non-commuting segments.

    Computed with a prefix sum: ``sum_{j>l} tau_j tau_l [H_j, H_l]``
    equals ``sum_j [tau_j H_j, A_j]`` with ``A_j`` the accumulated earlier
    weighted Hamiltonians, so the cost is linear in segment count.
    """
    dt = schedule.delta_t
    joint_dims = tuple(model.h_s.dims) + tuple(model.h_b.dims)
    toggled = toggled_matrices(model, schedule)
    weights = [seg.multiplier * dt for seg in schedule.segments]
    acc = np.zeros_like(toggled[0])
    prefix = np.zeros_like(toggled[0])
    for h, tau in zip(toggled, weights):
        hw = tau * h
        acc += hw @ prefix - prefix @ hw
        prefix += hw
    out = (-1j / (2.0 * schedule.cycle_time)) * acc
    out = (out + out.conj().T) / 2  # exactly Hermitian despite roundoff
    return Operator(out, joint_dims)


@dataclass(frozen=True)
class AverageHamiltonianSeries:
    """Leading terms of the effective cycle generator."""

    h0: Operator
    h1: Operator
    cycle_time: float

    def effective(self, order: int) -> Operator:
        """Partial sum of the series through ``order`` (0 or 1)."""
        if order == 0:
            return self.h0
        if order == 1:
            return self.h0 + self.h1
        raise ValueError(f"order must be 0 or 1, got {order}")


def average_hamiltonian_series(
    model: SystemBathModel, schedule: CycleSchedule
) -> AverageHamiltonianSeries:
    return AverageHamiltonianSeries(
        h0=average_h0(model, schedule),
        h1=average_h1(model, schedule),
        cycle_time=schedule.cycle_time,
    )


def truncation_error(model: SystemBathModel, schedule: CycleSchedule, order: int) -> float:
    """Frobenius distance of the truncated series from the exact cycle.

    ``order`` 0 keeps only the averaged Hamiltonian; 1 adds the first
    correction. The error contracts like the cycle time to the power
    ``order + 2`` as ``delta_t`` shrinks (one power faster again for
    palindromic cycles at order 1, whose correction vanishes).
    """
    from .evolve import cycle_propagator  # runtime import; evolve imports this module

    series = average_hamiltonian_series(model, schedule)
    exact = cycle_propagator(model, schedule)
    approx = expm_hermitian(series.effective(order), schedule.cycle_time)
    return distance(exact, approx, metric="frobenius")
