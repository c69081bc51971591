"""Stroboscopic propagation of controlled system-bath dynamics.

One control cycle is integrated exactly (piecewise-constant toggled
Hamiltonians, each segment exponentiated by eigendecomposition), then
repeated. Observation happens at cycle boundaries only: that is where the
control frame returns to the physical frame and where average-Hamiltonian
statements hold.

Two decay diagnostics are tracked. Fidelity is measured against an ideal
reference trajectory: the system evolving alone under its effective
Hamiltonian (the group-averaged system Hamiltonian when a group is
attached to the run, the bare one otherwise), so it starts at one and
falls only through system-bath correlation. Decoherence rates are fitted
to the l1 coherence, whose exponential-looking decay is the directly
observable signature of dephasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import (
    NUMERIC_TOL,
    STRUCT_TOL,
    Operator,
    distance,
    expm_hermitian,
    identity,
    partial_trace_bath,
    tensor,
)
from .model import SystemBathModel, bath_ground_state
from .sequence import CycleSchedule
from .groups import DecouplingGroup, project_commutant
from .magnus import toggled_matrices

#: Re-unitarize running products after this many matrix multiplies.
_POLAR_EVERY = 64


def _closest_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _unitary_power(m: np.ndarray, n: int) -> np.ndarray:
    """``m**n`` by repeated squaring, with periodic polar correction."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    result = np.eye(m.shape[0], dtype=complex)
    base = m
    mults = 0
    while n:
        if n & 1:
            result = result @ base
            mults += 1
            if mults % _POLAR_EVERY == 0:
                result = _closest_unitary(result)
        n >>= 1
        if n:
            base = base @ base
            mults += 1
            if mults % _POLAR_EVERY == 0:
                base = _closest_unitary(base)
    return result


def _check_density(rho: Operator, what: str):
    if not rho.is_hermitian():
        raise ValueError(f"{what} is not Hermitian")
    if abs(rho.trace() - 1.0) > 1e-10 * max(1.0, abs(rho.trace())):
        raise ValueError(f"{what} does not have unit trace")
    evals = np.linalg.eigvalsh(rho.matrix)
    if float(evals.min()) < -1e-10:
        raise ValueError(f"{what} has a negative eigenvalue ({evals.min():.3e})")


def state_fidelity(a: Operator, b: Operator) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))**2`` of two states.

    When either state is pure the identity ``F = <psi|rho|psi>`` is used
    instead of the matrix square roots; it is exact and keeps full
    floating-point resolution near ``F = 1``, where the general formula
    loses about half the significant digits to clipped eigenvalues.
    """
    if a.dims != b.dims:
        raise ValueError("states act on different dims")
    va, ua = np.linalg.eigh(a.matrix)
    if float(va[-1]) >= 1.0 - 1e-10:
        psi = ua[:, -1]
        return min(max(float(np.real(psi.conj() @ b.matrix @ psi)), 0.0), 1.0)
    vb, ub = np.linalg.eigh(b.matrix)
    if float(vb[-1]) >= 1.0 - 1e-10:
        psi = ub[:, -1]
        return min(max(float(np.real(psi.conj() @ a.matrix @ psi)), 0.0), 1.0)
    sqrt_a = (ua * np.sqrt(np.clip(va, 0.0, None))) @ ua.conj().T
    inner = sqrt_a @ b.matrix @ sqrt_a
    vals = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    root_sum = float(np.sum(np.sqrt(np.clip(vals, 0.0, None))))
    return min(max(root_sum**2, 0.0), 1.0)


def coherence_l1(rho: Operator) -> float:
    """Sum of absolute off-diagonal entries of a density matrix."""
    m = np.abs(rho.matrix)
    return float(m.sum() - np.trace(m).real)


def cycle_propagator(model: SystemBathModel, schedule: CycleSchedule) -> Operator:
    """Exact joint propagator of one control cycle.

    Product of the segment exponentials of the toggled Hamiltonians,
    later segments to the left. Equal, by the pulse-picture identity, to
    the free segment evolution interleaved with the boundary pulses.
    """
    joint_dims = tuple(model.h_s.dims) + tuple(model.h_b.dims)
    u = identity(joint_dims)
    for seg, h_j in zip(schedule.segments, toggled_matrices(model, schedule)):
        step = expm_hermitian(Operator(h_j, joint_dims), seg.multiplier * schedule.delta_t)
        u = step @ u
    return u


@dataclass(frozen=True)
class SimulationRun:
    """Everything needed to propagate one controlled (or free) evolution.

    ``rho_b0`` may be the string ``"bath-ground-state"`` (the default) or
    an explicit bath density operator. ``group`` attaches the decoupling
    group the schedule came from; when present, the ideal reference
    trajectory evolves under the group-averaged system Hamiltonian.
    Snapshots are taken every ``sample_every`` cycles, which must divide
    ``n_cycles``.
    """

    model: SystemBathModel
    schedule: CycleSchedule
    n_cycles: int
    rho_s0: Operator
    rho_b0: Operator | str = "bath-ground-state"
    sample_every: int = 1
    group: DecouplingGroup | None = None

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be at least 1")
        if self.sample_every < 1 or self.n_cycles % self.sample_every != 0:
            raise ValueError("sample_every must be positive and divide n_cycles")
        if self.schedule.dims != self.model.h_s.dims:
            raise ValueError("schedule dims do not match the model system")
        if self.rho_s0.dims != self.model.h_s.dims:
            raise ValueError("rho_s0 dims do not match the model system")
        _check_density(self.rho_s0, "rho_s0")
        if isinstance(self.rho_b0, str):
            if self.rho_b0 != "bath-ground-state":
                raise ValueError(
                    f"unknown bath state {self.rho_b0!r}; "
                    "pass an Operator or 'bath-ground-state'"
                )
        else:
            if self.rho_b0.dims != self.model.h_b.dims:
                raise ValueError("rho_b0 dims do not match the model bath")
            _check_density(self.rho_b0, "rho_b0")
        if self.group is not None and self.group.dims != self.model.h_s.dims:
            raise ValueError("group dims do not match the model system")

    def initial_bath_state(self) -> Operator:
        if isinstance(self.rho_b0, str):
            return bath_ground_state(self.model)
        return self.rho_b0

    def ideal_system_hamiltonian(self) -> Operator:
        if self.group is None:
            return self.model.h_s
        return project_commutant(self.model.h_s, self.group)


@dataclass(frozen=True)
class TrajectoryResult:
    """Snapshots of the reduced system state at cycle boundaries.

    ``fidelity`` is against the ideal reference trajectory,
    ``trace_distance`` against the initial state, ``coherence`` is the
    l1 off-diagonal mass. Arrays all share the snapshot axis, with the
    initial state included at index 0.
    """

    times: np.ndarray
    cycles: np.ndarray
    states: tuple[Operator, ...]
    fidelity: np.ndarray
    coherence: np.ndarray
    trace_distance: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def terminal_fidelity(self) -> float:
        return float(self.fidelity[-1])

    def write_csv(self, path):
        """Write snapshots as CSV, deterministically (repr floats)."""
        lines = ["cycle, time, fidelity, coherence, trace_distance"]
        for k in range(len(self.times)):
            lines.append(
                f"{int(self.cycles[k])}, {float(self.times[k])!r}, "
                f"{float(self.fidelity[k])!r}, {float(self.coherence[k])!r}, "
                f"{float(self.trace_distance[k])!r}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def evolve(run: SimulationRun) -> TrajectoryResult:
    """Propagate a run and record reduced-state snapshots."""
    model = run.model
    rho_b = run.initial_bath_state()
    joint = tensor(run.rho_s0, rho_b).matrix
    n_sys = len(model.h_s.dims)

    u_cycle = cycle_propagator(model, run.schedule)
    u_step = _unitary_power(u_cycle.matrix, run.sample_every)
    cycle_time = run.schedule.cycle_time
    initial_purity = float(np.trace(joint @ joint).real)

    h_ideal = run.ideal_system_hamiltonian()
    ideal_static = h_ideal.max_abs() <= STRUCT_TOL

    n_snapshots = run.n_cycles // run.sample_every
    times = np.empty(n_snapshots + 1)
    cycles = np.empty(n_snapshots + 1, dtype=int)
    fidelity = np.empty(n_snapshots + 1)
    coherence = np.empty(n_snapshots + 1)
    tdist = np.empty(n_snapshots + 1)
    states: list[Operator] = []

    joint_dims = list(model.h_s.dims) + list(model.h_b.dims)
    for k in range(n_snapshots + 1):
        t = k * run.sample_every * cycle_time
        rho_s = partial_trace_bath(Operator(joint, joint_dims), n_sys)
        if ideal_static:
            sigma = run.rho_s0
        else:
            u_ref = expm_hermitian(h_ideal, t)
            sigma = Operator(
                u_ref.matrix @ run.rho_s0.matrix @ u_ref.matrix.conj().T, run.rho_s0.dims
            )
        times[k] = t
        cycles[k] = k * run.sample_every
        fidelity[k] = state_fidelity(rho_s, sigma)
        coherence[k] = coherence_l1(rho_s)
        tdist[k] = distance(rho_s, run.rho_s0, metric="trace")
        states.append(rho_s)
        if k < n_snapshots:
            joint = u_step @ joint @ u_step.conj().T
            joint = (joint + joint.conj().T) / 2

    meta = {
        "n_cycles": run.n_cycles,
        "sample_every": run.sample_every,
        "cycle_time": cycle_time,
        "delta_t": run.schedule.delta_t,
        "omega_c_delta_t": model.cutoff * run.schedule.delta_t,
        "n_segments": run.schedule.n_segments,
        "group_order": None if run.group is None else run.group.order,
        "initial_joint_purity": initial_purity,
        "terminal_joint_purity": float(np.trace(joint @ joint).real),
    }
    return TrajectoryResult(
        times=times,
        cycles=cycles,
        states=tuple(states),
        fidelity=fidelity,
        coherence=coherence,
        trace_distance=tdist,
        metadata=meta,
    )


def observable_drift(run: SimulationRun, observable: Operator) -> tuple[np.ndarray, np.ndarray]:
    """Expectation of a group-commuting observable along a trajectory.

    The observable must commute with every element of the run's group
    (those are the quantities the control is supposed to preserve); the
    failing element is named otherwise. Returns ``(times, values)``.
    """
    if run.group is None:
        raise ValueError("observable_drift needs a run with a group attached")
    if observable.dims != run.model.h_s.dims:
        raise ValueError("observable dims do not match the model system")
    scale = max(1.0, observable.max_abs())
    for label, g in zip(run.group.labels, run.group.elements):
        comm = observable.matrix @ g.matrix - g.matrix @ observable.matrix
        if float(np.linalg.norm(comm)) > NUMERIC_TOL * scale:
            raise ValueError(
                f"observable does not commute with group element {label!r}"
            )
    traj = evolve(run)
    values = np.array(
        [float(np.trace(observable.matrix @ s.matrix).real) for s in traj.states]
    )
    return traj.times, values


@dataclass(frozen=True)
class RateEstimate:
    """Exponential decay rates of a free and a controlled trajectory.

    Rates come from an origin-constrained least-squares fit of
    ``-log(coherence(t)/coherence(0))`` over the window where the
    normalized coherence sits in ``[0.2, 0.95]`` (resolved but not
    saturated decay). A trajectory that never enters that window falls
    back to an endpoint secant, the expected situation for a well
    controlled run. The estimate is flagged when the comparison itself
    is unreliable: the free trajectory did not resolve a window fit, a
    trajectory had no initial coherence to lose, or the free rate is
    zero. ``ratio`` is ``gamma_c / gamma``: below one means the control
    suppresses decay.
    """

    gamma: float
    gamma_c: float
    ratio: float
    fit_window: tuple[tuple[int, int], tuple[int, int]]
    fit_residual: float
    method: str
    flagged: bool

    def to_record(self) -> dict:
        def safe(x: float):
            return float(x) if math.isfinite(x) else None

        return {
            "gamma_free": safe(self.gamma),
            "gamma_controlled": safe(self.gamma_c),
            "ratio": safe(self.ratio),
            "fit_window": [list(w) for w in self.fit_window],
            "fit_residual": safe(self.fit_residual),
            "method": self.method,
            "flagged": bool(self.flagged),
        }


#: Normalized-coherence thresholds bounding the rate-fit window: the fit
#: starts once coherence/coherence(0) drops below ONSET and stops before
#: it falls under FLOOR.
RATE_FIT_ONSET = 0.95
RATE_FIT_FLOOR = 0.2


def _decay_rate(traj: TrajectoryResult) -> tuple[float, tuple[int, int], float, str]:
    c0 = float(traj.coherence[0])
    t = traj.times
    if t[-1] <= 0:
        raise ValueError("trajectory has no positive-time snapshots")
    if c0 <= 1e-12:
        return 0.0, (0, 0), 0.0, "undefined-signal"
    c = np.clip(traj.coherence / c0, 1e-300, None)
    below_onset = np.flatnonzero(c <= RATE_FIT_ONSET)
    below_floor = np.flatnonzero(c < RATE_FIT_FLOOR)
    start = int(below_onset[0]) if below_onset.size else len(c)
    stop = int(below_floor[0]) if below_floor.size else len(c)
    window = (start, stop)
    if stop - start >= 2 and t[stop - 1] > 0:
        tt = t[start:stop]
        dd = -np.log(c[start:stop])
        gamma = max(float(np.dot(tt, dd) / np.dot(tt, tt)), 0.0)
        resid = float(np.sqrt(np.mean((dd - gamma * tt) ** 2)))
        return gamma, window, resid, "window-fit"
    gamma = max(float(-math.log(min(float(c[-1]), 1.0)) / float(t[-1])), 0.0)
    return gamma, (len(c) - 1, len(c)), 0.0, "endpoint-secant"


def estimate_rates(free: TrajectoryResult, controlled: TrajectoryResult) -> RateEstimate:
    """Compare decay rates of a free and a controlled trajectory."""
    g_free, w_free, r_free, m_free = _decay_rate(free)
    g_ctrl, w_ctrl, r_ctrl, m_ctrl = _decay_rate(controlled)
    method = m_free if m_free == m_ctrl else f"{m_free}+{m_ctrl}"
    flagged = m_free != "window-fit" or m_ctrl == "undefined-signal"
    if g_free > 0:
        ratio = g_ctrl / g_free
    else:
        ratio = math.inf if g_ctrl > 0 else math.nan
        flagged = True
    return RateEstimate(
        gamma=g_free,
        gamma_c=g_ctrl,
        ratio=ratio,
        fit_window=(w_free, w_ctrl),
        fit_residual=max(r_free, r_ctrl),
        method=method,
        flagged=flagged,
    )


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit ``y = exp(intercept) * x**slope`` on log-log axes."""

    slope: float
    intercept: float
    r_squared: float


def fit_scaling_exponent(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares slope of ``log y`` against ``log x``.

    Needs at least three points with positive coordinates and at least
    two distinct abscissae.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least three points for a scaling fit")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("scaling fit needs strictly positive coordinates")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    if float(np.ptp(lx)) < 1e-12:
        raise ValueError("scaling fit needs at least two distinct x values")
    a = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, ly, rcond=None)
    pred = a @ np.array([slope, intercept])
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 and ss_res < 1e-24 else 1.0 - ss_res / max(ss_tot, 1e-300)
    return ScalingFit(slope=float(slope), intercept=float(intercept), r_squared=float(r2))
