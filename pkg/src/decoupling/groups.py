"""Finite decoupling groups, group averaging, and commutant computation.

The control repertoire is a finite set of unitaries acting on the system
space. Averaging a system operator over the conjugation action of that
set,

    S  ->  (1/|G|) * sum_j  g_j^dag S g_j,

projects S onto the commutant of the group (the operators commuting with
every element). System-bath couplings whose projection vanishes drop out
of the zeroth-order average Hamiltonian; couplings whose projection
survives cannot be removed by that group. Checking which case holds, and
searching for the smallest group that achieves the first, is what this
module does.

Group elements are stored projectively: each unitary is canonicalized so
that its first nonzero entry is real and positive, and closure under
multiplication is only required up to a phase. Conjugation is blind to
element phases, so nothing downstream depends on the lifted
representatives. This matters because natural generating sets such as
{1, sigma_x, sigma_y, sigma_z} close only projectively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import Operator, STRUCT_TOL, NUMERIC_TOL, identity, zero, tensor_all

PAULI_LETTERS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Projective single-letter products (signs dropped): used for subgroup
# enumeration, where only the group structure matters.
_LETTER_PRODUCT = {
    ("I", "I"): "I", ("I", "X"): "X", ("I", "Y"): "Y", ("I", "Z"): "Z",
    ("X", "I"): "X", ("X", "X"): "I", ("X", "Y"): "Z", ("X", "Z"): "Y",
    ("Y", "I"): "Y", ("Y", "X"): "Z", ("Y", "Y"): "I", ("Y", "Z"): "X",
    ("Z", "I"): "Z", ("Z", "X"): "Y", ("Z", "Y"): "X", ("Z", "Z"): "I",
}

#: Caps for exhaustive subgroup search.
SEARCH_MAX_QUBITS = 3
SEARCH_MAX_ORDER = 64

#: Largest group order for which projective closure is verified
#: exhaustively at construction time (O(|G|^2) products).
CLOSURE_CHECK_MAX_ORDER = 64


def pauli_word_operator(word: str) -> Operator:
    """Tensor-product operator for a Pauli word such as ``"XXI"``."""
    if not word or any(c not in PAULI_LETTERS for c in word):
        raise ValueError(f"invalid Pauli word {word!r}; letters must be in 'IXYZ'")
    return tensor_all([Operator(PAULI_MATRICES[c], (2,)) for c in word])


def phase_canonicalized(matrix: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the first nonzero entry is real positive."""
    flat = matrix.ravel()
    scale = np.max(np.abs(flat))
    if scale == 0.0:
        return matrix.copy()
    nz = np.flatnonzero(np.abs(flat) > 1e-12 * scale)
    pivot = flat[nz[0]]
    return matrix * (abs(pivot) / pivot)


def _words_anticommute(a: str, b: str) -> bool:
    """Whether two Pauli words anticommute (else they commute)."""
    clashes = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 1


def _word_product(a: str, b: str) -> str:
    return "".join(_LETTER_PRODUCT[x, y] for x, y in zip(a, b))


class DecouplingGroup:
    """Finite list of system unitaries, closed under products up to phase.

    The first element must be (proportional to) the identity. Every
    element is phase-canonicalized on construction; pairwise products are
    verified to land back in the set, up to phase, whenever the order is
    at most ``CLOSURE_CHECK_MAX_ORDER`` (the named constructors only
    produce closed sets, so skipping the quadratic check for very large
    groups is safe).
    """

    def __init__(self, elements: Sequence[Operator], labels: Sequence[str] | None = None):
        if not elements:
            raise ValueError("a decoupling group needs at least one element")
        dims = elements[0].dims
        canon = []
        for k, g in enumerate(elements):
            if g.dims != dims:
                raise ValueError(f"element {k} acts on dims {g.dims}, expected {dims}")
            if not g.is_unitary():
                raise ValueError(f"element {k} is not unitary to {STRUCT_TOL}")
            canon.append(Operator(phase_canonicalized(g.matrix), dims))
        eye = np.eye(canon[0].dim)
        if float(np.max(np.abs(canon[0].matrix - eye))) > STRUCT_TOL:
            raise ValueError("the first group element must be the identity (up to phase)")
        for i in range(len(canon)):
            for j in range(i + 1, len(canon)):
                if float(np.max(np.abs(canon[i].matrix - canon[j].matrix))) <= STRUCT_TOL:
                    raise ValueError(f"elements {i} and {j} coincide up to phase")
        if labels is None:
            labels = tuple(f"g{k}" for k in range(len(canon)))
        else:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(canon):
                raise ValueError("label count does not match element count")
        self.elements: tuple[Operator, ...] = tuple(canon)
        self.labels: tuple[str, ...] = labels
        if self.order <= CLOSURE_CHECK_MAX_ORDER:
            self._check_projective_closure()

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.elements[0].dims

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    def _check_projective_closure(self):
        mats = [g.matrix for g in self.elements]
        for i, a in enumerate(mats):
            for j, b in enumerate(mats):
                prod = phase_canonicalized(a @ b)
                if not any(
                    float(np.max(np.abs(prod - c))) <= STRUCT_TOL for c in mats
                ):
                    raise ValueError(
                        f"not projectively closed: product of elements "
                        f"{self.labels[i]!r} * {self.labels[j]!r} is outside the set"
                    )

    def __repr__(self) -> str:
        return f"DecouplingGroup(order={self.order}, dim={self.dim}, labels={list(self.labels)})"


def group_from_words(words: Sequence[str]) -> DecouplingGroup:
    """Build a group from an explicit list of Pauli words.

    The list is the full element list (the identity word must be present
    and listed first) and must be projectively closed; both conditions
    are validated.
    """
    words = [str(w) for w in words]
    if not words:
        raise ValueError("empty Pauli word list")
    k = len(words[0])
    if any(len(w) != k for w in words):
        raise ValueError("all Pauli words must have the same length")
    return DecouplingGroup([pauli_word_operator(w) for w in words], labels=words)


def trivial_group(n_qubits: int) -> DecouplingGroup:
    """The one-element group (free evolution) on ``n_qubits`` qubits."""
    return group_from_words(["I" * n_qubits])


def pauli_group(n_qubits: int, variant: str = "full") -> DecouplingGroup:
    """Named Pauli decoupling groups on a qubit register.

    ``full``
        All tensor products of single-qubit Paulis: a unitary error
        basis of order ``4**n_qubits``; averaging over it collapses every
        system operator to a scalar (maximal averaging).
    ``collective``
        ``{1, X..X, Y..Y, Z..Z}`` of order 4: removes every coupling
        linear in single-qubit operators.
    ``flip``
        ``{1, X..X}`` of order 2: the collective spin echo, enough for
        purely dephasing (sigma_z) couplings.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be at least 1")
    if variant == "full":
        if 4**n_qubits > 4096:
            raise ValueError(f"full Pauli group on {n_qubits} qubits exceeds the order cap")
        words = ["".join(w) for w in itertools.product(PAULI_LETTERS, repeat=n_qubits)]
    elif variant == "collective":
        words = [c * n_qubits for c in PAULI_LETTERS]
    elif variant == "flip":
        words = ["I" * n_qubits, "X" * n_qubits]
    else:
        raise ValueError(f"unknown variant {variant!r}; expected 'full', 'collective' or 'flip'")
    return group_from_words(words)


def project_commutant(op: Operator, group: DecouplingGroup) -> Operator:
    """Average ``op`` over conjugation by the group elements.

    Returns ``(1/|G|) sum_j g_j^dag op g_j``, the projection of ``op``
    onto the commutant of the group. The map is idempotent, unital,
    trace-preserving, and independent of element phases.
    """
    if op.dim != group.dim:
        raise ValueError(f"operator dim {op.dim} does not match group dim {group.dim}")
    acc = np.zeros_like(op.matrix)
    for g in group.elements:
        acc += g.matrix.conj().T @ op.matrix @ g.matrix
    return Operator(acc / group.order, op.dims)


@dataclass(frozen=True)
class CommutantBasis:
    """Orthonormal (Hilbert-Schmidt) basis of the commutant."""

    basis: tuple[Operator, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def residual_outside_span(self, op: Operator) -> float:
        """Frobenius norm of the component of ``op`` outside the span."""
        v = op.matrix.ravel()
        for b in self.basis:
            bv = b.matrix.ravel()
            v = v - np.vdot(bv, v) * bv
        return float(np.linalg.norm(v))


def commutant_basis(group: DecouplingGroup) -> CommutantBasis:
    """Orthonormal basis of the commutant, via the averaging projector.

    Projects every matrix unit through :func:`project_commutant` and
    orthonormalizes the images by modified Gram-Schmidt, discarding
    residuals below 1e-8. An independent route (the null space of the
    commutation superoperator) exists in the test suite as an oracle.
    """
    d = group.dim
    dims = group.dims
    accepted: list[np.ndarray] = []
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            img = project_commutant(Operator(unit, dims), group).matrix.ravel()
            for _ in range(2):  # re-orthogonalize for stability
                for b in accepted:
                    img = img - np.vdot(b, img) * b
            nrm = float(np.linalg.norm(img))
            if nrm >= 1e-8:
                accepted.append(img / nrm)
    ops = tuple(Operator(v.reshape(d, d), dims) for v in accepted)
    return CommutantBasis(ops)


@dataclass(frozen=True)
class DecouplingReport:
    """Outcome of checking a group against an interaction space.

    ``mode`` is ``"maximal"`` when the averaging projector kills every
    traceless system operator (commutant reduced to scalars),
    ``"selective"`` when it kills the interaction space but leaves a
    larger commutant for engineered dynamics, and ``"none"`` when some
    coupling survives. ``residuals`` holds, per interaction basis
    element, the Frobenius norm of the surviving traceless part.
    """

    mode: str
    residuals: tuple[float, ...]
    commutant_dimension: int
    effective_h_s: Operator

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


def _traceless_residual(op: Operator, group: DecouplingGroup) -> float:
    proj = project_commutant(op, group)
    tl = proj.matrix - (np.trace(proj.matrix) / op.dim) * np.eye(op.dim)
    return float(np.linalg.norm(tl))


def check_decoupling(group: DecouplingGroup, interaction, h_s: Operator) -> DecouplingReport:
    """Classify what the group's averaging does to an interaction space.

    ``interaction`` may be a ``model.InteractionSpace`` or any sequence of
    system Operators. Identity components of the interaction operators
    are ignored (they commute with everything and only shift phases).
    """
    ops = list(getattr(interaction, "basis", interaction))
    for op in ops:
        if op.dim != group.dim:
            raise ValueError("interaction operator dimension does not match the group")
    if h_s.dim != group.dim:
        raise ValueError("system Hamiltonian dimension does not match the group")
    residuals = tuple(_traceless_residual(op, group) for op in ops)
    cdim = commutant_basis(group).dimension
    if all(r <= NUMERIC_TOL for r in residuals):
        mode = "maximal" if cdim == 1 else "selective"
    else:
        mode = "none"
    return DecouplingReport(
        mode=mode,
        residuals=residuals,
        commutant_dimension=cdim,
        effective_h_s=project_commutant(h_s, group),
    )


# -- minimal-group search -------------------------------------------------
#
# Subgroups of the projective Pauli group on K qubits are F_2-linear
# subspaces of the word group, so candidates are enumerated symbolically
# (word arithmetic only) and scored by expanding each interaction operator
# in the Pauli word basis: a word component survives averaging over the
# subgroup iff it commutes with every subgroup element. Survivor groups
# are then confirmed with the dense-matrix check_decoupling path.


def _pauli_coefficients(op: Operator, words: Sequence[str]) -> dict[str, complex]:
    d = op.dim
    coeffs = {}
    for w in words:
        wm = pauli_word_operator(w).matrix
        c = np.trace(wm.conj().T @ op.matrix) / d
        if abs(c) > 1e-14:
            coeffs[w] = c
    return coeffs


def _span_of_words(gens: Sequence[str], n_qubits: int) -> frozenset[str]:
    span = {"I" * n_qubits}
    for g in gens:
        span |= {_word_product(s, g) for s in span}
    return frozenset(span)


def minimal_group_search(interaction, n_qubits: int, max_order: int = SEARCH_MAX_ORDER) -> list[DecouplingGroup]:
    """Exhaustively find the smallest Pauli subgroups that decouple.

    Enumerates every subgroup of the projective Pauli group on
    ``n_qubits`` qubits (breadth-first by order, generators in
    lexicographic word order) and returns all groups of minimal order for
    which :func:`check_decoupling` reports a mode other than ``"none"``.
    Returns an empty list if nothing within ``max_order`` works.
    """
    if n_qubits > SEARCH_MAX_QUBITS:
        raise ValueError(f"search capped at {SEARCH_MAX_QUBITS} qubits, got {n_qubits}")
    if max_order > SEARCH_MAX_ORDER:
        raise ValueError(f"search capped at order {SEARCH_MAX_ORDER}, got {max_order}")
    ops = list(getattr(interaction, "basis", interaction))
    d = 2**n_qubits
    for op in ops:
        if op.dim != d:
            raise ValueError("interaction operator dimension does not match n_qubits")

    id_word = "I" * n_qubits
    all_words = ["".join(w) for w in itertools.product(PAULI_LETTERS, repeat=n_qubits)]
    nontrivial = [w for w in all_words if w != id_word]
    coeff_tables = [_pauli_coefficients(op, nontrivial) for op in ops]

    def symbolic_decouples(span: frozenset[str]) -> bool:
        members = sorted(span)
        for table in coeff_tables:
            surviving = 0.0
            for w, c in table.items():
                if all(not _words_anticommute(w, m) for m in members):
                    surviving += abs(c) ** 2
            # Frobenius norm of the surviving traceless part: each Pauli
            # word has squared HS norm d.
            if (d * surviving) ** 0.5 > NUMERIC_TOL:
                return False
        return True

    h_s_zero = zero((2,) * n_qubits)

    def confirmed(span: frozenset[str]) -> DecouplingGroup | None:
        words = sorted(span)
        words.remove(id_word)
        group = group_from_words([id_word] + words)
        report = check_decoupling(group, ops, h_s_zero)
        return group if report.mode != "none" else None

    # Breadth-first over subgroup order (always a power of two).
    level: dict[frozenset[str], tuple[str, ...]] = {frozenset({id_word}): ()}
    order = 1
    while order <= max_order:
        hits = []
        for span, gens in sorted(level.items(), key=lambda kv: kv[1]):
            if symbolic_decouples(span):
                group = confirmed(span)
                if group is not None:
                    hits.append(group)
        if hits:
            return hits
        if 2 * order > max_order:
            return []
        nxt: dict[frozenset[str], tuple[str, ...]] = {}
        for span, gens in sorted(level.items(), key=lambda kv: kv[1]):
            for w in nontrivial:
                if w in span:
                    continue
                bigger = frozenset(span | {_word_product(s, w) for s in span})
                if bigger not in nxt:
                    nxt[bigger] = gens + (w,)
        level = nxt
        order *= 2
    return []
