"""Dense complex operators on tensor-product Hilbert spaces.

Everything downstream (system-bath models, decoupling groups, pulse
schedules, propagation) is built on the :class:`Operator` wrapper: a dense
complex square matrix tagged with the ordered list of tensor-factor
dimensions of the space it acts on. Hamiltonians carry angular-frequency
units (hbar = 1); unitaries and density matrices are dimensionless.

Operators are immutable. The wrapped array is write-protected at
construction and every operation returns a new instance, so any function
in this package may be called concurrently without locking.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

#: Hard cap on the total Hilbert-space dimension.
DIM_CAP = 4096

#: Absolute tolerance for structural identities (hermiticity, unitarity,
#: projector algebra), relative to max(1, magnitude).
STRUCT_TOL = 1e-10

#: Tolerance for iterative / numerical comparisons.
NUMERIC_TOL = 1e-8


class Operator:
    """A dense complex matrix with tensor-factor bookkeeping.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix of shape ``(d, d)``.
    dims : sequence of int, optional
        Tensor-factor dimensions; their product must equal ``d``.
        Defaults to the single factor ``(d,)``.
    """

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        arr = np.array(matrix, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {arr.shape}")
        d = arr.shape[0]
        if d < 1:
            raise ValueError("operator dimension must be at least 1")
        if d > DIM_CAP:
            raise ValueError(f"dimension {d} exceeds the hard cap {DIM_CAP}")
        if dims is None:
            dims = (d,)
        dims = tuple(int(n) for n in dims)
        if any(n < 1 for n in dims) or math.prod(dims) != d:
            raise ValueError(f"dims {dims} do not multiply to matrix dimension {d}")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("Operator instances are immutable")

    # -- basic queries ----------------------------------------------------

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.matrix))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix))) if self.dim else 0.0

    def is_hermitian(self, tol: float = STRUCT_TOL) -> bool:
        scale = max(1.0, self.max_abs())
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) <= tol * scale

    def is_unitary(self, tol: float = STRUCT_TOL) -> bool:
        gram = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(gram - np.eye(self.dim)))) <= tol

    # -- arithmetic --------------------------------------------------------

    def _require_same_space(self, other: "Operator"):
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.dims != self.dims:
            raise ValueError(f"operator spaces differ: dims {self.dims} vs {other.dims}")

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.matrix - other.matrix, self.dims)

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.dims)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.matrix * complex(scalar), self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Operator":
        return Operator(self.matrix / complex(scalar), self.dims)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.matrix @ other.matrix, self.dims)

    def __repr__(self) -> str:
        return f"Operator(d={self.dim}, dims={self.dims})"


def identity(dims) -> Operator:
    """Identity operator; ``dims`` may be an int or a dimension list."""
    if isinstance(dims, int):
        dims = (dims,)
    d = math.prod(dims)
    return Operator(np.eye(d), dims)


def zero(dims) -> Operator:
    """Zero operator; ``dims`` may be an int or a dimension list."""
    if isinstance(dims, int):
        dims = (dims,)
    d = math.prod(dims)
    return Operator(np.zeros((d, d)), dims)


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product with ``a``'s indices major; dims concatenate."""
    return Operator(np.kron(a.matrix, b.matrix), a.dims + b.dims)


def tensor_all(ops: Sequence[Operator]) -> Operator:
    """Left-to-right tensor product of a nonempty operator sequence."""
    if not ops:
        raise ValueError("tensor_all requires at least one operator")
    out = ops[0]
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def expm_hermitian(h: Operator, t: float) -> Operator:
    """Unitary ``exp(-i H t)`` of a Hermitian generator.

    Computed by spectral decomposition: diagonalize ``H``, exponentiate the
    (real) eigenvalues, reassemble. Exact unitarity of the result is then
    limited only by the accuracy of the eigenbasis.
    """
    if not h.is_hermitian():
        raise ValueError("expm_hermitian requires a Hermitian generator")
    w, v = np.linalg.eigh(h.matrix)
    phases = np.exp(-1j * w * float(t))
    return Operator((v * phases) @ v.conj().T, h.dims)


def partial_trace_bath(rho: Operator, n_system_factors: int) -> Operator:
    """Trace out every tensor factor beyond the first ``n_system_factors``."""
    nf = len(rho.dims)
    if not 1 <= n_system_factors <= nf:
        raise ValueError(
            f"n_system_factors must be in [1, {nf}], got {n_system_factors}"
        )
    if not rho.is_hermitian():
        raise ValueError("partial_trace_bath requires a Hermitian operator")
    keep = rho.dims[:n_system_factors]
    a = math.prod(keep)
    b = rho.dim // a
    m = rho.matrix.reshape(a, b, a, b)
    return Operator(np.einsum("ibjb->ij", m), keep)


def distance(a: Operator, b: Operator, metric: str = "frobenius") -> float:
    """Distance between two same-shape operators.

    ``frobenius`` is the entrywise 2-norm of the difference; ``trace`` is
    half the sum of the singular values of the difference (for density
    matrices this is the usual trace distance).
    """
    if a.matrix.shape != b.matrix.shape:
        raise ValueError(f"shape mismatch: {a.matrix.shape} vs {b.matrix.shape}")
    diff = a.matrix - b.matrix
    if metric == "frobenius":
        return float(np.linalg.norm(diff))
    if metric == "trace":
        return 0.5 * float(np.sum(np.linalg.svd(diff, compute_uv=False)))
    raise ValueError(f"unknown metric {metric!r}; expected 'frobenius' or 'trace'")
