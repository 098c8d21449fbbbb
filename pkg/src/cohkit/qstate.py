"""Core state objects, dephasing, entropies and distance measures.

All logarithms are base 2 and every entropic quantity is reported in bits.
States are validated on construction and immutable afterwards, so they are
safe to share between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvariantViolationError,
    ResourceLimitError,
)

LN2 = math.log(2.0)

# Validation tolerances.  The Hermiticity/trace checks run on the raw input
# before symmetrization; eigenvalues in [PSD_FLOOR, 0) are treated as rounding
# dust, anything below is a genuine violation.
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_FLOOR = -1e-9
PURE_NORM_ATOL = 1e-12

# Numerical conventions for entropic quantities.
ENTROPY_EIG_FLOOR = 1e-12
SUPPORT_TOL = 1e-10

# Default cap on composite dimensions (tensor products, embeddings).
DIM_CAP = 4096


def _as_complex_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvariantViolationError("square_matrix", f"shape {m.shape}")
    return m


class DensityMatrix:
    """A d x d complex, Hermitian, PSD, unit-trace matrix.

    The raw input must be Hermitian within ``atol`` per entry; it is then
    symmetrized to absorb I/O rounding before the trace and positivity checks.
    """

    def __init__(self, matrix, *, atol: float = HERMITIAN_ATOL,
                 psd_floor: float = PSD_FLOOR):
        m = _as_complex_matrix(matrix)
        herm_defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if herm_defect > atol:
            raise InvariantViolationError(
                "hermitian", f"max deviation {herm_defect:.3e} > {atol:.1e}")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > atol:
            raise InvariantViolationError(
                "unit_trace", f"trace {tr!r} deviates by {abs(tr - 1.0):.3e}")
        eigs = np.linalg.eigvalsh(m)
        if eigs[0] < psd_floor:
            raise InvariantViolationError(
                "positive_semidefinite", f"min eigenvalue {eigs[0]:.3e}")
        m.flags.writeable = False
        self._matrix = m
        self._eigh = None

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def diagonal(self) -> np.ndarray:
        """Diagonal entries as a real vector, negative dust clipped to 0."""
        return np.clip(np.real(np.diag(self._matrix)), 0.0, None)

    def eigh(self):
        """Cached eigendecomposition (ascending eigenvalues)."""
        if self._eigh is None:
            vals, vecs = np.linalg.eigh(self._matrix)
            self._eigh = (vals, vecs)
        return self._eigh

    def max_offdiagonal(self) -> float:
        off = self._matrix - np.diag(np.diag(self._matrix))
        return float(np.max(np.abs(off))) if self.dim > 1 else 0.0

    @classmethod
    def from_pure(cls, psi: "PureState") -> "DensityMatrix":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()))

    @classmethod
    def from_diagonal(cls, probs) -> "DensityMatrix":
        p = np.asarray(probs, dtype=float)
        return cls(np.diag(p.astype(complex)))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d, dtype=complex) / d)

    def to_dict(self) -> dict:
        return {"dim": self.dim,
                "matrix": [[_c2j(z) for z in row] for row in self._matrix]}

    @classmethod
    def from_dict(cls, data: dict, **kwargs) -> "DensityMatrix":
        d = int(data["dim"])
        m = np.array([[_j2c(z) for z in row] for row in data["matrix"]],
                     dtype=complex)
        if m.shape != (d, d):
            raise InvariantViolationError(
                "json_shape", f"declared dim {d}, matrix shape {m.shape}")
        return cls(m, **kwargs)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class PureState:
    """A unit-norm complex amplitude vector in the fixed incoherent basis."""

    def __init__(self, amplitudes, *, atol: float = PURE_NORM_ATOL):
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if a.size == 0:
            raise InvariantViolationError("dimension", "empty amplitude vector")
        norm2 = float(np.real(np.vdot(a, a)))
        if abs(norm2 - 1.0) > atol:
            raise InvariantViolationError(
                "unit_norm", f"|amplitudes|^2 = {norm2!r}")
        a.flags.writeable = False
        self._amplitudes = a

    @property
    def dim(self) -> int:
        return self._amplitudes.size

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def probabilities(self) -> np.ndarray:
        """Diagonal of the projector: |amplitude|^2 per basis index."""
        a = self._amplitudes
        return np.real(a * a.conj())

    def to_density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(a)
        if n == 0:
            raise InvariantViolationError("unit_norm", "zero vector")
        return cls(a / n)

    @classmethod
    def basis_state(cls, d: int, i: int) -> "PureState":
        a = np.zeros(d, dtype=complex)
        a[i] = 1.0
        return cls(a)

    def to_dict(self) -> dict:
        return {"dim": self.dim,
                "amplitudes": [_c2j(z) for z in self._amplitudes]}

    @classmethod
    def from_dict(cls, data: dict, **kwargs) -> "PureState":
        d = int(data["dim"])
        a = np.array([_j2c(z) for z in data["amplitudes"]], dtype=complex)
        if a.size != d:
            raise InvariantViolationError(
                "json_shape", f"declared dim {d}, {a.size} amplitudes")
        return cls(a, **kwargs)

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class BasisPartition:
    """A partition of the basis indices {0, ..., d-1} into disjoint blocks.

    The all-singletons partition recovers the ordinary basis-diagonal theory;
    coarser partitions give the block-decohering generalization.
    """

    def __init__(self, dim: int, blocks):
        blocks = [tuple(sorted(int(i) for i in b)) for b in blocks]
        seen = set()
        for b in blocks:
            for i in b:
                if i < 0 or i >= dim:
                    raise InvariantViolationError(
                        "partition_range", f"index {i} outside [0, {dim})")
                if i in seen:
                    raise InvariantViolationError(
                        "partition_disjoint", f"index {i} in two blocks")
                seen.add(i)
        if len(seen) != dim:
            raise InvariantViolationError(
                "partition_cover", f"{dim - len(seen)} indices uncovered")
        self.dim = dim
        self.blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        mask = np.zeros((dim, dim), dtype=bool)
        for b in self.blocks:
            idx = np.array(b)
            mask[np.ix_(idx, idx)] = True
        mask.flags.writeable = False
        self._mask = mask

    @classmethod
    def singleton(cls, dim: int) -> "BasisPartition":
        return cls(dim, [[i] for i in range(dim)])

    def mask(self) -> np.ndarray:
        """Boolean d x d matrix marking same-block entry pairs."""
        return self._mask

    def block_of(self, index: int) -> int:
        for j, b in enumerate(self.blocks):
            if index in b:
                return j
        raise IndexError(index)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_dict(cls, data: dict) -> "BasisPartition":
        return cls(int(data["dim"]), data["blocks"])

    def __repr__(self):
        return f"BasisPartition(dim={self.dim}, blocks={self.blocks})"


@dataclass(frozen=True)
class DistanceReport:
    """Fidelity, (normalized) trace distance and Bures distance of a pair."""
    fidelity: float
    trace_distance: float
    bures: float


def dephase(rho: DensityMatrix, partition: BasisPartition | None = None) -> DensityMatrix:
    """Pinching map: delete all off-block entries.

    With the default singleton partition this keeps only the diagonal.
    """
    if partition is None:
        return DensityMatrix(np.diag(np.diag(rho.matrix)))
    if partition.dim != rho.dim:
        raise DimensionMismatchError(
            f"partition dim {partition.dim} != state dim {rho.dim}")
    return DensityMatrix(np.where(partition.mask(), rho.matrix, 0.0))


def shannon_entropy(probs) -> float:
    """Base-2 Shannon entropy; weights below the eigenvalue floor contribute 0."""
    p = np.asarray(probs, dtype=float)
    p = p[p >= ENTROPY_EIG_FLOOR]
    if p.size == 0:
        return 0.0
    return float(max(0.0, -np.sum(p * np.log2(p))))


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x)."""
    if x < 0.0 or x > 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    return shannon_entropy([x, 1.0 - x])


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -tr rho log2 rho, in bits."""
    vals, _ = rho.eigh()
    return shannon_entropy(vals)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum relative entropy S(rho||sigma) in bits.

    Returns +inf when the support of rho is not contained in the support of
    sigma (eigenvalues below ``SUPPORT_TOL`` count as zero).
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")
    svals, svecs = sigma.eigh()
    # rho expressed in sigma's eigenbasis; only the diagonal enters the trace.
    rho_in_s = np.real(np.einsum(
        "ia,ij,ja->a", svecs.conj(), rho.matrix, svecs))
    null = svals < SUPPORT_TOL
    if np.any(null) and float(np.sum(rho_in_s[null])) > SUPPORT_TOL:
        return math.inf
    keep = ~null
    cross = float(np.sum(rho_in_s[keep] * np.log2(svals[keep])))
    rvals, _ = rho.eigh()
    r = rvals[rvals >= ENTROPY_EIG_FLOOR]
    tr_rho_log_rho = float(np.sum(r * np.log2(r))) if r.size else 0.0
    return max(0.0, tr_rho_log_rho - cross)


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues in [PSD_FLOOR, 0) are clamped to 0; anything lower is an
    invariant violation of the input.
    """
    vals, vecs = np.linalg.eigh(matrix)
    if vals[0] < PSD_FLOOR:
        raise InvariantViolationError(
            "positive_semidefinite", f"min eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1]."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")
    sr = _sqrtm_psd(rho.matrix)
    vals = np.linalg.eigvalsh(sr @ sigma.matrix @ sr)
    vals = np.clip(vals, 0.0, None)
    return float(np.clip(np.sum(np.sqrt(vals)), 0.0, 1.0))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) ||rho - sigma||_1."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")
    vals = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return 0.5 * float(np.sum(np.abs(vals)))


def distances(rho: DensityMatrix, sigma: DensityMatrix) -> DistanceReport:
    """Fidelity, trace distance and Bures distance B = sqrt(2(1-F))."""
    f = fidelity(rho, sigma)
    td = trace_distance(rho, sigma)
    bures = math.sqrt(max(0.0, 2.0 * (1.0 - f)))
    return DistanceReport(fidelity=f, trace_distance=td, bures=bures)


def tensor(rho: DensityMatrix, sigma: DensityMatrix,
           cap: int = DIM_CAP) -> DensityMatrix:
    """Kronecker product of two states; errors if the output dim exceeds cap."""
    out_dim = rho.dim * sigma.dim
    if out_dim > cap:
        raise ResourceLimitError(
            f"tensor output dim {out_dim} exceeds cap {cap}")
    return DensityMatrix(np.kron(rho.matrix, sigma.matrix))


def tensor_pure(a: PureState, b: PureState, cap: int = DIM_CAP) -> PureState:
    out_dim = a.dim * b.dim
    if out_dim > cap:
        raise ResourceLimitError(
            f"tensor output dim {out_dim} exceeds cap {cap}")
    return PureState(np.kron(a.amplitudes, b.amplitudes))


# -- JSON helpers -------------------------------------------------------------

def _c2j(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _j2c(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    return complex(obj)


def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def save_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def state_from_dict(data: dict, **kwargs):
    """Dispatch a parsed state JSON object to the right constructor."""
    if "matrix" in data:
        return DensityMatrix.from_dict(data, **kwargs)
    if "amplitudes" in data:
        return PureState.from_dict(data, **kwargs)
    if "blocks" in data:
        return BasisPartition.from_dict(data)
    raise InvariantViolationError(
        "json_schema", "expected one of: matrix, amplitudes, blocks")


def load_state(path: str, **kwargs):
    return state_from_dict(load_json(path), **kwargs)
