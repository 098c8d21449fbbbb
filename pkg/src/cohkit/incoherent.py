"""Incoherent Kraus machinery: validation, channel classification, selective
application, majorization testing with constructive witnesses, and explicit
synthesis of pure-state transformations.

An incoherent Kraus operator has at most one nonzero entry per column,
K = sum_i c(i) |j(i)><i|; it is strictly incoherent when its adjoint is
incoherent too, i.e. when j is one-to-one on the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import (
    DimensionMismatchError,
    InvariantViolationError,
    ResourceLimitError,
    TransformationImpossibleError,
)
from .qstate import (
    BasisPartition,
    DensityMatrix,
    PureState,
    _c2j,
    _j2c,
    DIM_CAP,
)

COMPLETENESS_ATOL = 1e-9
CERTIFICATE_ATOL = 1e-12
INCOHERENT_ENTRY_TOL = 1e-12
ZERO_AMPLITUDE_TOL = 1e-12

STRICTLY_INCOHERENT = "strictly_incoherent"
INCOHERENT = "incoherent"
NON_COHERENCE_GENERATING = "non_coherence_generating"
UNCLASSIFIED = "unclassified"


class KrausOperator:
    """A Kraus operator, optionally carrying an incoherence certificate.

    The certificate is the pair (j_map, coefficients) exhibiting the form
    K = sum_i c(i) |j(i)><i|; when present it is validated entrywise.
    """

    def __init__(self, entries, j_map=None, coefficients=None):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2:
            raise InvariantViolationError("kraus_shape", f"ndim {m.ndim}")
        m = m.copy()
        m.flags.writeable = False
        self.entries = m
        self.j_map = None if j_map is None else np.asarray(j_map, dtype=int)
        self.coefficients = (None if coefficients is None
                             else np.asarray(coefficients, dtype=complex))
        if (self.j_map is None) != (self.coefficients is None):
            raise InvariantViolationError(
                "certificate", "j_map and coefficients must come together")
        if self.j_map is not None:
            self._validate_certificate()

    def _validate_certificate(self):
        rows, cols = self.entries.shape
        if self.j_map.size != cols or self.coefficients.size != cols:
            raise InvariantViolationError(
                "certificate", "certificate length != column count")
        rebuilt = np.zeros_like(self.entries)
        rebuilt[self.j_map, np.arange(cols)] = self.coefficients
        defect = float(np.max(np.abs(rebuilt - self.entries)))
        if defect > CERTIFICATE_ATOL:
            raise InvariantViolationError(
                "certificate", f"max deviation {defect:.3e}")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def adjoint(self) -> "KrausOperator":
        return KrausOperator(self.entries.conj().T)


class IncoherentChannel:
    """A cptp map given by Kraus operators, with a free-class label.

    Completeness sum K^dag K = 1 is enforced on construction.
    """

    def __init__(self, kraus, class_label: str = UNCLASSIFIED, birkhoff=None):
        if not kraus:
            raise InvariantViolationError("channel", "no Kraus operators")
        ops = [k if isinstance(k, KrausOperator) else KrausOperator(k)
               for k in kraus]
        shapes = {(k.rows, k.cols) for k in ops}
        if len(shapes) > 1:
            raise DimensionMismatchError(f"mixed Kraus shapes {shapes}")
        self.kraus = ops
        self.class_label = class_label
        self.birkhoff = birkhoff
        defect = self.completeness_defect()
        if defect > COMPLETENESS_ATOL:
            raise InvariantViolationError(
                "completeness", f"max deviation {defect:.3e}")

    @property
    def dim_in(self) -> int:
        return self.kraus[0].cols

    @property
    def dim_out(self) -> int:
        return self.kraus[0].rows

    def completeness_defect(self) -> float:
        acc = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for k in self.kraus:
            acc += k.entries.conj().T @ k.entries
        return float(np.max(np.abs(acc - np.eye(self.dim_in))))

    def to_dict(self) -> dict:
        out = {"dim_in": self.dim_in, "dim_out": self.dim_out,
               "kraus": [[[_c2j(z) for z in row] for row in k.entries]
                         for k in self.kraus],
               "class": self.class_label}
        if all(k.j_map is not None for k in self.kraus):
            out["certificates"] = [
                {"j": [int(j) for j in k.j_map],
                 "c": [_c2j(z) for z in k.coefficients]}
                for k in self.kraus]
        if self.birkhoff is not None:
            out["birkhoff"] = [{"weight": float(w), "perm": [int(i) for i in p]}
                               for w, p in self.birkhoff]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "IncoherentChannel":
        mats = [np.array([[_j2c(z) for z in row] for row in m], dtype=complex)
                for m in data["kraus"]]
        certs = data.get("certificates")
        if certs is not None and len(certs) == len(mats):
            ops = [KrausOperator(m, j_map=c["j"],
                                 coefficients=[_j2c(z) for z in c["c"]])
                   for m, c in zip(mats, certs)]
        else:
            ops = [KrausOperator(m) for m in mats]
        birkhoff = None
        if "birkhoff" in data:
            birkhoff = [(float(b["weight"]), np.asarray(b["perm"], dtype=int))
                        for b in data["birkhoff"]]
        return cls(ops, class_label=data.get("class", UNCLASSIFIED),
                   birkhoff=birkhoff)


def _block_masses(k: np.ndarray, blocks_out, blocks_in) -> np.ndarray:
    """Frobenius mass of each (output block, input block) sub-matrix."""
    masses = np.zeros((len(blocks_out), len(blocks_in)))
    for a, bo in enumerate(blocks_out):
        for b, bi in enumerate(blocks_in):
            sub = k[np.ix_(np.array(bo), np.array(bi))]
            masses[a, b] = float(np.linalg.norm(sub))
    return masses


def kraus_is_incoherent(k: KrausOperator,
                        partition: BasisPartition | None = None,
                        tol: float = INCOHERENT_ENTRY_TOL):
    """Whether K maps each basis block into a single block.

    Returns (flag, j_map) where j_map[i] is the output block hit by input
    block i (or -1 for blocks annihilated by K).  With the default singleton
    partition this is the at-most-one-nonzero-per-column test.
    """
    m = k.entries
    if partition is None:
        j_map = np.full(k.cols, -1, dtype=int)
        for i in range(k.cols):
            nz = np.flatnonzero(np.abs(m[:, i]) > tol)
            if nz.size > 1:
                return False, None
            if nz.size == 1:
                j_map[i] = nz[0]
        return True, j_map
    blocks = partition.blocks
    masses = _block_masses(m, blocks, blocks)
    j_map = np.full(len(blocks), -1, dtype=int)
    for b in range(len(blocks)):
        hit = np.flatnonzero(masses[:, b] > tol)
        if hit.size > 1:
            return False, None
        if hit.size == 1:
            j_map[b] = hit[0]
    return True, j_map


def kraus_is_strictly_incoherent(k: KrausOperator,
                                 partition: BasisPartition | None = None,
                                 tol: float = INCOHERENT_ENTRY_TOL) -> bool:
    """K and K^dag both incoherent, i.e. j one-to-one on the support."""
    ok, _ = kraus_is_incoherent(k, partition, tol)
    if not ok:
        return False
    ok_adj, _ = kraus_is_incoherent(k.adjoint(), partition, tol)
    return ok_adj


def apply_channel(ch: IncoherentChannel, rho: DensityMatrix) -> DensityMatrix:
    """sum_l K_l rho K_l^dag."""
    if ch.dim_in != rho.dim:
        raise DimensionMismatchError(
            f"channel dim_in {ch.dim_in} != state dim {rho.dim}")
    acc = np.zeros((ch.dim_out, ch.dim_out), dtype=complex)
    for k in ch.kraus:
        acc += k.entries @ rho.matrix @ k.entries.conj().T
    return DensityMatrix(acc)


def apply_selective(ch: IncoherentChannel, rho: DensityMatrix,
                    prob_floor: float = 1e-12):
    """Measurement outcomes [(p_l, rho_l)] with p_l rho_l = K_l rho K_l^dag.

    Outcomes with probability below ``prob_floor`` are dropped.
    """
    if ch.dim_in != rho.dim:
        raise DimensionMismatchError(
            f"channel dim_in {ch.dim_in} != state dim {rho.dim}")
    outcomes = []
    for k in ch.kraus:
        m = k.entries @ rho.matrix @ k.entries.conj().T
        p = float(np.real(np.trace(m)))
        if p < prob_floor:
            continue
        outcomes.append((p, DensityMatrix(m / p)))
    return outcomes


def classify_channel(ch: IncoherentChannel,
                     partition: BasisPartition | None = None) -> str:
    """Classify the channel within the free-operation hierarchy.

    strictly_incoherent and incoherent are representation-dependent tests on
    the given Kraus set; non_coherence_generating is the representation-free
    test that the channel preserves the (block-)diagonal operator subspace.
    """
    if partition is not None and partition.dim != ch.dim_in:
        raise DimensionMismatchError(
            f"partition dim {partition.dim} != channel dim {ch.dim_in}")
    flags = [kraus_is_incoherent(k, partition)[0] for k in ch.kraus]
    if all(flags):
        if all(kraus_is_strictly_incoherent(k, partition) for k in ch.kraus):
            return STRICTLY_INCOHERENT
        return INCOHERENT
    if _preserves_diagonal_subspace(ch, partition):
        return NON_COHERENCE_GENERATING
    return UNCLASSIFIED


def _preserves_diagonal_subspace(ch: IncoherentChannel,
                                 partition: BasisPartition | None,
                                 tol: float = 1e-10) -> bool:
    d = ch.dim_in
    if partition is None:
        partition = BasisPartition.singleton(d)
    out_mask = partition.mask() if ch.dim_out == d else None
    if out_mask is None:
        # Rectangular channels are compared against the singleton output grid.
        out_mask = np.eye(ch.dim_out, dtype=bool)
    for block in partition.blocks:
        for a in block:
            for b in block:
                basis_op = np.zeros((d, d), dtype=complex)
                basis_op[a, b] = 1.0
                image = np.zeros((ch.dim_out, ch.dim_out), dtype=complex)
                for k in ch.kraus:
                    image += k.entries @ basis_op @ k.entries.conj().T
                if float(np.max(np.abs(image[~out_mask]))) > tol:
                    return False
    return True


@dataclass
class MajorizationWitness:
    """Outcome of a majorization test p > q, with constructive certificates.

    When the relation holds, ``bistochastic`` D satisfies q = D p and
    ``birkhoff`` decomposes D into at most (d-1)^2 + 1 permutations, so that
    q = sum_pi lambda_pi p^pi with p^pi(i) = p[pi(i)].
    """
    holds: bool
    source_spectrum: np.ndarray
    target_spectrum: np.ndarray
    bistochastic: np.ndarray | None = None
    birkhoff: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"holds": self.holds,
               "source_spectrum": [float(x) for x in self.source_spectrum],
               "target_spectrum": [float(x) for x in self.target_spectrum]}
        if self.bistochastic is not None:
            out["bistochastic"] = [[float(x) for x in row]
                                   for row in self.bistochastic]
            out["birkhoff"] = [{"weight": float(w),
                                "perm": [int(i) for i in p]}
                               for w, p in self.birkhoff]
        return out


def _check_probability_vector(p: np.ndarray, name: str, atol: float):
    if np.any(p < -atol):
        raise InvariantViolationError(name, "negative entry")
    if abs(float(p.sum()) - 1.0) > atol:
        raise InvariantViolationError(name, f"sum {float(p.sum())!r} != 1")


def _t_transform_chain(p_sorted: np.ndarray, q_sorted: np.ndarray) -> np.ndarray:
    """Doubly stochastic D with q_sorted = D p_sorted, built from at most
    d-1 T-transforms (Hardy-Littlewood-Polya construction)."""
    d = p_sorted.size
    current = p_sorted.astype(float).copy()
    ds = np.eye(d)
    for _ in range(d - 1):
        diff = current - q_sorted
        if float(np.max(np.abs(diff))) <= 1e-13:
            break
        above = np.flatnonzero(diff > 1e-13)
        if above.size == 0:
            break
        j = int(above[-1])                       # largest index with p_j > q_j
        below = np.flatnonzero(diff[j + 1:] < -1e-13)
        if below.size == 0:
            break
        k = j + 1 + int(below[0])                # smallest index > j below q
        delta = min(current[j] - q_sorted[j], q_sorted[k] - current[k])
        lam = 1.0 - delta / (current[j] - current[k])
        t = np.eye(d)
        t[j, j] = t[k, k] = lam
        t[j, k] = t[k, j] = 1.0 - lam
        current = t @ current
        ds = t @ ds
    return ds


def _birkhoff_greedy(ds: np.ndarray, tol: float = 1e-12):
    """Greedy Birkhoff decomposition via max-weight perfect matchings."""
    d = ds.shape[0]
    residual = ds.copy()
    remaining = 1.0
    terms = []
    for _ in range(d * d):
        if remaining <= tol:
            break
        weights = np.where(residual > tol, np.log(np.maximum(residual, tol)),
                           -1e9)
        rows, cols = scipy.optimize.linear_sum_assignment(weights,
                                                          maximize=True)
        perm = np.empty(d, dtype=int)
        perm[rows] = cols
        lam = float(np.min(residual[rows, cols]))
        if lam <= tol:
            break
        terms.append((lam, perm))
        residual[rows, cols] -= lam
        remaining -= lam
    if remaining > 1e-9:
        raise InvariantViolationError(
            "birkhoff", f"residual mass {remaining:.3e} not decomposed")
    total = sum(w for w, _ in terms)
    return [(w / total, p) for w, p in terms]


def _caratheodory_reduce(terms, d: int, limit: int):
    """Reduce a convex combination of permutations to at most ``limit`` terms
    without changing the represented matrix (Caratheodory pruning)."""
    while len(terms) > limit:
        mats = np.stack([_perm_matrix(p, d).reshape(-1) for _, p in terms])
        rows = np.vstack([mats.T, np.ones(len(terms))])
        # The affine hull of the permutation matrices has dimension (d-1)^2,
        # so with more than (d-1)^2 + 1 terms an affine dependency c exists:
        # rows @ c = 0.  Shifting the weights along -c zeroes one of them.
        _, _, vt = np.linalg.svd(rows)
        c = vt[-1]
        if float(np.linalg.norm(rows @ c)) > 1e-9:
            break
        if not np.any(c > 1e-15):
            c = -c
        pos = c > 1e-15
        if not np.any(pos):
            break
        weights = np.array([w for w, _ in terms])
        t = float(np.min(weights[pos] / c[pos]))
        new_weights = weights - t * c
        new_terms = [(float(w), p) for w, (_, p) in zip(new_weights, terms)
                     if w > 1e-14]
        if len(new_terms) >= len(terms):
            break
        terms = new_terms
    total = sum(w for w, _ in terms)
    return [(w / total, p) for w, p in terms]


def _perm_matrix(perm: np.ndarray, d: int) -> np.ndarray:
    m = np.zeros((d, d))
    m[np.arange(d), perm] = 1.0
    return m


def majorization_check(p, q, atol: float = 1e-9) -> MajorizationWitness:
    """Test whether p majorizes q; on success produce constructive witnesses.

    ``holds`` is true when every sorted-descending partial sum of p dominates
    the corresponding partial sum of q (tolerance 1e-10 per partial sum).
    The witnesses are expressed in the original (unsorted) coordinates:
    q = D p with D doubly stochastic, and D = sum lambda_pi P_pi with at most
    (d-1)^2 + 1 permutations.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    d = max(p.size, q.size)
    p = np.pad(p, (0, d - p.size))
    q = np.pad(q, (0, d - q.size))
    _check_probability_vector(p, "probability_vector", atol)
    _check_probability_vector(q, "probability_vector", atol)

    order_p = np.argsort(-p, kind="stable")
    order_q = np.argsort(-q, kind="stable")
    p_sorted = p[order_p]
    q_sorted = q[order_q]
    partial = np.cumsum(p_sorted) - np.cumsum(q_sorted)
    holds = bool(np.all(partial >= -1e-10))
    if not holds:
        return MajorizationWitness(holds=False, source_spectrum=q_sorted,
                                   target_spectrum=p_sorted)

    ds_sorted = _t_transform_chain(p_sorted, q_sorted)
    # Undo the sorting: row permutation for q, column permutation for p.
    ds = np.zeros((d, d))
    ds[np.ix_(order_q, order_p)] = ds_sorted
    terms = _birkhoff_greedy(ds)
    limit = (d - 1) ** 2 + 1
    if len(terms) > limit:
        terms = _caratheodory_reduce(terms, d, limit)
    return MajorizationWitness(holds=True, source_spectrum=q_sorted,
                               target_spectrum=p_sorted, bistochastic=ds,
                               birkhoff=terms)


def maximally_coherent(d: int) -> PureState:
    """The uniform-amplitude state; the d = 2 case is the unit resource."""
    if d < 2:
        raise InvariantViolationError("dimension", f"d = {d} < 2")
    return PureState(np.full(d, 1.0 / math.sqrt(d), dtype=complex))


def rank_of_diagonal(psi: PureState) -> int:
    """Number of basis indices carrying weight above 1e-12; this rank cannot
    increase under (probabilistic) incoherent operations."""
    return int(np.sum(psi.probabilities() > ZERO_AMPLITUDE_TOL))


def synthesize_pure_transformation(source: PureState,
                                   target: PureState) -> IncoherentChannel:
    """Strictly incoherent channel mapping ``source`` deterministically to
    ``target`` (up to phase), built from the Birkhoff witness.

    Requires diag(target) to majorize diag(source); raises
    :class:`TransformationImpossibleError` carrying the witness otherwise.
    Every Kraus operator K_pi = sum_i sqrt(lambda_pi p_pi(i) / q_i)
    |pi(i)><i| (dressed with the amplitude phases) maps the source onto the
    target with outcome probability lambda_pi.
    """
    if source.dim != target.dim:
        raise DimensionMismatchError(
            f"source dim {source.dim} != target dim {target.dim}")
    d = source.dim
    q = source.probabilities()
    p = target.probabilities()
    witness = majorization_check(p, q)
    if not witness.holds:
        raise TransformationImpossibleError(
            "target diagonal does not majorize source diagonal",
            witness=witness)

    src_support = np.flatnonzero(q > ZERO_AMPLITUDE_TOL)
    tgt_support = np.flatnonzero(p > ZERO_AMPLITUDE_TOL)
    dr = src_support.size
    # Reduced problem on the source support; target slots are its nonzero
    # entries padded with zeros (majorization forces |supp p| <= |supp q|).
    out_index = list(tgt_support) + [i for i in range(d)
                                     if i not in set(tgt_support)]
    out_index = np.array(out_index[:dr], dtype=int)
    q_red = q[src_support]
    p_red = np.zeros(dr)
    p_red[:tgt_support.size] = p[tgt_support]
    reduced = majorization_check(p_red, q_red)
    if not reduced.holds:
        raise TransformationImpossibleError(
            "reduced majorization failed", witness=reduced)

    src_phase = np.angle(source.amplitudes)
    tgt_phase = np.angle(target.amplitudes)
    kraus = []
    for lam, perm in reduced.birkhoff:
        j_map = np.zeros(d, dtype=int)
        coeff = np.zeros(d, dtype=complex)
        j_map[np.arange(d)] = np.arange(d)
        for i in range(dr):
            col = src_support[i]
            row = out_index[perm[i]]
            j_map[col] = row
            amp = math.sqrt(lam * p_red[perm[i]] / q_red[i])
            coeff[col] = amp * np.exp(1j * (tgt_phase[row] - src_phase[col]))
        m = np.zeros((d, d), dtype=complex)
        m[j_map[src_support], src_support] = coeff[src_support]
        kraus.append(KrausOperator(m, j_map=j_map, coefficients=coeff))
    if dr < d:
        # Source components of zero weight never occur; route them through an
        # identity block so the channel stays complete and strictly incoherent.
        dead = np.array([i for i in range(d) if i not in set(src_support)])
        m = np.zeros((d, d), dtype=complex)
        m[dead, dead] = 1.0
        coeff = np.zeros(d, dtype=complex)
        coeff[dead] = 1.0
        kraus.append(KrausOperator(m, j_map=np.arange(d), coefficients=coeff))
    return IncoherentChannel(kraus, class_label=STRICTLY_INCOHERENT,
                             birkhoff=reduced.birkhoff)


def generate_from_maximally_coherent(target: DensityMatrix) -> IncoherentChannel:
    """Incoherent channel preparing ``target`` from the maximally coherent
    state of the same dimension, by mixing per-eigenvector syntheses."""
    d = target.dim
    source = maximally_coherent(d)
    vals, vecs = target.eigh()
    keep = np.flatnonzero(vals > 1e-12)
    weights = vals[keep]
    weights = weights / weights.sum()
    kraus = []
    for w, idx in zip(weights, keep):
        branch = synthesize_pure_transformation(source,
                                                PureState(vecs[:, idx]))
        for k in branch.kraus:
            kraus.append(KrausOperator(math.sqrt(w) * k.entries,
                                       j_map=k.j_map,
                                       coefficients=math.sqrt(w) * k.coefficients))
    channel = IncoherentChannel(kraus)
    channel.class_label = classify_channel(channel)
    return channel


def embed_maximally_correlated(rho: DensityMatrix,
                               cap: int = DIM_CAP) -> DensityMatrix:
    """The maximally correlated two-copy image: rho_ij |ii><jj|.

    This is what a CNOT produces from rho tensor |0><0|; it carries the
    coherence measures of rho over to entanglement measures.
    """
    d = rho.dim
    if d * d > cap:
        raise ResourceLimitError(f"embedded dim {d * d} exceeds cap {cap}")
    out = np.zeros((d * d, d * d), dtype=complex)
    diag_idx = np.arange(d) * d + np.arange(d)
    out[np.ix_(diag_idx, diag_idx)] = rho.matrix
    return DensityMatrix(out)


def cnot_channel(d: int = 2) -> IncoherentChannel:
    """The two-qudit CNOT |i>|j> -> |i>|i+j mod d>, a basis permutation."""
    dim = d * d
    perm = np.empty(dim, dtype=int)
    for i in range(d):
        for j in range(d):
            perm[i * d + j] = i * d + (i + j) % d
    m = np.zeros((dim, dim), dtype=complex)
    m[perm, np.arange(dim)] = 1.0
    return IncoherentChannel(
        [KrausOperator(m, j_map=perm, coefficients=np.ones(dim))],
        class_label=STRICTLY_INCOHERENT)


def dephasing_channel(d: int) -> IncoherentChannel:
    """Kraus set {|i><i|}; implements the singleton pinching."""
    kraus = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1.0
        j_map = np.full(d, i, dtype=int)
        coeff = np.zeros(d, dtype=complex)
        coeff[i] = 1.0
        kraus.append(KrausOperator(m, j_map=j_map, coefficients=coeff))
    return IncoherentChannel(kraus, class_label=STRICTLY_INCOHERENT)
