"""Seeded random generators for states, ensembles and incoherent channels.

Everything runs off ``numpy.random.Generator`` (PCG64).  Functions take an
explicit generator or integer seed so that tests and the selftest suite are
bit-reproducible; per-trial generators are derived as ``rng_for(seed, k)``.
"""

from __future__ import annotations

import numpy as np

from .incoherent import IncoherentChannel, KrausOperator
from .measures import Ensemble
from .qstate import DensityMatrix, PureState

RNG_NAME = "pcg64"


def rng_for(seed, *counters) -> np.random.Generator:
    """Generator derived from (seed, counters...); order-independent trials."""
    return np.random.default_rng([int(seed), *map(int, counters)])


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_unitary(d: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    rng = _as_rng(rng)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_isometry(m: int, r: int, rng) -> np.ndarray:
    """Random m x r complex isometry (columns orthonormal), m >= r."""
    rng = _as_rng(rng)
    g = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    q, rr = np.linalg.qr(g)
    phases = np.diag(rr).copy()
    phases /= np.abs(phases)
    return q * phases


def random_pure_state(d: int, rng) -> PureState:
    rng = _as_rng(rng)
    a = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(a / np.linalg.norm(a))


def random_density_matrix(d: int, rng, rank: int | None = None) -> DensityMatrix:
    """Random mixed state: normalized G G^dag with G a d x rank Ginibre matrix."""
    rng = _as_rng(rng)
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.real(np.trace(m)))


def random_probability_vector(d: int, rng) -> np.ndarray:
    rng = _as_rng(rng)
    p = rng.dirichlet(np.ones(d))
    return p / p.sum()


def random_ensemble(d: int, size: int, rng) -> Ensemble:
    rng = _as_rng(rng)
    weights = random_probability_vector(size, rng)
    members = [random_pure_state(d, rng) for _ in range(size)]
    return Ensemble(weights, members)


def random_partition(d: int, rng, min_blocks: int = 2) -> list[list[int]]:
    """Random partition of {0..d-1} into at least ``min_blocks`` blocks."""
    rng = _as_rng(rng)
    k = int(rng.integers(min_blocks, d + 1))
    idx = rng.permutation(d)
    cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False))
    return [sorted(int(i) for i in part)
            for part in np.split(idx, cuts)]


def random_block_state(d: int, rng, min_blocks: int = 2):
    """Direct sum of pure states on a random partition of the basis.

    Returns (state, blocks, weights, members); block amplitudes are bounded
    away from zero so block detection sees each block as one component.
    """
    rng = _as_rng(rng)
    blocks = random_partition(d, rng, min_blocks=min_blocks)
    weights = random_probability_vector(len(blocks), rng)
    m = np.zeros((d, d), dtype=complex)
    members = []
    for w, block in zip(weights, blocks):
        b = len(block)
        amp = rng.uniform(0.35, 1.0, size=b) * np.exp(
            2j * np.pi * rng.uniform(size=b))
        amp = amp / np.linalg.norm(amp)
        vec = np.zeros(d, dtype=complex)
        vec[np.array(block)] = amp
        members.append(PureState(vec))
        m += w * np.outer(vec, vec.conj())
    return DensityMatrix(m), blocks, weights, members


def random_strictly_incoherent_channel(d: int, n_kraus: int,
                                       rng) -> IncoherentChannel:
    """Random channel whose Kraus operators are all permutation-shaped.

    Each operator is sum_i c_l(i) |pi_l(i)><i|; completeness holds because the
    coefficient columns are normalized across operators.
    """
    rng = _as_rng(rng)
    coeff = rng.standard_normal((n_kraus, d)) + 1j * rng.standard_normal(
        (n_kraus, d))
    coeff /= np.linalg.norm(coeff, axis=0, keepdims=True)
    kraus = []
    for ell in range(n_kraus):
        perm = rng.permutation(d)
        m = np.zeros((d, d), dtype=complex)
        m[perm, np.arange(d)] = coeff[ell]
        kraus.append(KrausOperator(m, j_map=perm, coefficients=coeff[ell]))
    return IncoherentChannel(kraus)


def random_merge_channel(d: int, rng, rows: int | None = None) -> IncoherentChannel:
    """Incoherent channel whose Kraus operators each collapse onto one basis
    state: K_l = |t_l> w_l^dag with the w_l the rows of an isometry.

    The j maps are constant per operator, hence not one-to-one: the channel
    is incoherent but generically not strictly incoherent.
    """
    rng = _as_rng(rng)
    rows = d if rows is None else rows
    v = random_isometry(rows, d, rng)
    kraus = []
    for ell in range(rows):
        t = int(rng.integers(0, d))
        w = v[ell].conj()
        m = np.zeros((d, d), dtype=complex)
        m[t, :] = w
        kraus.append(KrausOperator(m, j_map=np.full(d, t, dtype=int),
                                   coefficients=w))
    return IncoherentChannel(kraus)


def random_incoherent_channel(d: int, n_kraus: int, rng) -> IncoherentChannel:
    """Random incoherent channel with non-injective j maps: a mixture of a
    strictly incoherent channel and a merge channel."""
    rng = _as_rng(rng)
    lam = float(rng.uniform(0.2, 0.8))
    strict = random_strictly_incoherent_channel(d, n_kraus, rng)
    merge = random_merge_channel(d, rng)
    kraus = [KrausOperator(np.sqrt(lam) * k.entries, j_map=k.j_map,
                           coefficients=np.sqrt(lam) * k.coefficients)
             for k in strict.kraus]
    kraus += [KrausOperator(np.sqrt(1 - lam) * k.entries, j_map=k.j_map,
                            coefficients=np.sqrt(1 - lam) * k.coefficients)
              for k in merge.kraus]
    return IncoherentChannel(kraus)


def random_majorizing_pair(d: int, rng):
    """(source, target) pure states with diag(target) majorizing diag(source).

    The source diagonal is a random mixture of permutations of the target
    diagonal, which guarantees the majorization precondition.
    """
    rng = _as_rng(rng)
    p = random_probability_vector(d, rng)
    n_perm = int(rng.integers(2, d + 2))
    lam = random_probability_vector(n_perm, rng)
    q = np.zeros(d)
    for w in lam:
        q += w * p[rng.permutation(d)]
    q = q / q.sum()
    phase_p = np.exp(2j * np.pi * rng.uniform(size=d))
    phase_q = np.exp(2j * np.pi * rng.uniform(size=d))
    return (PureState(np.sqrt(q) * phase_q), PureState(np.sqrt(p) * phase_p))
