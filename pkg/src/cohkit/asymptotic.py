"""Finite-blocklength Monte Carlo for coherence concentration, dilution and
formation, plus a statistical check of the operator covering bound and the
rank-limited converse fidelity bound.

Everything n-copy is represented through types (letter counts) and exact
log-probabilities; no 2^n-dimensional object is ever materialized except in
the explicitly small-dimension reconstruction path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ResourceLimitError
from .measures import Ensemble, coherence_of_formation, entropy_of_coherence, \
    relative_entropy_of_coherence
from .qstate import DensityMatrix, PureState, fidelity, shannon_entropy

# Compute budgets ("budget exceeded" errors beyond these).
MAX_N_LOG_DIM = 1e7          # concentration: n * log2(dim)
MAX_TYPE_COUNT = 2e7         # typical-set probability: number of types
MAX_SEQUENCES = 1e5          # covering: full type-class enumeration
MAX_GRAM = 4000              # covering: Gram-matrix side length
MAX_RECONSTRUCT_DIM = 4096   # formation: dim**n for state reconstruction
MEMBERSHIP_TOL = 1e-12       # absorbs float dust at typicality boundaries

RNG_NAME = "pcg64"


def _rng_for(seed, *counters) -> np.random.Generator:
    return np.random.default_rng([int(seed), *map(int, counters)])


@dataclass(frozen=True)
class TypeMeasurementOutcome:
    """One outcome of the type measurement on n copies."""
    type_counts: np.ndarray
    probability: float
    log_class_size: float     # log2 |T(P)|, exact via log-factorials
    achieved_rate: float      # log_class_size / n, bits per copy


@dataclass
class ProtocolTrace:
    """Per-trial record of a protocol simulation."""
    n: int
    trials: int
    rates: list
    mean_rate: float
    fidelity: list
    target_rate: float
    seed: int
    rng: str = RNG_NAME
    reconstruction_fidelity: float | None = None
    fidelity_floor: float | None = None

    def to_dict(self) -> dict:
        out = {"n": self.n, "trials": self.trials,
               "rates": [float(r) for r in self.rates],
               "mean_rate": self.mean_rate,
               "fidelity": [float(f) for f in self.fidelity],
               "target_rate": self.target_rate,
               "seed": self.seed, "rng": self.rng}
        if self.reconstruction_fidelity is not None:
            out["reconstruction_fidelity"] = self.reconstruction_fidelity
            out["fidelity_floor"] = self.fidelity_floor
        return out


def log2_type_class_size(counts) -> float:
    """log2 of the multinomial coefficient n! / prod(counts!)."""
    c = np.asarray(counts, dtype=float)
    n = float(c.sum())
    return float((gammaln(n + 1.0) - np.sum(gammaln(c + 1.0))) / math.log(2.0))


def type_measurement(probs, n: int, rng) -> TypeMeasurementOutcome:
    """Sample the type measurement: a multinomial type and its statistics."""
    p = np.asarray(probs, dtype=float)
    counts = rng.multinomial(n, p / p.sum())
    log_size = log2_type_class_size(counts)
    with np.errstate(divide="ignore"):
        log_q = np.where(p > 0, np.log(np.maximum(p, 1e-300)), 0.0)
    log_prob = (log_size * math.log(2.0)) + float(np.sum(counts * log_q))
    return TypeMeasurementOutcome(
        type_counts=counts, probability=math.exp(log_prob),
        log_class_size=log_size, achieved_rate=log_size / n)


def simulate_concentration(psi: PureState, n: int, trials: int,
                           seed: int = 0) -> ProtocolTrace:
    """Concentration protocol: type measurement on n copies, the surviving
    state is maximally coherent on the observed type class.

    The achieved rate of a trial is log2 |T(P)| / n; the conditional output
    fidelity is 1 by construction.
    """
    if n * math.log2(max(psi.dim, 2)) > MAX_N_LOG_DIM:
        raise ResourceLimitError(
            f"n log2(dim) = {n * math.log2(psi.dim):.3g} over budget")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    probs = psi.probabilities()
    target = entropy_of_coherence(psi)
    rates = []
    for t in range(trials):
        outcome = type_measurement(probs, n, _rng_for(seed, t))
        rates.append(outcome.achieved_rate)
    return ProtocolTrace(n=n, trials=trials, rates=rates,
                         mean_rate=float(np.mean(rates)),
                         fidelity=[1.0] * trials, target_rate=target,
                         seed=seed)


def _kept_letters(probs, floor: float = 1e-12):
    p = np.asarray(probs, dtype=float)
    p = p[p > floor]
    return p / p.sum()


def typical_set_probability(probs, n: int, delta: float) -> float:
    """Exact probability of the entropy-typical set of n-letter sequences.

    A sequence is typical when its per-symbol surprisal -log2(q)/n lies
    within delta of H(Q).  Computed by summing the multinomial law over
    integer types (exact log-factorials, no sequence enumeration and no
    Stirling approximation).
    """
    q = _kept_letters(probs)
    d = q.size
    if d == 1:
        return 1.0
    if math.comb(n + d - 1, d - 1) > MAX_TYPE_COUNT:
        raise ResourceLimitError(
            f"{math.comb(n + d - 1, d - 1)} types over budget")
    v = -np.log2(q)
    h = float(np.dot(q, v))
    ln_q = np.log(q)
    tol = delta + MEMBERSHIP_TOL
    ln_n_fact = gammaln(n + 1.0)

    if d == 2:
        k = np.arange(n + 1)
        mean = (v[0] * (n - k) + v[1] * k) / n
        mask = np.abs(mean - h) <= tol
        if not np.any(mask):
            return 0.0
        km = k[mask]
        lp = (ln_n_fact - gammaln(km + 1.0) - gammaln(n - km + 1.0)
              + km * ln_q[1] + (n - km) * ln_q[0])
        return float(min(1.0, np.exp(lp).sum()))

    total = 0.0

    def recurse(idx, rem, vsum, lnfact, lnq_sum):
        nonlocal total
        if idx == d - 2:
            k = np.arange(rem + 1)
            mean = (vsum + k * v[idx] + (rem - k) * v[idx + 1]) / n
            mask = np.abs(mean - h) <= tol
            if np.any(mask):
                km = k[mask]
                lp = (ln_n_fact - lnfact - gammaln(km + 1.0)
                      - gammaln(rem - km + 1.0) + lnq_sum
                      + km * ln_q[idx] + (rem - km) * ln_q[idx + 1])
                total += float(np.exp(lp).sum())
            return
        for c in range(rem + 1):
            recurse(idx + 1, rem - c, vsum + c * v[idx],
                    lnfact + gammaln(c + 1.0), lnq_sum + c * ln_q[idx])

    recurse(0, n, 0.0, 0.0, 0.0)
    return float(min(1.0, total))


def dilution_blocklength(probs, delta: float, eps: float) -> int:
    """Hoeffding-predicted n at which the typical set misses at most eps."""
    q = _kept_letters(probs)
    if q.size == 1:
        return 1
    v = -np.log2(q)
    spread = float(v.max() - v.min())
    if spread == 0.0:
        return 1
    return int(math.ceil(spread * spread * math.log(2.0 / eps)
                         / (2.0 * delta * delta)))


def simulate_dilution(psi: PureState, n: int, delta: float,
                      seed: int = 0) -> ProtocolTrace:
    """Dilution protocol: prepare the typical truncation of psi^(n) from
    n (H + delta) unit coherence bits.

    The preparation succeeds deterministically; the output fidelity with the
    exact n-copy state is sqrt(Pr(typical set)), evaluated exactly.
    """
    probs = psi.probabilities()
    h = shannon_entropy(probs)
    pr = typical_set_probability(probs, n, delta)
    rate = h + delta
    return ProtocolTrace(n=n, trials=1, rates=[rate], mean_rate=rate,
                         fidelity=[math.sqrt(pr)], target_rate=h, seed=seed)


def distillable_rate(rho: DensityMatrix) -> float:
    """The asymptotically achievable distillation rate: the relative entropy
    of coherence (the distillation protocol itself is not simulated here)."""
    return relative_entropy_of_coherence(rho)


def _freq_typical_log_prob_box(weights, n: int, delta: float):
    """Integer count windows for the frequency-typical set."""
    w = np.asarray(weights, dtype=float)
    lo = np.maximum(0, np.ceil(n * (w - delta) - 1e-9).astype(int))
    hi = np.minimum(n, np.floor(n * (w + delta) + 1e-9).astype(int))
    return lo, hi


def frequency_typical_probability(weights, n: int, delta: float) -> float:
    """Exact multinomial mass of {counts : |counts_j/n - w_j| <= delta}."""
    w = np.asarray(weights, dtype=float)
    m = w.size
    if m == 1:
        return 1.0
    lo, hi = _freq_typical_log_prob_box(w, n, delta)
    if np.any(lo > hi):
        return 0.0
    widths = hi[:-1] - lo[:-1] + 1
    if float(np.prod(widths.astype(float))) > 1e7:
        raise ResourceLimitError("frequency-typical box over budget")
    ln_w = np.log(np.maximum(w, 1e-300))
    ln_n_fact = gammaln(n + 1.0)
    total = 0.0
    counts = np.zeros(m, dtype=int)

    def recurse(idx, used, lnfact, lnw_sum):
        nonlocal total
        if idx == m - 1:
            last = n - used
            if lo[idx] <= last <= hi[idx]:
                lp = (ln_n_fact - lnfact - gammaln(last + 1.0)
                      + lnw_sum + last * ln_w[idx])
                total += math.exp(lp)
            return
        for c in range(lo[idx], min(hi[idx], n - used) + 1):
            recurse(idx + 1, used + c, lnfact + gammaln(c + 1.0),
                    lnw_sum + c * ln_w[idx])

    recurse(0, 0, 0.0, 0.0)
    return min(1.0, total)


def _sample_typical_counts(weights, n, delta, rng, max_attempts=10000):
    lo, hi = _freq_typical_log_prob_box(weights, n, delta)
    for _ in range(max_attempts):
        counts = rng.multinomial(n, weights)
        if np.all(counts >= lo) and np.all(counts <= hi):
            return counts
    raise ResourceLimitError(
        "frequency-typical sampling failed; enlarge delta1 or n")


def _typical_truncation_vector(psi: PureState, copies: int,
                               delta: float) -> np.ndarray:
    """Normalized truncation of psi^(copies) to its entropy-typical basis
    sequences (explicit amplitudes; only used at small dimensions)."""
    a = psi.amplitudes
    probs = psi.probabilities()
    with np.errstate(divide="ignore"):
        v = np.where(probs > 1e-300, -np.log2(np.maximum(probs, 1e-300)), 0.0)
    h = shannon_entropy(probs)
    vec = np.array([1.0], dtype=complex)
    surplus = np.array([0.0])
    for _ in range(copies):
        vec = np.kron(vec, a)
        surplus = (surplus[:, None] + v[None, :]).reshape(-1)
    mask = np.abs(surplus / copies - h) <= delta + MEMBERSHIP_TOL
    vec = np.where(mask, vec, 0.0)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ResourceLimitError("typical set empty at this (n, delta)")
    return vec / norm


def _position_order(tensor_groups, seq, d):
    """Reorder a group-ordered product vector into position order."""
    n = seq.size
    order = np.argsort(seq, kind="stable")
    full = tensor_groups.reshape((d,) * n)
    inv = np.empty(n, dtype=int)
    inv[order] = np.arange(n)
    return np.transpose(full, axes=inv).reshape(-1)


def simulate_formation(rho: DensityMatrix, n: int, delta1: float,
                       delta2: float, seed: int = 0,
                       ensemble: Ensemble | None = None, trials: int = 100,
                       reconstruct: bool = False,
                       restarts: int = 32) -> ProtocolTrace:
    """Formation protocol accounting: sample a frequency-typical member
    sequence and dilute each member group at window delta2.

    Per-trial consumed rate is sum_j (f_j + delta1)(S(diag psi_j) + delta2)
    with f_j the empirical member frequencies; it converges to the ensemble
    average coherence + O(delta).  Per-trial fidelity is the product of the
    exact per-group dilution fidelities.  With ``reconstruct`` (requires
    dim**n within budget) the protocol's output state is assembled and its
    fidelity with rho^(n) is reported along with the provable floor
    (1 - eps1)(1 - eps2)^m.
    """
    if ensemble is None:
        ensemble = coherence_of_formation(rho, restarts=restarts,
                                          seed=seed).ensemble
    weights = np.asarray(ensemble.weights, dtype=float)
    weights = weights / weights.sum()
    coherences = np.array([entropy_of_coherence(m) for m in ensemble.members])
    target = float(np.dot(weights, coherences))
    m = weights.size

    rates = []
    fidelities = []
    sampled_counts = []
    for t in range(trials):
        rng = _rng_for(seed, t)
        counts = _sample_typical_counts(weights, n, delta1, rng)
        sampled_counts.append(counts)
        freqs = counts / n
        rates.append(float(np.dot(freqs + delta1, coherences + delta2)))
        fid = 1.0
        for j in range(m):
            if counts[j] == 0 or coherences[j] == 0.0:
                continue
            pr = typical_set_probability(ensemble.members[j].probabilities(),
                                         int(counts[j]), delta2)
            fid *= math.sqrt(pr)
        fidelities.append(fid)

    trace = ProtocolTrace(n=n, trials=trials, rates=rates,
                          mean_rate=float(np.mean(rates)),
                          fidelity=fidelities, target_rate=target, seed=seed)
    if reconstruct:
        trace.reconstruction_fidelity, trace.fidelity_floor = \
            _reconstruct_formation_output(rho, ensemble, n, delta1, delta2)
    return trace


def _reconstruct_formation_output(rho, ensemble, n, delta1, delta2):
    d = rho.dim
    if d ** n > MAX_RECONSTRUCT_DIM:
        raise ResourceLimitError(
            f"dim**n = {d ** n} exceeds {MAX_RECONSTRUCT_DIM}")
    weights = np.asarray(ensemble.weights, dtype=float)
    m = weights.size
    if float(m) ** n > MAX_SEQUENCES:
        raise ResourceLimitError("member sequence enumeration over budget")
    lo, hi = _freq_typical_log_prob_box(weights, n, delta1)

    # Cache per-(member, copies) typical truncations and their fidelities.
    trunc: dict = {}

    def truncation(j, copies):
        key = (j, copies)
        if key not in trunc:
            psi = ensemble.members[j]
            vec = _typical_truncation_vector(psi, copies, delta2)
            exact = np.array([1.0], dtype=complex)
            for _ in range(copies):
                exact = np.kron(exact, psi.amplitudes)
            trunc[key] = (vec, abs(np.vdot(vec, exact)))
        return trunc[key]

    out = np.zeros((d ** n, d ** n), dtype=complex)
    prob_typical = 0.0
    min_group_fid = 1.0
    seqs = np.stack(np.meshgrid(*([np.arange(m)] * n),
                                indexing="ij")).reshape(n, -1).T
    log_w = np.log(np.maximum(weights, 1e-300))
    for seq in seqs:
        counts = np.bincount(seq, minlength=m)
        if np.any(counts < lo) or np.any(counts > hi):
            continue
        p_seq = math.exp(float(np.sum(counts * log_w)))
        prob_typical += p_seq
        group_vec = np.array([1.0], dtype=complex)
        for j in range(m):
            if counts[j] == 0:
                continue
            vec, gf = truncation(j, int(counts[j]))
            group_vec = np.kron(group_vec, vec)
            min_group_fid = min(min_group_fid, gf)
        pos_vec = _position_order(group_vec, seq, d)
        out += p_seq * np.outer(pos_vec, pos_vec.conj())
    if prob_typical == 0.0:
        raise ResourceLimitError("frequency-typical set empty; enlarge delta1")
    out /= prob_typical

    exact = rho.matrix
    for _ in range(n - 1):
        exact = np.kron(exact, rho.matrix)
    f = fidelity(DensityMatrix(exact), DensityMatrix(out))
    floor = prob_typical * min_group_fid ** m
    return f, floor


@dataclass
class CoveringCheckReport:
    """Empirical deviations of subset averages from the type-class average."""
    S: int
    M: int
    deviations: list
    fraction_good: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"S": self.S, "M": self.M,
                "deviations": [float(x) for x in self.deviations],
                "fraction_good": {str(k): float(v)
                                  for k, v in self.fraction_good.items()}}


def _apportion_counts(weights, n: int) -> np.ndarray:
    """Largest-remainder apportionment of n among the letters."""
    w = np.asarray(weights, dtype=float)
    raw = w * n
    counts = np.floor(raw).astype(int)
    rem = n - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:rem]] += 1
    return counts


def _multiset_permutations(counts: np.ndarray) -> np.ndarray:
    """All distinct letter sequences with the given counts, as an array."""
    n = int(counts.sum())
    m = counts.size
    seqs = []
    seq = np.empty(n, dtype=np.int8)

    def recurse(pos, remaining):
        if pos == n:
            seqs.append(seq.copy())
            return
        for j in range(m):
            if remaining[j] > 0:
                remaining[j] -= 1
                seq[pos] = j
                recurse(pos + 1, remaining)
                remaining[j] += 1

    recurse(0, counts.copy())
    return np.stack(seqs)


def covering_check(ensemble: Ensemble, n: int, S: int, trials: int,
                   seed: int = 0, eps_grid=(0.05, 0.1, 0.2, 0.4),
                   max_subsets_per_trial: int | None = None) -> CoveringCheckReport:
    """Monte Carlo check of the covering concentration: random S-subsets of a
    type class have average states close to the class average.

    The type class is the apportioned type of the ensemble weights; each
    trial partitions it uniformly at random (without replacement) into
    subsets of size S and records the trace-norm deviation of each evaluated
    subset average from the class average.  Trace norms are computed in the
    span of the class (Gram-matrix reduction), never in dimension d^n.
    """
    weights = np.asarray(ensemble.weights, dtype=float)
    m = weights.size
    if float(m) ** n > MAX_SEQUENCES:
        raise ResourceLimitError(f"{m}^{n} sequences over budget")
    counts = _apportion_counts(weights, n)
    class_size = int(round(2 ** log2_type_class_size(counts)))
    if class_size > MAX_GRAM:
        raise ResourceLimitError(
            f"type class size {class_size} exceeds Gram budget {MAX_GRAM}")
    if S < 1 or S > class_size:
        raise ValueError(f"subset size {S} outside [1, {class_size}]")

    seqs = _multiset_permutations(counts)
    big_n = seqs.shape[0]
    vecs = np.stack([psi.amplitudes for psi in ensemble.members])
    overlap = vecs.conj() @ vecs.T            # <psi_a | psi_b>
    gram = np.ones((big_n, big_n), dtype=complex)
    for t in range(n):
        gram *= overlap[seqs[:, None, t], seqs[None, :, t]]
    gram = 0.5 * (gram + gram.conj().T)
    if float(np.max(np.abs(gram.imag))) < 1e-14:
        gram = gram.real  # real spans use the faster symmetric solver
    lam, qmat = np.linalg.eigh(gram)
    keep = lam > max(1e-12, 1e-12 * float(lam[-1]))
    lam = lam[keep]
    basis = qmat[:, keep] * np.sqrt(lam)      # rows: sequences, cols: span basis
    class_term = np.diag(lam) / big_n

    n_subsets = big_n // S
    cap = n_subsets if max_subsets_per_trial is None else min(
        n_subsets, max_subsets_per_trial)
    deviations = []
    for t in range(trials):
        rng = _rng_for(seed, t)
        perm = rng.permutation(big_n)
        for s_idx in range(cap):
            idx = perm[s_idx * S:(s_idx + 1) * S]
            sub = basis[idx]
            diff = (sub.conj().T @ sub) / S - class_term
            eigs = np.linalg.eigvalsh(diff)
            deviations.append(float(np.sum(np.abs(eigs))))
    fraction_good = {eps: float(np.mean(np.asarray(deviations) < eps))
                     for eps in eps_grid}
    return CoveringCheckReport(S=S, M=n_subsets, deviations=deviations,
                               fraction_good=fraction_good)


def converse_fidelity_bound(n: int, R: float, Rtilde: float) -> float:
    """2^(-n (Rtilde - R) / 2): ceiling on the fidelity of any rank-2^{nR}
    diagonal-support output with a maximally coherent state of rate Rtilde."""
    if Rtilde <= R:
        raise ValueError(f"Rtilde {Rtilde} must exceed R {R}")
    return 2.0 ** (-0.5 * n * (Rtilde - R))
