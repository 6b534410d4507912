"""Phase-estimation measurement of a normalized symmetric observable.

Pipeline: normalize A by the instance's norm bound b, measure the observable
through p-bit phase estimation on U = exp(iA), map each p-bit outcome a to an
eigenvalue estimate z, average z^m over k independent shots, and rescale by
b^m.  Parameter budgets come from the accuracy target alone:

    p     = 2 * ceil(log2(48 m / eps))      phase register width
    theta = eps / 13                        per-shot phase failure chance
    eta   = eps / (13 pi m)                 per-shot phase accuracy
    k     = ceil(18 ln(2/fail_prob)/eps^2)  shots (Hoeffding)
    delta = eps / (3 * 2^(p+2))             tolerated error per exp(iA) call

Two interchangeable backends produce outcome samples: a statevector
simulation of the phase-estimation circuit (capped at 22 total qubits), and
an analytic sampler that draws from the exact outcome distribution

    Pr(a | phase phi) = sin^2(pi T d) / (T^2 sin^2(pi d)),  d = phi - a/T

per eigen-atom by rejection, which needs no 2^p-sized vector and therefore
runs at any register width.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from dee.sparse import DeeDecision, DeeInstance, SparseSymmetricMatrix, decide
from dee.spectral import SpectralMeasure, eig_sym, induced_measure

_TWO_PI = 2.0 * math.pi

STATEVECTOR = "statevector"
ANALYTIC = "analytic"


@dataclass(frozen=True)
class QpeParams:
    """Full parameter budget for one estimation run.

    The constructor re-derives every bound, so a hand-built instance cannot
    silently run outside the regime the error analysis covers.
    """

    m: int
    epsilon: float
    fail_prob: float
    p: int
    theta: float
    eta: float
    k: int
    delta: float

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"power m must be >= 1, got {self.m}")
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0 < self.fail_prob < 1:
            raise ValueError(f"fail_prob must lie in (0, 1), got {self.fail_prob}")
        p_req = 2 * math.ceil(math.log2(48 * self.m / self.epsilon))
        if self.p != p_req:
            raise ValueError(f"p must be {p_req} for m={self.m}, eps={self.epsilon}, got {self.p}")
        if not 0 < self.theta < self.epsilon / 12:
            raise ValueError(f"theta={self.theta} not strictly inside (0, eps/12)")
        if not 0 < self.eta < self.epsilon / (12 * math.pi * self.m):
            raise ValueError(f"eta={self.eta} not strictly inside (0, eps/(12 pi m))")
        k_req = 18.0 * math.log(2.0 / self.fail_prob) / self.epsilon**2
        if self.k < k_req:
            raise ValueError(f"k={self.k} below the Hoeffding requirement {k_req}")
        if not 0 < self.delta <= self.epsilon / (3.0 * 2 ** (self.p + 2)):
            raise ValueError(f"delta={self.delta} exceeds eps/(3*2^(p+2))")


def choose_params(m: int, epsilon: float, fail_prob: float) -> QpeParams:
    """Smallest budget meeting accuracy eps*b^m with the given failure odds."""
    if m < 1:
        raise ValueError(f"power m must be >= 1, got {m}")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0 < fail_prob < 1:
        raise ValueError(f"fail_prob must lie in (0, 1), got {fail_prob}")
    p = 2 * math.ceil(math.log2(48 * m / epsilon))
    return QpeParams(
        m=m,
        epsilon=epsilon,
        fail_prob=fail_prob,
        p=p,
        theta=epsilon / 13.0,
        eta=epsilon / (13.0 * math.pi * m),
        k=math.ceil(18.0 * math.log(2.0 / fail_prob) / epsilon**2),
        delta=epsilon / (3.0 * 2 ** (p + 2)),
    )


@dataclass(frozen=True)
class MeasurementSample:
    """One phase-estimation shot: raw outcome a and its eigenvalue estimate z."""

    a: int
    z: float


@dataclass(frozen=True)
class EstimatorBackend:
    variant: str
    max_qubits: int = 22

    def __post_init__(self) -> None:
        if self.variant not in (STATEVECTOR, ANALYTIC):
            raise ValueError(f"unknown backend variant {self.variant!r}")
        if self.max_qubits < 1:
            raise ValueError("max_qubits must be >= 1")


def statevector_backend(max_qubits: int = 22) -> EstimatorBackend:
    return EstimatorBackend(variant=STATEVECTOR, max_qubits=max_qubits)


def analytic_backend() -> EstimatorBackend:
    return EstimatorBackend(variant=ANALYTIC)


def outcome_to_z(a: int, p: int) -> float:
    """Map a p-bit outcome to an eigenvalue estimate in [-1, 1].

    Outcomes near 0 (resp. 2^p) decode small positive (resp. negative)
    eigenvalues as 2 pi a / 2^p shifted into (-pi, pi]; the dead zones where
    no eigenvalue of a normalized observable can land clip to +-1.
    """
    t = 1 << p
    if not 0 <= a < t:
        raise ValueError(f"outcome {a} out of range for p={p}")
    cut = t / _TWO_PI
    if a < cut:
        return _TWO_PI * a / t
    if a < t / 2:
        return 1.0
    if a < t - cut:
        return -1.0
    return _TWO_PI * (a - t) / t


def outcomes_to_z(a_values: np.ndarray, p: int) -> np.ndarray:
    """Vectorized outcome_to_z."""
    t = float(1 << p)
    a = np.asarray(a_values, dtype=np.float64)
    if a.size and (a.min() < 0 or a.max() >= t):
        raise ValueError(f"outcome out of range for p={p}")
    cut = t / _TWO_PI
    return np.select(
        [a < cut, a < t / 2, a < t - cut],
        [_TWO_PI * a / t, np.ones_like(a), -np.ones_like(a)],
        default=_TWO_PI * (a - t) / t,
    )


def eigenphase(lam: float) -> float:
    """Phase phi in [0, 1] with exp(i * lam) = exp(2 pi i phi)."""
    return (lam % _TWO_PI) / _TWO_PI


# exact outcome probability at circular grid offset d = wrap(phi*T - a)
def _outcome_prob(d: float, t: float) -> float:
    if d == 0.0:
        return 1.0
    num = math.sin(math.pi * d)
    den = t * math.sin(math.pi * d / t)
    return (num / den) ** 2


def qpe_distribution_analytic(measure: SpectralMeasure, p: int) -> np.ndarray:
    """Exact outcome distribution over all 2^p outcomes for a spectral measure.

    Materializes the full vector, so p is capped at 24; the rejection sampler
    covers larger registers.
    """
    if p < 1:
        raise ValueError(f"register width p must be >= 1, got {p}")
    if p > 24:
        raise ValueError(f"p={p} needs a 2^{p}-entry vector; sample instead")
    total = math.fsum(w for _, w in measure.atoms)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"measure weights sum to {total}; normalize first")
    t = 1 << p
    out = np.zeros(t)
    chunk = 1 << 20
    for lam, w in measure.atoms:
        if abs(lam) > 1.0 + 1e-9:
            raise ValueError(f"eigenvalue {lam} outside [-1, 1]; normalize by the norm bound")
        phi = eigenphase(lam)
        for start in range(0, t, chunk):
            a = np.arange(start, min(start + chunk, t), dtype=np.float64)
            delta = phi - a / t
            frac = delta - np.round(delta)
            ratio = np.sinc(t * frac) / np.sinc(frac)
            out[start : start + a.size] += w * ratio**2
    return out


def _check_statevector_budget(dim: int, p: int, backend: EstimatorBackend) -> None:
    n_equiv = max(1, (dim - 1).bit_length())
    if p + n_equiv > backend.max_qubits:
        raise ValueError(
            f"statevector backend needs p + ceil(log2 N) = {p} + {n_equiv} qubits, "
            f"over the cap {backend.max_qubits}; use the analytic backend"
        )


def qpe_statevector(
    a_normalized: np.ndarray, psi: np.ndarray, p: int, max_qubits: int = 22
) -> np.ndarray:
    """Outcome distribution by simulating the phase-estimation circuit.

    Hadamards put the register in a uniform superposition (row c of the joint
    state holds psi / sqrt(T)), each controlled power multiplies the rows
    whose control bit is set by exp(iA)^(2^l), and the inverse Fourier
    transform over the register index is a length-T DFT.
    """
    decomp = eig_sym(a_normalized)
    dim = len(decomp.eigenvalues)
    _check_statevector_budget(dim, p, statevector_backend(max_qubits))
    if float(np.max(np.abs(decomp.eigenvalues))) > 1.0 + 1e-9:
        raise ValueError("spectral norm exceeds 1; normalize by the norm bound first")
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (dim,):
        raise ValueError(f"state shape {psi.shape} does not match dimension {dim}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("state must be normalized")
    t = 1 << p
    beta = decomp.eigenvectors.T @ psi  # eigenbasis coordinates; V is real
    coef = np.tile(beta / math.sqrt(t), (t, 1))
    reg = np.arange(t)
    for l in range(p):
        mask = (reg >> l) & 1 == 1
        coef[mask] *= np.exp(1j * float(2**l) * decomp.eigenvalues)
    state = np.fft.fft(coef, axis=0) / math.sqrt(t)  # inverse QFT on the register
    return np.sum(np.abs(state) ** 2, axis=1)


def qpe_distribution_unitary(
    u: np.ndarray, psi: np.ndarray, p: int, max_qubits: int = 22
) -> np.ndarray:
    """Same circuit for an arbitrary unitary, powers by repeated squaring.

    Used to measure how a perturbed exp(iA) call shifts the outcome
    distribution; the controlled powers apply U^(2^l) exactly, matching a
    circuit that repeats the controlled-U block.
    """
    u = np.asarray(u, dtype=np.complex128)
    dim = u.shape[0]
    if u.shape != (dim, dim):
        raise ValueError(f"unitary must be square, got {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(dim), atol=1e-9):
        raise ValueError("matrix is not unitary within 1e-9")
    _check_statevector_budget(dim, p, statevector_backend(max_qubits))
    psi = np.asarray(psi, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("state must be normalized")
    t = 1 << p
    state = np.tile(psi / math.sqrt(t), (t, 1))
    reg = np.arange(t)
    upow = u
    for l in range(p):
        mask = (reg >> l) & 1 == 1
        state[mask] = state[mask] @ upow.T
        if l + 1 < p:
            upow = upow @ upow
    state = np.fft.fft(state, axis=0) / math.sqrt(t)
    return np.sum(np.abs(state) ** 2, axis=1)


def moment_of_distribution(probs: np.ndarray, p: int, m: int) -> float:
    """E[Z^m] under an outcome distribution."""
    t = 1 << p
    if probs.shape != (t,):
        raise ValueError(f"distribution length {probs.shape} does not match p={p}")
    z = outcomes_to_z(np.arange(t), p)
    return float(np.dot(probs, z**m))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _sample_outcome_for_phase(phi: float, p: int, gen: np.random.Generator) -> int:
    """Draw one outcome a ~ Pr(a | phi) exactly, by rejection.

    Proposal: center a* = round(phi*T), offset j with envelope weight 1 at
    j=0 and 1/(2|j|-1)^2 otherwise.  The target satisfies
    Pr(a) <= 1/(4 d^2) for circular offset d and |d| >= |j| - 1/2, so the
    envelope dominates and acceptance runs at a constant rate (~29%).
    """
    t = 1 << p
    tf = float(t)
    x0 = phi * tf
    a_star = int(round(x0))
    half = t // 2
    tail = math.pi**2 / 8.0  # sum of 1/(2i-1)^2
    z_total = 1.0 + 2.0 * tail
    while True:
        u = gen.random() * z_total
        if u < 1.0:
            j = 0
        else:
            w = u - 1.0
            side = 1 if w < tail else -1
            v = w - tail if w >= tail else w
            cum = 0.0
            i = 0
            while True:
                i += 1
                cum += 1.0 / (2 * i - 1) ** 2
                if v < cum or i > t:
                    break
            if i > t:
                continue
            j = side * i
        if j <= -half or j > half:
            continue
        a = (a_star + j) % t
        d = (a - x0 + tf / 2.0) % tf - tf / 2.0
        prob = _outcome_prob(d, tf)
        envelope = 1.0 if j == 0 else 1.0 / (2 * abs(j) - 1) ** 2
        if gen.random() * envelope <= prob:
            return a


def _sample_range(
    lo: int,
    hi: int,
    children: list[np.random.SeedSequence],
    draw_one,
    out: np.ndarray,
) -> None:
    for i in range(lo, hi):
        gen = np.random.Generator(np.random.Philox(children[i]))
        out[i] = draw_one(gen)


def sample_measurements(
    matrix: SparseSymmetricMatrix,
    b: float,
    psi: np.ndarray,
    params: QpeParams,
    backend: EstimatorBackend | None = None,
    seed: int | tuple = 0,
    workers: int = 1,
) -> np.ndarray:
    """k independent phase-estimation outcomes for observable A/b in state psi.

    Every shot owns a Philox stream spawned from the seed, so the outcome
    array is identical for any worker count.
    """
    if backend is None:
        backend = analytic_backend()
    if workers < 1:
        raise ValueError("workers must be >= 1")
    dense = matrix.to_dense() / b
    if backend.variant == STATEVECTOR:
        _check_statevector_budget(matrix.dim, params.p, backend)
        probs = qpe_statevector(dense, psi, params.p, backend.max_qubits)
        cdf = np.cumsum(probs)
        top = len(cdf) - 1

        def draw_one(gen: np.random.Generator) -> int:
            return min(int(np.searchsorted(cdf, gen.random(), side="right")), top)

    else:
        measure = induced_measure(eig_sym(dense), psi)
        for lam, _ in measure.atoms:
            if abs(lam) > 1.0 + 1e-9:
                raise ValueError(
                    f"eigenvalue {lam} outside [-1, 1]; b must dominate the spectral norm"
                )
        values = [lam for lam, _ in measure.atoms]
        cdf = np.cumsum([w for _, w in measure.atoms])
        top = len(values) - 1

        def draw_one(gen: np.random.Generator) -> int:
            idx = min(int(np.searchsorted(cdf, gen.random(), side="right")), top)
            return _sample_outcome_for_phase(eigenphase(values[idx]), params.p, gen)

    children = np.random.SeedSequence(seed).spawn(params.k)
    out = np.zeros(params.k, dtype=np.int64)
    if workers == 1:
        _sample_range(0, params.k, children, draw_one, out)
    else:
        step = -(-params.k // workers)
        ranges = [(lo, min(lo + step, params.k)) for lo in range(0, params.k, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(_sample_range, lo, hi, children, draw_one, out) for lo, hi in ranges
            ]
            for f in futs:
                f.result()
    return out


def estimate_from_outcomes(a_values: np.ndarray, params: QpeParams, b: float) -> float:
    """mean(z^m) * b^m over the sampled outcomes (pairwise deterministic sum)."""
    z = outcomes_to_z(a_values, params.p)
    zm = z**params.m
    return float(np.sum(zm)) / len(a_values) * b**params.m


def _estimate_moment(
    matrix: SparseSymmetricMatrix,
    b: float,
    psi: np.ndarray,
    params: QpeParams,
    backend: EstimatorBackend | None,
    seed: int | tuple,
    workers: int,
) -> float:
    a_values = sample_measurements(matrix, b, psi, params, backend, seed, workers)
    return estimate_from_outcomes(a_values, params, b)


def estimate_diag(
    instance: DeeInstance,
    params: QpeParams,
    backend: EstimatorBackend | None = None,
    seed: int | tuple = 0,
    workers: int = 1,
) -> DeeDecision:
    """Estimate (A^m)_jj to accuracy eps*b^m and decide the side of g.

    With probability at least 1 - fail_prob the estimate is within eps*b^m
    of the true value, so on promise instances the decision is correct.
    """
    if params.m != instance.m or params.epsilon != instance.epsilon:
        raise ValueError(
            f"params (m={params.m}, eps={params.epsilon}) do not match instance "
            f"(m={instance.m}, eps={instance.epsilon})"
        )
    psi = np.zeros(instance.matrix.dim)
    psi[instance.j] = 1.0
    estimate = _estimate_moment(
        instance.matrix, instance.b, psi, params, backend, seed, workers
    )
    return decide(estimate, instance.g)


def estimate_offdiag(
    matrix: SparseSymmetricMatrix,
    i: int,
    j: int,
    m: int,
    params: QpeParams,
    backend: EstimatorBackend | None = None,
    seed: int | tuple = 0,
    workers: int = 1,
) -> float:
    """Estimate (A^m)_ij for i != j via the polarization identity.

    (A^m)_ij = (<psi+|A^m|psi+> - <psi-|A^m|psi->) / 2 with
    psi+- = (e_i +- e_j)/sqrt(2); each sub-estimate runs at accuracy eps/2
    so the combination lands within eps * b^m.
    """
    if i == j:
        raise ValueError("off-diagonal estimate needs i != j; use estimate_diag")
    if not (0 <= i < matrix.dim and 0 <= j < matrix.dim):
        raise ValueError(f"indices ({i}, {j}) out of range for dimension {matrix.dim}")
    if params.m != m:
        raise ValueError(f"params.m={params.m} does not match m={m}")
    sub = choose_params(m, params.epsilon / 2.0, params.fail_prob)
    b = matrix.norm_bound
    inv = 1.0 / math.sqrt(2.0)
    psi_plus = np.zeros(matrix.dim)
    psi_plus[i] = inv
    psi_plus[j] = inv
    psi_minus = np.zeros(matrix.dim)
    psi_minus[i] = inv
    psi_minus[j] = -inv
    base = seed if isinstance(seed, tuple) else (seed,)
    e_plus = _estimate_moment(matrix, b, psi_plus, sub, backend, base + (0,), workers)
    e_minus = _estimate_moment(matrix, b, psi_minus, sub, backend, base + (1,), workers)
    return (e_plus - e_minus) / 2.0


def perturbed_unitary(a_normalized: np.ndarray, delta: float, seed: int = 0) -> np.ndarray:
    """A unitary V at operator-norm distance exactly delta (minus one ulp of
    slack) from U = exp(iA), for exercising error-propagation bounds.

    V = U * exp(i * delta' * G) with G random symmetric of unit spectral
    norm; then ||V - U|| = ||exp(i delta' G) - I|| = 2 sin(delta'/2), and
    delta' is chosen so that value is delta*(1 - 1e-9).  The constructor
    verifies the distance by direct computation.
    """
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    decomp = eig_sym(a_normalized)
    v = decomp.eigenvectors
    u = (v * np.exp(1j * decomp.eigenvalues)) @ v.T
    if delta == 0.0:
        return u
    dim = u.shape[0]
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    g = gen.standard_normal((dim, dim))
    g = (g + g.T) / 2.0
    g /= float(np.max(np.abs(np.linalg.eigvalsh(g))))
    dprime = 2.0 * math.asin(delta * (1.0 - 1e-9) / 2.0)
    gd = eig_sym(g)
    expg = (gd.eigenvectors * np.exp(1j * dprime * gd.eigenvalues)) @ gd.eigenvectors.T
    vp = u @ expg
    dist = float(np.linalg.norm(vp - u, 2))
    if not 0.0 < dist <= delta:
        raise ValueError(f"perturbation construction failed: ||V-U|| = {dist}, target {delta}")
    return vp
