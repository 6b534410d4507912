"""Rewriting clock observables over Toffoli+Hadamard into integer matrices.

Every gate in {H, X, Z, CNOT, Toffoli} rewrites to Hadamards plus basis
permutations (Z = H X H), and a permutation fused with an adjacent H gives a
"uniform-scale" element: a real orthogonal matrix whose entries all lie in
{0, +-1/sqrt(2)}.  Unpaired permutations absorb an inserted H H = identity
pair, so the element count M always has the parity of the H count and every
element carries exactly one 1/sqrt(2).

A clock observable built from M such elements, rescaled by s = 2*sqrt(2)
(the 1/2 from (W + W^dagger)/2 and the 1/sqrt(2) from the element), has
every entry exactly in {-1, 0, 1}; entries are composed symbolically as
signed integers, never by rounding floats.  Of the decision thresholds, the
odd-M sign argument is unavailable (M is even here), so thresholds come from
the exact even-M cycle moments E0, E1:

    g = s^m (E0 + E1) / 2,   eps = (E0 - E1) / 12,   b = s,

which separates acceptance probability <= 1/3 from >= 2/3 by two eps*b^m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dee.circuits import (
    Circuit,
    Gate,
    GateKind,
    accept_probability,
    basis_index,
    build_mirror_circuit,
    fused,
    gate_unitary,
    h,
    is_permutation_gate,
    x,
    _bits,
    _perm_image,
)
from dee.sparse import DeeInstance, SparseSymmetricMatrix, _build_from_row_dicts
from dee.spectral import moment
from dee.hardness import cycle_phase_measure

OBSERVABLE_SCALE = 2.0 * math.sqrt(2.0)

LONE_H = "h"
PERM_THEN_H = "perm_then_h"
H_THEN_PERM = "h_then_perm"


@dataclass(frozen=True)
class UniformScaleGate:
    """One element: a single H on h_qubit, optionally composed with a permutation.

    kind "perm_then_h" means the permutation acts first (matrix H P);
    "h_then_perm" means the H acts first (matrix P H).  All entries of the
    element matrix lie in {0, +-1/sqrt(2)}.
    """

    kind: str
    h_qubit: int
    perm: Gate | None = None

    def __post_init__(self) -> None:
        if self.kind not in (LONE_H, PERM_THEN_H, H_THEN_PERM):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.h_qubit < 0:
            raise ValueError(f"negative qubit {self.h_qubit}")
        if self.kind == LONE_H:
            if self.perm is not None:
                raise ValueError("lone-H element carries no permutation")
        else:
            if self.perm is None or not is_permutation_gate(self.perm):
                raise ValueError(f"{self.kind} element needs a permutation gate")

    def as_fused_gate(self) -> Gate:
        if self.kind == LONE_H:
            return h(self.h_qubit)
        if self.kind == PERM_THEN_H:
            return fused(self.perm, h(self.h_qubit))
        return fused(h(self.h_qubit), self.perm)

    def max_qubit(self) -> int:
        top = self.h_qubit
        if self.perm is not None:
            top = max(top, max(self.perm.qubits))
        return top


def transpose_element(e: UniformScaleGate) -> UniformScaleGate:
    """Transpose: (H P)^T = P H and (P H)^T = H P since both factors are symmetric."""
    if e.kind == LONE_H:
        return e
    if e.kind == PERM_THEN_H:
        return UniformScaleGate(kind=H_THEN_PERM, h_qubit=e.h_qubit, perm=e.perm)
    return UniformScaleGate(kind=PERM_THEN_H, h_qubit=e.h_qubit, perm=e.perm)


def element_int_row(e: UniformScaleGate, u: int, n: int) -> list[tuple[int, int]]:
    """Row u of sqrt(2) * (element matrix): exactly two entries, each +-1.

    The sqrt(2) H has rows (1, 1) and (1, -1); composing with a permutation
    only relabels which columns (for H P) or which row of H (for P H) is
    read, so the values stay signed units.
    """
    if not 0 <= u < (1 << n):
        raise ValueError(f"row index {u} out of range for {n} qubits")
    q = e.h_qubit
    bit = 1 << q
    if e.kind == H_THEN_PERM:
        # (P H)[u, :] = H[perm(u), :]
        u = _perm_image(e.perm, u)
    base = u & ~bit
    top = base | bit
    sign = -1 if (u >> q) & 1 else 1
    if e.kind == PERM_THEN_H:
        # (H P)[u, v] = H[u, perm(v)]: the two columns are perm-preimages
        cols = [(_perm_image(e.perm, base), 1), (_perm_image(e.perm, top), sign)]
    else:
        cols = [(base, 1), (top, sign)]
    return sorted(cols)


def element_int_col(e: UniformScaleGate, u: int, n: int) -> list[tuple[int, int]]:
    """Column u of sqrt(2) * (element matrix), via the transposed element."""
    return element_int_row(transpose_element(e), u, n)


def element_matrix(e: UniformScaleGate, n: int) -> np.ndarray:
    """Dense element matrix on n qubits (oracle for the symbolic rows)."""
    return gate_unitary(e.as_fused_gate(), n)


def rewrite_to_th(circuit: Circuit) -> Circuit:
    """Replace Z by H X H; H and permutations pass through; rotations have
    no uniform-scale form and are rejected."""
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind is GateKind.Z:
            q = g.qubits[0]
            out.extend([h(q), x(q), h(q)])
        elif g.kind is GateKind.H or is_permutation_gate(g):
            out.append(g)
        else:
            raise ValueError(f"gate {g.kind.value} has no Toffoli+Hadamard rewrite")
    return Circuit(circuit.n_qubits, tuple(out))


def fuse_uniform_scale(circuit: Circuit) -> list[UniformScaleGate]:
    """Greedily pair each permutation with a neighboring H.

    A permutation with no free neighbor absorbs an inserted H(0) H(0) pair,
    becoming (perm then H) followed by a lone H, so the element product
    still equals the circuit and every element holds exactly one H.
    """
    gates = list(circuit.gates)
    for g in gates:
        if g.kind is not GateKind.H and not is_permutation_gate(g):
            raise ValueError(f"gate {g.kind.value} must be rewritten to H/permutation form first")
    out: list[UniformScaleGate] = []
    i = 0
    while i < len(gates):
        g = gates[i]
        nxt = gates[i + 1] if i + 1 < len(gates) else None
        if g.kind is GateKind.H:
            if nxt is not None and is_permutation_gate(nxt):
                out.append(UniformScaleGate(kind=H_THEN_PERM, h_qubit=g.qubits[0], perm=nxt))
                i += 2
            else:
                out.append(UniformScaleGate(kind=LONE_H, h_qubit=g.qubits[0]))
                i += 1
        else:
            if nxt is not None and nxt.kind is GateKind.H:
                out.append(UniformScaleGate(kind=PERM_THEN_H, h_qubit=nxt.qubits[0], perm=g))
                i += 2
            else:
                out.append(UniformScaleGate(kind=PERM_THEN_H, h_qubit=0, perm=g))
                out.append(UniformScaleGate(kind=LONE_H, h_qubit=0))
                i += 1
    return out


@dataclass(frozen=True)
class IntegerObservable:
    """Clock observable times 2*sqrt(2): every entry exactly in {-1, 0, 1}.

    The true observable is matrix / scale; powers transform covariantly,
    (matrix^m)_jj = scale^m * (A^m)_jj.
    """

    matrix: SparseSymmetricMatrix
    scale: float

    @property
    def norm_bound(self) -> float:
        return self.scale


def build_integer_observable(
    elements: list[UniformScaleGate], n_qubits: int | None = None
) -> IntegerObservable:
    """Assemble the scaled clock observable from uniform-scale elements.

    Needs M >= 3 so the two block neighbors of a row never collide.  Entries
    come straight from element_int_row/element_int_col, so they are signed
    units by construction.
    """
    m_count = len(elements)
    if m_count < 3:
        raise ValueError(f"need at least 3 elements to build the clock, got {m_count}")
    if n_qubits is None:
        n_qubits = max(e.max_qubit() for e in elements) + 1
    nd = 1 << n_qubits
    dim = m_count * nd
    row_dicts: list[dict[int, float]] = []
    for r in range(dim):
        l, u = divmod(r, nd)
        row: dict[int, float] = {}
        prev = (l - 1) % m_count
        for v, val in element_int_row(elements[prev], u, n_qubits):
            row[prev * nd + v] = float(val)
        nxt = (l + 1) % m_count
        for v, val in element_int_col(elements[l], u, n_qubits):
            row[nxt * nd + v] = float(val)
        row_dicts.append(row)
    matrix = _build_from_row_dicts(dim, row_dicts, norm_bound=OBSERVABLE_SCALE)
    return IntegerObservable(matrix=matrix, scale=OBSERVABLE_SCALE)


def even_m_thresholds(n_positions: int, m: int, scale: float = OBSERVABLE_SCALE) -> tuple[float, float]:
    """(g, eps) separating acceptance <= 1/3 from >= 2/3 at even clock length.

    The diagonal entry of the scaled observable is
    s^m ((1 - a) E0 + a E1) for acceptance probability a, linear in a, so
    the midpoint of its values at a = 1/3 and a = 2/3 is g and a quarter of
    their gap is eps * b^m.  Degenerate moments (gap <= 1e-12) and scales
    outside the float range are rejected.
    """
    if n_positions % 2 != 0 or n_positions < 4:
        raise ValueError(f"even clock length >= 4 required, got {n_positions}")
    if m < 1:
        raise ValueError(f"power must be >= 1, got {m}")
    if m * math.log2(scale) >= 1024:
        raise ValueError(
            f"scale^m = {scale}^{m} exceeds the float range; clock length must stay below 10"
        )
    s_m = scale**m
    e0 = moment(cycle_phase_measure(n_positions, twisted=False), m)
    e1 = moment(cycle_phase_measure(n_positions, twisted=True), m)
    if (e0 - e1) / 3.0 <= 1e-12:
        raise ValueError(f"moment gap E0-E1 = {e0 - e1} is degenerate at m={m}")
    g = s_m * (e0 + e1) / 2.0
    eps = (e0 - e1) / 12.0
    value_13 = s_m * ((2.0 / 3.0) * e0 + (1.0 / 3.0) * e1)
    value_23 = s_m * ((1.0 / 3.0) * e0 + (2.0 / 3.0) * e1)
    if not (value_13 >= g + eps * s_m and value_23 <= g - eps * s_m):
        raise ValueError("threshold construction failed to separate 1/3 from 2/3")
    return g, eps


@dataclass(frozen=True)
class IntegerReduction:
    """reduce_integer output: integer observable plus the decision instance."""

    observable: IntegerObservable
    dee: DeeInstance
    elements: tuple[UniformScaleGate, ...]
    j_state: int
    alpha1_sq: float
    n_positions: int


def reduce_integer(y: Circuit, xs: str | list[int] | tuple[int, ...]) -> IntegerReduction:
    """Full pipeline: mirror, rewrite to H/permutations, fuse, build, threshold.

    The circuit y must use only H, X, Z, CNOT, Toffoli.  The exact diagonal
    entry of the emitted matrix at j is s^m ((1-a) E0 + a E1) with
    a = p_accept(x), decided against the even-length thresholds.
    """
    bits = _bits(xs)
    if len(bits) > y.n_qubits:
        raise ValueError(f"{len(bits)} input bits exceed {y.n_qubits} circuit qubits")
    mirror = build_mirror_circuit(y)
    rewritten = rewrite_to_th(mirror)
    elements = fuse_uniform_scale(rewritten)
    m_count = len(elements)
    power = m_count**3
    g, eps = even_m_thresholds(m_count, power)
    observable = build_integer_observable(elements, n_qubits=y.n_qubits)
    j_state = basis_index(bits)
    alpha1_sq = accept_probability(y, bits, y.n_qubits - len(bits))
    dee = DeeInstance(
        matrix=observable.matrix,
        j=j_state,
        m=power,
        g=g,
        epsilon=eps,
        b=OBSERVABLE_SCALE,
    )
    return IntegerReduction(
        observable=observable,
        dee=dee,
        elements=tuple(elements),
        j_state=j_state,
        alpha1_sq=alpha1_sq,
        n_positions=m_count,
    )


def predicted_integer_diag(n_positions: int, alpha1_sq: float, m: int, scale: float = OBSERVABLE_SCALE) -> float:
    """Exact target value s^m ((1-a) E0 + a E1) for the emitted matrix."""
    e0 = moment(cycle_phase_measure(n_positions, twisted=False), m)
    e1 = moment(cycle_phase_measure(n_positions, twisted=True), m)
    return scale**m * ((1.0 - alpha1_sq) * e0 + alpha1_sq * e1)
