"""Sparse real symmetric matrices with row-list access and exact power oracles.

Matrices are stored row-complete: every row holds all of its nonzeros, so the
symmetric pair (i, j) / (j, i) appears once in each of the two rows.  Powers
are never formed; (A^m)_jj is m sparse matvecs from e_j followed by reading
one coordinate, which is the oracle the estimator and the reductions are
checked against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

Entry = tuple[int, float]


class Side(enum.Enum):
    """Which side of the threshold g a decision lands on."""

    ABOVE_G = "AboveG"
    BELOW_G = "BelowG"


@dataclass(frozen=True)
class SparseSymmetricMatrix:
    """Real symmetric N x N matrix, row-complete sparse storage.

    Attributes
    ----------
    dim : int
        N, at least 1.
    rows : tuple of per-row tuples of (column, value)
        Row i lists all nonzeros of row i, sorted by column.  Symmetry is
        enforced at construction: rows[i] contains (j, v) iff rows[j]
        contains (i, v) with the identical float.
    max_row_nnz : int
        The sparsity parameter s = max_i len(rows[i]).
    norm_bound : float
        A known b > 0 with b >= ||A||_2 (spectral norm).
    """

    dim: int
    rows: tuple[tuple[Entry, ...], ...]
    max_row_nnz: int
    norm_bound: float

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"matrix dimension must be >= 1, got {self.dim}")
        if len(self.rows) != self.dim:
            raise ValueError("row count does not match dim")
        if not (math.isfinite(self.norm_bound) and self.norm_bound > 0):
            raise ValueError(f"norm bound must be finite and positive, got {self.norm_bound}")
        if self.max_row_nnz != max((len(r) for r in self.rows), default=0):
            raise ValueError("max_row_nnz inconsistent with rows")

    # Padded column/value arrays so a matvec is a handful of vectorized ops.
    @cached_property
    def _cols_padded(self) -> np.ndarray:
        cols = np.zeros((self.dim, self.max_row_nnz), dtype=np.int64)
        for i, row in enumerate(self.rows):
            for t, (j, _) in enumerate(row):
                cols[i, t] = j
        return cols

    @cached_property
    def _vals_padded(self) -> np.ndarray:
        vals = np.zeros((self.dim, self.max_row_nnz), dtype=np.float64)
        for i, row in enumerate(self.rows):
            for t, (_, v) in enumerate(row):
                vals[i, t] = v
        return vals

    def row(self, i: int) -> tuple[Entry, ...]:
        return self.rows[i]

    def entry(self, i: int, j: int) -> float:
        for col, val in self.rows[i]:
            if col == j:
                return val
        return 0.0

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.dim, self.dim))
        for i, row in enumerate(self.rows):
            for j, v in row:
                a[i, j] = v
        return a

    @property
    def nnz(self) -> int:
        """Number of stored entries counting only i <= j."""
        return sum(1 for i, row in enumerate(self.rows) for j, _ in row if i <= j)


def _build_from_row_dicts(
    dim: int, row_dicts: list[dict[int, float]], norm_bound: float | None
) -> SparseSymmetricMatrix:
    rows = tuple(tuple(sorted(d.items())) for d in row_dicts)
    # exact symmetry check; construction paths should already guarantee it
    for i, row in enumerate(rows):
        for j, v in row:
            if v != row_dicts[j].get(i):
                raise ValueError(f"asymmetric entry pair at ({i}, {j})")
    max_nnz = max((len(r) for r in rows), default=0)
    if norm_bound is None:
        norm_bound = _gershgorin_of_rows(rows)
        if norm_bound == 0.0:
            norm_bound = 1.0  # zero matrix: any positive bound works
    return SparseSymmetricMatrix(dim=dim, rows=rows, max_row_nnz=max_nnz, norm_bound=norm_bound)


def from_coordinate_list(
    n: int,
    entries: list[tuple[int, int, float]],
    norm_bound: float | None = None,
) -> SparseSymmetricMatrix:
    """Build a symmetric matrix from (i, j, value) triples.

    Each unordered pair {i, j} may appear at most once; the mirrored entry is
    filled in automatically.  Zero values are dropped.  With norm_bound=None
    the Gershgorin row-sum bound is used (1.0 for the zero matrix).
    """
    if n < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {n}")
    row_dicts: list[dict[int, float]] = [{} for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    for i, j, val in entries:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"entry ({i}, {j}) out of range for dimension {n}")
        if not math.isfinite(val):
            raise ValueError(f"entry ({i}, {j}) has non-finite value {val}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate entry for pair ({i}, {j})")
        seen.add(key)
        if val == 0.0:
            continue
        row_dicts[i][j] = val
        if i != j:
            row_dicts[j][i] = val
    return _build_from_row_dicts(n, row_dicts, norm_bound)


def adjacency_from_edges(n: int, edges: list[tuple[int, int]]) -> SparseSymmetricMatrix:
    """Adjacency matrix of a simple undirected graph; norm bound = max degree."""
    row_dicts: list[dict[int, float]] = [{} for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if v in row_dicts[u]:
            raise ValueError(f"duplicate edge ({u}, {v})")
        row_dicts[u][v] = 1.0
        row_dicts[v][u] = 1.0
    max_degree = max((len(d) for d in row_dicts), default=0)
    bound = float(max_degree) if max_degree > 0 else 1.0
    return _build_from_row_dicts(n, row_dicts, bound)


def _gershgorin_of_rows(rows: tuple[tuple[Entry, ...], ...]) -> float:
    best = 0.0
    for row in rows:
        s = math.fsum(abs(v) for _, v in row)
        if s > best:
            best = s
    return best


def gershgorin_bound(a: SparseSymmetricMatrix) -> float:
    """max_i sum_j |A_ij|, an upper bound on the spectral norm."""
    return _gershgorin_of_rows(a.rows)


def matvec(a: SparseSymmetricMatrix, v: np.ndarray) -> np.ndarray:
    """A @ v with per-row compensated summation.

    Row order is canonical (sorted by column), and Kahan compensation makes
    each row sum insensitive to how entries were supplied, so oracle values
    are bit-reproducible.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (a.dim,):
        raise ValueError(f"vector shape {v.shape} does not match dimension {a.dim}")
    if a.max_row_nnz == 0:
        return np.zeros(a.dim)
    terms = a._vals_padded * v[a._cols_padded]
    total = np.zeros(a.dim)
    comp = np.zeros(a.dim)
    for t in range(terms.shape[1]):  # Kahan across the <= s slots of every row at once
        y = terms[:, t] - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
    return total


def power_diag_exact(a: SparseSymmetricMatrix, j: int, m: int) -> float:
    """(A^m)_jj by m sparse matvecs from e_j; cost O(m * N * s)."""
    if not 0 <= j < a.dim:
        raise ValueError(f"index {j} out of range for dimension {a.dim}")
    if m < 0:
        raise ValueError(f"power must be >= 0, got {m}")
    v = np.zeros(a.dim)
    v[j] = 1.0
    for _ in range(m):
        v = matvec(a, v)
    return float(v[j])


def power_entry_exact(a: SparseSymmetricMatrix, i: int, j: int, m: int) -> float:
    """(A^m)_ij by m sparse matvecs from e_j."""
    if not 0 <= i < a.dim:
        raise ValueError(f"index {i} out of range for dimension {a.dim}")
    if not 0 <= j < a.dim:
        raise ValueError(f"index {j} out of range for dimension {a.dim}")
    if m < 0:
        raise ValueError(f"power must be >= 0, got {m}")
    v = np.zeros(a.dim)
    v[j] = 1.0
    for _ in range(m):
        v = matvec(a, v)
    return float(v[i])


@dataclass(frozen=True)
class DeeInstance:
    """One diagonal-entry-estimation problem: decide (A^m)_jj against g.

    The promise is |(A^m)_jj - g| >= epsilon * b^m; an estimate within
    epsilon * b^m of the true value then lands on the correct side.
    """

    matrix: SparseSymmetricMatrix
    j: int
    m: int
    g: float
    epsilon: float
    b: float

    def __post_init__(self) -> None:
        if not 0 <= self.j < self.matrix.dim:
            raise ValueError(f"index {self.j} out of range for dimension {self.matrix.dim}")
        if self.m < 1:
            raise ValueError(f"power m must be >= 1, got {self.m}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"norm bound b must be finite and positive, got {self.b}")
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        try:
            scale = self.b**self.m
        except OverflowError:
            scale = math.inf
        if not math.isfinite(scale):
            raise ValueError(f"b^m = {self.b}^{self.m} overflows the float range")
        if not math.isfinite(self.g) or abs(self.g) > scale:
            raise ValueError(f"threshold g={self.g} outside [-b^m, b^m] = [{-scale}, {scale}]")


@dataclass(frozen=True)
class DeeDecision:
    """Estimator output: the estimate and the side of g it falls on."""

    side: Side
    estimate: float


def decide(estimate: float, g: float) -> DeeDecision:
    """Package an estimate as a decision; side is AboveG iff estimate > g."""
    side = Side.ABOVE_G if estimate > g else Side.BELOW_G
    return DeeDecision(side=side, estimate=estimate)


# ---------------------------------------------------------------------------
# file formats
#
# matrix file: first data line "N NNZ", then NNZ lines "i j value" with
# 0 <= i <= j < N.  graph file: first data line "N M", then M lines "u v".
# '#' starts a comment; blank lines are ignored.
# ---------------------------------------------------------------------------


def _data_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def parse_matrix(text: str, norm_bound: float | None = None) -> SparseSymmetricMatrix:
    lines = _data_lines(text)
    if not lines:
        raise ValueError("matrix text has no data lines")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise ValueError(f"line {lineno}: expected header 'N NNZ', got {header!r}")
    try:
        n, nnz = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ValueError(f"line {lineno}: bad header {header!r}") from exc
    body = lines[1:]
    if len(body) != nnz:
        raise ValueError(f"header promises {nnz} entries but {len(body)} data lines follow")
    entries = []
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'i j value', got {line!r}")
        try:
            i, j, val = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad entry {line!r}") from exc
        if i > j:
            raise ValueError(f"line {lineno}: entries must have i <= j, got ({i}, {j})")
        entries.append((i, j, val))
    return from_coordinate_list(n, entries, norm_bound=norm_bound)


def format_matrix(a: SparseSymmetricMatrix, integer_values: bool = False) -> str:
    entries = [(i, j, v) for i, row in enumerate(a.rows) for j, v in row if i <= j]
    lines = [f"{a.dim} {len(entries)}"]
    for i, j, v in entries:
        if integer_values:
            iv = round(v)
            if iv != v:
                raise ValueError(f"entry ({i}, {j}) = {v} is not an integer")
            lines.append(f"{i} {j} {iv}")
        else:
            lines.append(f"{i} {j} {v!r}")
    return "\n".join(lines) + "\n"


def read_matrix_file(path: str, norm_bound: float | None = None) -> SparseSymmetricMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), norm_bound=norm_bound)


def write_matrix_file(path: str, a: SparseSymmetricMatrix, integer_values: bool = False) -> None:
    text = format_matrix(a, integer_values=integer_values)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def parse_graph(text: str) -> tuple[int, list[tuple[int, int]]]:
    lines = _data_lines(text)
    if not lines:
        raise ValueError("graph text has no data lines")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise ValueError(f"line {lineno}: expected header 'N M', got {header!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ValueError(f"line {lineno}: bad header {header!r}") from exc
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"header promises {m} edges but {len(body)} data lines follow")
    edges = []
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad edge {line!r}") from exc
    return n, edges


def read_graph_file(path: str) -> tuple[int, list[tuple[int, int]]]:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())
