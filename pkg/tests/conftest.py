"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest

from dee.circuits import Circuit, rot, x
from dee.sparse import from_coordinate_list


def random_sparse_matrix(rng, n, max_row_nnz=8):
    """Random sparse symmetric matrix with a hard cap on row occupancy.

    Entries are uniform in [-1, 1].  Roughly half the diagonal is filled,
    then off-diagonal pairs are inserted while both endpoint rows have
    room.  The result is never the zero matrix.
    """
    counts = [0] * n
    entries = []
    seen = set()
    for i in range(n):
        if counts[i] < max_row_nnz and rng.random() < 0.5:
            entries.append((i, i, float(rng.uniform(-1.0, 1.0))))
            counts[i] += 1
            seen.add((i, i))
    for _ in range(3 * n):
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i == j:
            continue
        key = (min(i, j), max(i, j))
        if key in seen or counts[i] >= max_row_nnz or counts[j] >= max_row_nnz:
            continue
        entries.append((key[0], key[1], float(rng.uniform(-1.0, 1.0))))
        counts[i] += 1
        counts[j] += 1
        seen.add(key)
    if not entries:
        entries.append((0, 0, 1.0))
    return from_coordinate_list(n, entries)


def scale_matrix(a, factor):
    """Return a copy of `a` with every entry multiplied by `factor`."""
    entries = []
    for i, row in enumerate(a.rows):
        for j, value in row:
            if i <= j:
                entries.append((i, j, value * factor))
    return from_coordinate_list(a.dim, entries, norm_bound=a.norm_bound * abs(factor))


def dense_power_diag(a, j, m):
    """Oracle: diagonal entry of the m-th power via dense linear algebra."""
    return float(np.linalg.matrix_power(a.to_dense(), m)[j, j])


def rotation_circuit(alpha_sq, n_gates):
    """Circuit of `n_gates` gates whose acceptance probability is alpha_sq.

    A single rotation on qubit 0 sets the acceptance amplitude; the rest
    are X gates on qubit 1, which leave qubit 0 untouched.
    """
    angle = math.asin(math.sqrt(alpha_sq))
    gates = [rot(0, angle)]
    gates.extend(x(1) for _ in range(n_gates - 1))
    return Circuit(n_qubits=2, gates=tuple(gates))


def total_variation(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
