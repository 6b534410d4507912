"""Diagonal entry estimation for powers of sparse symmetric matrices.

The package has two halves that meet in the middle:

* an estimator that measures an observable A through simulated phase
  estimation on exp(iA) and averages mapped outcomes z^m to approximate
  (A^m)_jj to accuracy eps * b^m, and
* a reduction that turns a reversible circuit plus an input string into a
  sparse observable whose m-th power diagonal entry encodes the circuit's
  acceptance probability, including a variant whose matrix entries are
  exactly {-1, 0, 1} at a fixed global scale.

Exact dense and sparse linear-algebra oracles back every approximate claim.
"""

from dee.sparse import (
    DeeDecision,
    DeeInstance,
    Side,
    SparseSymmetricMatrix,
    adjacency_from_edges,
    from_coordinate_list,
    gershgorin_bound,
    matvec,
    power_diag_exact,
    power_entry_exact,
)
from dee.spectral import EigenDecomposition, SpectralMeasure, eig_sym, induced_measure, moment
from dee.qpe import QpeParams, choose_params, estimate_diag, estimate_offdiag, outcome_to_z

__all__ = [
    "DeeDecision",
    "DeeInstance",
    "EigenDecomposition",
    "QpeParams",
    "Side",
    "SparseSymmetricMatrix",
    "SpectralMeasure",
    "adjacency_from_edges",
    "choose_params",
    "eig_sym",
    "estimate_diag",
    "estimate_offdiag",
    "from_coordinate_list",
    "gershgorin_bound",
    "induced_measure",
    "matvec",
    "moment",
    "outcome_to_z",
    "power_diag_exact",
    "power_entry_exact",
]
