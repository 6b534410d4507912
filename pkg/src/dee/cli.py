"""Command-line interface: estimate, exact, reduce, verify-bounds, paths.

Reports are deterministic byte-for-byte for a fixed seed and command line,
regardless of worker count: every float is printed with repr, no timestamps
or host details appear, and wall time goes to stderr only.  Output files are
written only after the whole computation succeeds, so failures leave no
partial files.  Exit codes: 0 success, 1 validation or file errors, 2 a
verification check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time

import numpy as np

from dee.sparse import (
    DeeInstance,
    adjacency_from_edges,
    decide,
    format_matrix,
    power_diag_exact,
    power_entry_exact,
    read_graph_file,
    read_matrix_file,
)
from dee.qpe import (
    analytic_backend,
    choose_params,
    estimate_from_outcomes,
    estimate_offdiag,
    outcomes_to_z,
    sample_measurements,
    statevector_backend,
)
from dee import hardness, gateset
from dee.circuits import read_circuit_file
from dee.verify import run_bound_checks

EXACT_ORACLE_MAX_DIM = 128


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(pairs: list[tuple[str, object]], report_path: str | None) -> None:
    text = "\n".join(f"{k}: {_fmt(v)}" for k, v in pairs) + "\n"
    sys.stdout.write(text)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _instance_digest(matrix_text: str, *fields) -> str:
    blob = matrix_text + "|" + "|".join(_fmt(f) for f in fields)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _backend_from_args(args) -> object:
    if args.backend == "statevector":
        return statevector_backend(max_qubits=args.max_qubits)
    return analytic_backend()


def cmd_estimate(args) -> int:
    t0 = time.perf_counter()
    matrix = read_matrix_file(args.matrix, norm_bound=args.b)
    b = matrix.norm_bound
    params = choose_params(args.m, args.epsilon, args.fail_prob)
    backend = _backend_from_args(args)
    pairs: list[tuple[str, object]] = [
        ("command", "estimate"),
        ("matrix", args.matrix),
        ("n", matrix.dim),
        ("j", args.j),
    ]
    files: list[tuple[str, str]] = []
    if args.i is not None:
        if args.samples_csv:
            raise ValueError("--samples-csv applies to diagonal runs only")
        estimate = estimate_offdiag(
            matrix, args.i, args.j, args.m, params, backend, seed=args.seed, workers=args.workers
        )
        pairs.append(("i", args.i))
        exact = (
            power_entry_exact(matrix, args.i, args.j, args.m)
            if matrix.dim <= EXACT_ORACLE_MAX_DIM
            else None
        )
        decision = None
    else:
        instance = DeeInstance(
            matrix=matrix, j=args.j, m=args.m, g=args.g, epsilon=args.epsilon, b=b
        )
        outcomes = sample_measurements(
            matrix,
            b,
            _basis_vector(matrix.dim, args.j),
            params,
            backend,
            seed=args.seed,
            workers=args.workers,
        )
        estimate = estimate_from_outcomes(outcomes, params, b)
        decision = decide(estimate, instance.g)
        if args.samples_csv:
            z = outcomes_to_z(outcomes, params.p)
            zm = z**params.m
            rows = ["a,z,zm"]
            rows.extend(
                f"{int(a)},{float(zv)!r},{float(zmv)!r}" for a, zv, zmv in zip(outcomes, z, zm)
            )
            files.append((args.samples_csv, "\n".join(rows) + "\n"))
        exact = (
            power_diag_exact(matrix, args.j, args.m)
            if matrix.dim <= EXACT_ORACLE_MAX_DIM
            else None
        )
    matrix_text = format_matrix(matrix)
    pairs.extend(
        [
            ("m", args.m),
            ("g", args.g),
            ("epsilon", args.epsilon),
            ("b", b),
            ("instance_hash", _instance_digest(matrix_text, args.i, args.j, args.m, args.g, args.epsilon, b)),
            ("backend", args.backend),
            ("seed", args.seed),
            ("p", params.p),
            ("eta", params.eta),
            ("theta", params.theta),
            ("k", params.k),
            ("delta", params.delta),
            ("estimate", estimate),
        ]
    )
    if decision is not None:
        pairs.append(("decision", decision.side.value))
    if exact is not None:
        tol = args.epsilon * b**args.m
        pairs.append(("exact", exact))
        pairs.append(("within_tolerance", abs(estimate - exact) <= tol))
        if decision is not None:
            pairs.append(("promise_holds", abs(exact - args.g) >= tol))
    _emit(pairs, args.report)
    for path, text in files:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(f"wall_time_s: {time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0


def _basis_vector(dim: int, j: int) -> np.ndarray:
    v = np.zeros(dim)
    v[j] = 1.0
    return v


def cmd_exact(args) -> int:
    matrix = read_matrix_file(args.matrix)
    if args.i is not None:
        value = power_entry_exact(matrix, args.i, args.j, args.m)
    else:
        value = power_diag_exact(matrix, args.j, args.m)
    pairs = [
        ("command", "exact"),
        ("matrix", args.matrix),
        ("n", matrix.dim),
        ("j", args.j),
    ]
    if args.i is not None:
        pairs.append(("i", args.i))
    pairs.extend([("m", args.m), ("value", value)])
    _emit(pairs, args.report)
    return 0


def cmd_reduce(args) -> int:
    t0 = time.perf_counter()
    circuit = read_circuit_file(args.circuit)
    bits = args.input
    if args.integer:
        red = gateset.reduce_integer(circuit, bits)
        matrix = red.observable.matrix
        dee = red.dee
        alpha = red.alpha1_sq
        n_pos = red.n_positions
        matrix_text = format_matrix(matrix, integer_values=True)
        e0 = gateset.predicted_integer_diag(n_pos, 0.0, dee.m) / dee.b**dee.m
        e1 = gateset.predicted_integer_diag(n_pos, 1.0, dee.m) / dee.b**dee.m
        predicted = gateset.predicted_integer_diag(n_pos, alpha, dee.m)
    else:
        red = hardness.reduce(circuit, bits)
        matrix = red.dee.matrix
        dee = red.dee
        alpha = red.alpha1_sq
        n_pos = red.n_positions
        matrix_text = format_matrix(matrix)
        e0, e1 = hardness.moment_separation(n_pos, dee.m)
        predicted = hardness.predicted_diag(n_pos, alpha, dee.m)
    exact = power_diag_exact(matrix, dee.j, dee.m)
    tol = dee.epsilon * dee.b**dee.m
    verdict = "accept" if exact < dee.g else "reject"
    pairs = [
        ("command", "reduce"),
        ("circuit", args.circuit),
        ("input", bits),
        ("integer", bool(args.integer)),
        ("n_positions", n_pos),
        ("n", matrix.dim),
        ("j", dee.j),
        ("m", dee.m),
        ("g", dee.g),
        ("epsilon", dee.epsilon),
        ("b", dee.b),
        ("alpha1_sq", alpha),
        ("e0", e0),
        ("e1", e1),
        ("exact_diag", exact),
        ("predicted_diag", predicted),
        ("threshold_above", dee.g + tol),
        ("threshold_below", dee.g - tol),
        ("verdict", verdict),
        ("promise_holds", abs(exact - dee.g) >= tol),
        ("matrix_file", args.out_matrix),
    ]
    if not args.integer:
        pairs.insert(13, ("e0_exceeds_floor", e0 > hardness.separation_floor(n_pos)))
    meta_text = "\n".join(f"{k}: {_fmt(v)}" for k, v in pairs) + "\n"
    # all computation done; now write both outputs
    with open(args.out_matrix, "w", encoding="utf-8") as fh:
        fh.write(matrix_text)
    with open(args.out_meta, "w", encoding="utf-8") as fh:
        fh.write(meta_text)
    sys.stdout.write(meta_text)
    print(f"wall_time_s: {time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0


def cmd_verify_bounds(args) -> int:
    t0 = time.perf_counter()
    checks = run_bound_checks(n_matrices=args.matrices, trials=args.trials, seed=args.seed)
    all_passed = True
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        sys.stdout.write(f"{c.name}: bound={c.bound!r} measured={c.measured!r} {status}\n")
        all_passed = all_passed and c.passed
    sys.stdout.write(f"verify-bounds: {'PASS' if all_passed else 'FAIL'}\n")
    print(f"wall_time_s: {time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0 if all_passed else 2


def cmd_paths(args) -> int:
    t0 = time.perf_counter()
    n, edges = read_graph_file(args.graph)
    matrix = adjacency_from_edges(n, edges)
    b = matrix.norm_bound
    exact = power_diag_exact(matrix, args.j, args.m)
    params = choose_params(args.m, args.epsilon, args.fail_prob)
    outcomes = sample_measurements(
        matrix,
        b,
        _basis_vector(matrix.dim, args.j),
        params,
        analytic_backend(),
        seed=args.seed,
        workers=args.workers,
    )
    estimate = estimate_from_outcomes(outcomes, params, b)
    tol = args.epsilon * b**args.m
    pairs = [
        ("command", "paths"),
        ("graph", args.graph),
        ("n", n),
        ("j", args.j),
        ("m", args.m),
        ("b", b),
        ("closed_walks", int(round(exact))),
        ("exact", exact),
        ("epsilon", args.epsilon),
        ("seed", args.seed),
        ("estimate", estimate),
        ("tolerance", tol),
        ("within_tolerance", abs(estimate - exact) <= tol),
    ]
    _emit(pairs, args.report)
    print(f"wall_time_s: {time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dee",
        description="Estimate diagonal entries of sparse symmetric matrix powers "
        "via simulated phase-estimation measurements, and reduce circuits to "
        "such instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run the measurement estimator on a matrix file")
    est.add_argument("--matrix", required=True, help="matrix file (N NNZ header, 'i j value' lines)")
    est.add_argument("--j", type=int, required=True, help="diagonal index, or column for --i")
    est.add_argument("--i", type=int, default=None, help="row index for an off-diagonal entry")
    est.add_argument("--m", type=int, required=True, help="matrix power")
    est.add_argument("--epsilon", type=float, required=True, help="accuracy, units of b^m")
    est.add_argument("--g", type=float, default=0.0, help="decision threshold (default 0)")
    est.add_argument("--b", type=float, default=None, help="norm bound (default Gershgorin)")
    est.add_argument("--fail-prob", type=float, default=0.05, help="failure probability budget")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--backend", choices=["analytic", "statevector"], default="analytic")
    est.add_argument("--max-qubits", type=int, default=22, help="statevector qubit cap")
    est.add_argument("--workers", type=int, default=1, help="sampling threads (output-invariant)")
    est.add_argument("--report", default=None, help="also write the report to this file")
    est.add_argument("--samples-csv", default=None, help="write per-shot a,z,zm rows")
    est.set_defaults(func=cmd_estimate)

    exa = sub.add_parser("exact", help="exact (A^m)_jj or (A^m)_ij by sparse matvecs")
    exa.add_argument("--matrix", required=True)
    exa.add_argument("--j", type=int, required=True)
    exa.add_argument("--i", type=int, default=None)
    exa.add_argument("--m", type=int, required=True)
    exa.add_argument("--report", default=None)
    exa.set_defaults(func=cmd_exact)

    red = sub.add_parser("reduce", help="reduce a circuit + input to a decision instance")
    red.add_argument("--circuit", required=True, help="circuit file (QUBITS n header)")
    red.add_argument("--input", required=True, help="input bit string, e.g. 0110")
    red.add_argument("--out-matrix", required=True, help="where to write the observable")
    red.add_argument("--out-meta", required=True, help="where to write instance metadata")
    red.add_argument(
        "--integer",
        action="store_true",
        help="emit the {-1,0,1} matrix at scale 2*sqrt(2) (Toffoli+Hadamard circuits)",
    )
    red.set_defaults(func=cmd_reduce)

    ver = sub.add_parser("verify-bounds", help="check the error-analysis bounds numerically")
    ver.add_argument("--matrices", type=int, default=20, help="random matrices per check")
    ver.add_argument("--trials", type=int, default=50, help="sampling trials")
    ver.add_argument("--seed", type=int, default=20260819)
    ver.set_defaults(func=cmd_verify_bounds)

    pat = sub.add_parser("paths", help="closed-walk counts of a graph, exact and estimated")
    pat.add_argument("--graph", required=True, help="graph file (N M header, 'u v' lines)")
    pat.add_argument("--j", type=int, required=True, help="start vertex")
    pat.add_argument("--m", type=int, required=True, help="walk length")
    pat.add_argument("--epsilon", type=float, default=0.25)
    pat.add_argument("--fail-prob", type=float, default=0.05)
    pat.add_argument("--seed", type=int, default=0)
    pat.add_argument("--workers", type=int, default=1)
    pat.add_argument("--report", default=None)
    pat.set_defaults(func=cmd_paths)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
