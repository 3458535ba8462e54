"""Command-line front end: JSON scenarios in, deterministic JSON reports out.

Exit codes: 0 success / identity verified, 1 identity violated, 2 malformed
input, 3 numerical failure.  Reports serialize with sorted keys so equal
scenarios produce byte-identical output (timings are only attached with
--timings, which golden tests leave off).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import InputError, NumericalFailure
from .flow import (
    OperatorPath,
    eigenvalue_trace,
    sf_endpoints,
    sf_partition,
    sf_varying,
    verify_reduction,
    verify_reduction_varying,
)
from .geodesics import (
    CoefficientSpec,
    GalerkinSpace,
    GeodesicFrameData,
    example_frame,
    operator_path_for_frame,
    verify_periodic_formula,
)
from .instances import (
    random_reduction_instance,
    random_subspace,
    random_varying_instance,
)
from .linalg import DEFAULT_TOL, Tolerance
from .subspaces import (
    Subspace,
    SubspacePath,
    fredholm_pair_index,
    gap_distance,
    kato_gamma,
    orthocomplement,
    projection_restriction_index,
    relative_dimension,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

CONVENTIONS = {
    "spectral_flow": "n_minus(start) - n_minus(end); endpoint eigenvalues "
                     "inside the zero band count as kernel",
    "kato_gamma_empty_infimum": 1.0,
    "maslov": "-n_minus(G) + interior crossing signatures + positive part "
              "of the endpoint crossing form",
}

PATH_EXAMPLES = {
    "linear_cross": {
        "description": "diag(2t-1, 1): one eigenvalue crosses upward, sf = 1",
        "scenario": {"kind": "path", "family": {
            "name": "linear", "A0": [[-1.0, 0.0], [0.0, 1.0]],
            "A1": [[1.0, 0.0], [0.0, 1.0]]}},
        "expect": {"sf": 1},
    },
    "quadratic_touch": {
        "description": "[t^2] on [-1, 1]: eigenvalue touches zero, sf = 0",
        "scenario": {"kind": "path", "samples": [
            {"t": -1.0, "A": [[1.0]]}, {"t": 0.0, "A": [[0.0]]},
            {"t": 1.0, "A": [[1.0]]}]},
        "expect": {"sf": 0},
    },
}

VARY_EXAMPLES = {
    "rotating_line": {
        "description": "identity form restricted to a rotating line, sf = 0",
        "expect": {"sf": 0},
    },
}

GEODESIC_EXAMPLES = {
    "flat_torus": "all invariants 0 except the periodic nullity n_per = n",
    "sphere_equator": "sf = -1, i_maslov = 2, nullities (3, 1, 1), residuals 0",
    "lorentz_product": "sf = -1, i_maslov = 1, n_minus_g = 1, residuals 0",
}


def _fail_input(message: str) -> int:
    print(f"sfkit: input error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _fail_numerical(message: str) -> int:
    print(f"sfkit: numerical failure: {message}", file=sys.stderr)
    return EXIT_NUMERICAL


def _require(cond, message):
    if not cond:
        raise InputError(message)


def _matrix(doc, name):
    _require(isinstance(doc, list) and doc and all(isinstance(r, list) for r in doc),
             f"{name} must be a non-empty list of rows")
    try:
        return np.asarray(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not numeric: {exc}") from exc


def _load_scenario(args, kind):
    if getattr(args, "input", None):
        try:
            with open(args.input, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.input} is not valid JSON: {exc}") from exc
        _require(isinstance(doc, dict), "scenario must be a JSON object")
        _require(doc.get("kind", kind) == kind,
                 f"scenario kind {doc.get('kind')!r} does not match "
                 f"subcommand {kind!r}")
        if doc.get("random"):
            _require("seed" in doc, "random scenarios must carry a seed")
        return doc
    return None


def _path_from_doc(doc) -> OperatorPath:
    gram = None
    if doc.get("gram") is not None:
        gram = _matrix(doc["gram"], "gram")
    if "samples" in doc:
        samples = doc["samples"]
        _require(isinstance(samples, list) and len(samples) >= 2,
                 "path needs a list of at least two samples")
        ts, mats = [], []
        for i, s in enumerate(samples):
            _require(isinstance(s, dict) and "t" in s and "A" in s,
                     f"sample {i} must be an object with fields 't' and 'A'")
            ts.append(float(s["t"]))
            mats.append(_matrix(s["A"], f"samples[{i}].A"))
        return OperatorPath.from_samples(ts, mats, gram)
    if "family" in doc:
        fam = doc["family"]
        _require(isinstance(fam, dict) and fam.get("name") == "linear",
                 "family must be an object with name 'linear'")
        _require("A0" in fam and "A1" in fam, "linear family needs A0 and A1")
        domain = doc.get("domain", [0.0, 1.0])
        return OperatorPath.linear(_matrix(fam["A0"], "A0"),
                                   _matrix(fam["A1"], "A1"),
                                   (float(domain[0]), float(domain[1])), gram)
    raise InputError("path scenario needs 'samples' or 'family'")


def _subspace_from_doc(doc, n, name) -> Subspace:
    cols = _matrix(doc, name)
    _require(cols.shape[0] == n,
             f"{name} must have {n} rows to match the path dimension")
    return Subspace.from_spanning(cols, n)


def _report(args, kind, scenario_echo, results, warnings=(), started=None):
    doc = {
        "tool": "sfkit",
        "version": __version__,
        "kind": kind,
        "tolerance": {"rel_zero": args.tol.rel_zero,
                      "abs_zero": args.tol.abs_zero},
        "conventions": CONVENTIONS,
        "scenario": scenario_echo,
        "results": results,
        "warnings": list(warnings),
        "timings": {"seconds": round(time.monotonic() - started, 3)}
        if (args.timings and started is not None) else None,
    }
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_trace(path_obj, trace_file, num=33):
    rows = eigenvalue_trace(path_obj, num=num)
    with open(trace_file, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"lambda_{i + 1}" for i in
                                 range(len(rows[0][1]))])
        for t, w in rows:
            writer.writerow([f"{t:.12g}"] + [f"{x:.17g}" for x in w])


def _run_path(args) -> int:
    started = time.monotonic()
    doc = _load_scenario(args, "path")
    if doc is None:
        _require(args.example in PATH_EXAMPLES,
                 f"unknown path example {args.example!r}; "
                 f"choose from {sorted(PATH_EXAMPLES)}")
        doc = PATH_EXAMPLES[args.example]["scenario"]
    path = _path_from_doc(doc)
    method = args.method or doc.get("method", "endpoints")
    _require(method in ("endpoints", "partition"),
             f"unknown method {method!r}")
    report = sf_endpoints(path, args.tol) if method == "endpoints" \
        else sf_partition(path, tol=args.tol)
    if args.trace:
        _write_trace(path, args.trace)
    _report(args, "path", doc, report.to_dict(), report.warnings, started)
    return EXIT_OK


def _run_reduce(args) -> int:
    started = time.monotonic()
    doc = _load_scenario(args, "reduce")
    if doc is None and args.random:
        _require(args.seed is not None, "--random requires --seed")
        doc = {"kind": "reduce", "random": True, "dim": args.dim,
               "codim": args.codim, "seed": args.seed, "count": args.count}
    _require(doc is not None, "provide -i FILE or --random")
    if doc.get("random"):
        rng = np.random.default_rng(int(doc["seed"]))
        count = int(doc.get("count", 1))
        results, ok = [], True
        for trial in range(count):
            path, v = random_reduction_instance(
                rng, int(doc["dim"]), int(doc["codim"]),
                degenerate=bool(doc.get("degenerate", False)))
            rep = verify_reduction(path, v, args.tol)
            ok = ok and rep.ok
            results.append(rep.to_dict() | {"trial": trial})
        payload = results[0] if count == 1 else {"trials": results,
                                                 "all_ok": ok}
        _report(args, "reduce", doc, payload, (), started)
        return EXIT_OK if ok else EXIT_VIOLATED
    path = _path_from_doc(doc.get("path", {}))
    _require("subspace" in doc, "reduce scenario needs 'subspace'")
    v = _subspace_from_doc(doc["subspace"], path.dim, "subspace")
    rep = verify_reduction(path, v, args.tol)
    if args.trace:
        _write_trace(path, args.trace)
    _report(args, "reduce", doc, rep.to_dict(), (), started)
    return EXIT_OK if rep.ok else EXIT_VIOLATED


def _family_from_doc(doc, n) -> SubspacePath:
    _require(isinstance(doc, dict) and "samples" in doc,
             "family must be an object with 'samples'")
    samples = []
    for i, s in enumerate(doc["samples"]):
        _require(isinstance(s, dict) and "t" in s and "basis" in s,
                 f"family sample {i} needs fields 't' and 'basis'")
        samples.append((float(s["t"]),
                        _subspace_from_doc(s["basis"], n, f"family[{i}]")))
    return SubspacePath(samples)


def _rotating_line_scenario():
    ts = np.linspace(0.0, 1.0, 9)
    return {
        "kind": "vary",
        "path": {"samples": [{"t": 0.0, "A": [[1.0, 0.0], [0.0, 1.0]]},
                             {"t": 1.0, "A": [[1.0, 0.0], [0.0, 1.0]]}]},
        "family": {"samples": [
            {"t": float(t),
             "basis": [[float(np.cos(t))], [float(np.sin(t))]]}
            for t in ts]},
    }


def _run_vary(args) -> int:
    started = time.monotonic()
    doc = _load_scenario(args, "vary")
    if doc is None and getattr(args, "example", None):
        _require(args.example in VARY_EXAMPLES,
                 f"unknown vary example {args.example!r}")
        doc = _rotating_line_scenario()
    if doc is None and args.random:
        _require(args.seed is not None, "--random requires --seed")
        doc = {"kind": "vary", "random": True, "dim": args.dim,
               "codim": args.codim, "seed": args.seed, "count": args.count}
    _require(doc is not None, "provide -i FILE, --example or --random")
    if doc.get("random"):
        rng = np.random.default_rng(int(doc["seed"]))
        count = int(doc.get("count", 1))
        results, ok = [], True
        for trial in range(count):
            path, family = random_varying_instance(rng, int(doc["dim"]),
                                                   int(doc["codim"]))
            rep = verify_reduction_varying(path, family, args.tol)
            ok = ok and rep.ok
            results.append(rep.to_dict() | {"trial": trial})
        payload = results[0] if count == 1 else {"trials": results,
                                                 "all_ok": ok}
        _report(args, "vary", doc, payload, (), started)
        return EXIT_OK if ok else EXIT_VIOLATED
    path = _path_from_doc(doc.get("path", {}))
    family = _family_from_doc(doc.get("family"), path.dim)
    flow_report = sf_varying(path, family, args.tol)
    rep = verify_reduction_varying(path, family, args.tol)
    payload = rep.to_dict() | {"sf": flow_report.sf}
    _report(args, "vary", doc, payload, flow_report.warnings, started)
    return EXIT_OK if rep.ok else EXIT_VIOLATED


def _frame_from_doc(doc) -> tuple:
    _require("n" in doc and "G" in doc, "geodesic scenario needs 'n' and 'G'")
    n = int(doc["n"])
    g = np.asarray(doc["G"], dtype=float)
    gamma = CoefficientSpec.from_json(doc.get("Gamma"), n, "Gamma")
    rbar = CoefficientSpec.from_json(doc.get("Rbar"), n, "Rbar")
    holonomy = None
    if doc.get("S") is not None:
        holonomy = _matrix(doc["S"], "S")
    frame = GeodesicFrameData(g, gamma=gamma, rbar=rbar, holonomy=holonomy)
    modes = int(doc.get("modes", 8))
    return frame, modes


def _run_geodesic(args) -> int:
    started = time.monotonic()
    doc = _load_scenario(args, "geodesic")
    if doc is None:
        _require(args.example is not None, "provide -i FILE or --example NAME")
        _require(args.example in GEODESIC_EXAMPLES,
                 f"unknown geodesic example {args.example!r}; "
                 f"choose from {sorted(GEODESIC_EXAMPLES)}")
        frame = example_frame(args.example)
        modes = args.modes or 8
        doc = frame.to_json(modes) | {"kind": "geodesic",
                                      "example": args.example}
    else:
        frame, modes = _frame_from_doc(doc)
        if args.modes:
            modes = args.modes
    if doc.get("example"):
        frame = example_frame(doc["example"])
        modes = args.modes or int(doc.get("modes", 8))
    space = GalerkinSpace(frame.n, modes)
    report = verify_periodic_formula(frame, space, args.tol)
    if args.trace:
        _write_trace(operator_path_for_frame(frame, space), args.trace)
    _report(args, "geodesic", doc, report.to_dict(), report.warnings, started)
    return EXIT_OK if report.ok else EXIT_VIOLATED


def _run_grassmann(args) -> int:
    started = time.monotonic()
    doc = _load_scenario(args, "grassmann")
    if doc is None and args.random:
        _require(args.seed is not None, "--random requires --seed")
        doc = {"kind": "grassmann", "random": True, "dim": args.dim,
               "seed": args.seed}
    _require(doc is not None, "provide -i FILE or --random")
    if doc.get("random"):
        rng = np.random.default_rng(int(doc["seed"]))
        n = int(doc["dim"])
        v = random_subspace(rng, n, int(rng.integers(0, n + 1)))
        w = random_subspace(rng, n, int(rng.integers(0, n + 1)))
    else:
        _require("V" in doc and "W" in doc, "grassmann scenario needs V and W")
        v_cols = _matrix(doc["V"], "V")
        n = v_cols.shape[0]
        v = Subspace.from_spanning(v_cols, n)
        w = _subspace_from_doc(doc["W"], n, "W")
    ind = fredholm_pair_index(v, w, args.tol)
    results = {
        "ambient_dim": v.ambient_dim,
        "dim_V": v.dim,
        "dim_W": w.dim,
        "fredholm_pair_index": ind,
        "projection_restriction_index": projection_restriction_index(v, w, args.tol),
        "relative_dimension": relative_dimension(v, w, args.tol),
        "kato_gamma": kato_gamma(v, w, args.tol),
        "gap_distance": gap_distance(v, w),
        "index_symmetric": fredholm_pair_index(w, v, args.tol) == ind,
        "index_complement_antisymmetric": fredholm_pair_index(
            orthocomplement(v, args.tol), orthocomplement(w, args.tol),
            args.tol) == -ind,
    }
    ok = (results["projection_restriction_index"] == ind
          and results["index_symmetric"]
          and results["index_complement_antisymmetric"]
          and results["relative_dimension"] == v.dim - w.dim)
    results["ok"] = ok
    _report(args, "grassmann", doc, results, (), started)
    return EXIT_OK if ok else EXIT_VIOLATED


def _run_list_examples(args) -> int:
    doc = {
        "path": {name: {"description": ex["description"],
                        "expect": ex["expect"]}
                 for name, ex in PATH_EXAMPLES.items()},
        "vary": {name: ex for name, ex in VARY_EXAMPLES.items()},
        "geodesic": GEODESIC_EXAMPLES,
        "conventions": CONVENTIONS,
    }
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _add_common(parser, random_opts=False):
    parser.add_argument("-i", "--input", help="scenario JSON file")
    parser.add_argument("-o", "--output", help="write the report here")
    parser.add_argument("--trace", help="write an eigenvalue-trace CSV here")
    parser.add_argument("--tol", type=float, default=None,
                        help="override rel_zero (also via SFKIT_TOL)")
    parser.add_argument("--timings", action="store_true",
                        help="attach wall-time to the report "
                             "(breaks byte-for-byte determinism)")
    if random_opts:
        parser.add_argument("--random", action="store_true",
                            help="synthesize a seeded random instance")
        parser.add_argument("--dim", type=int, default=8)
        parser.add_argument("--codim", type=int, default=2)
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--count", type=int, default=1,
                            help="number of random trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfkit",
        description="spectral-flow identities as executable checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path", help="spectral flow of an operator path")
    _add_common(p)
    p.add_argument("--example", help="builtin path scenario")
    p.add_argument("--method", choices=["endpoints", "partition"])
    p.set_defaults(func=_run_path)

    p = sub.add_parser("reduce", help="fixed-subspace restriction identity")
    _add_common(p, random_opts=True)
    p.set_defaults(func=_run_reduce)

    p = sub.add_parser("vary", help="varying-domain restriction identity")
    _add_common(p, random_opts=True)
    p.add_argument("--example", help="builtin vary scenario")
    p.set_defaults(func=_run_vary)

    p = sub.add_parser("geodesic", help="closed-geodesic index identities")
    _add_common(p)
    p.add_argument("--example", help="catalog frame name")
    p.add_argument("--modes", type=int, default=None,
                   help="Galerkin mode count")
    p.set_defaults(func=_run_geodesic)

    p = sub.add_parser("grassmann", help="subspace-pair invariants")
    _add_common(p, random_opts=True)
    p.set_defaults(func=_run_grassmann)

    p = sub.add_parser("list-examples", help="document the builtin catalog")
    p.set_defaults(func=_run_list_examples, input=None, output=None,
                   trace=None, tol=None, timings=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rel = args.tol if getattr(args, "tol", None) else None
    if rel is None:
        env = os.environ.get("SFKIT_TOL")
        if env:
            try:
                rel = float(env)
            except ValueError:
                return _fail_input(f"SFKIT_TOL={env!r} is not a number")
    try:
        args.tol = Tolerance(rel_zero=rel) if rel else DEFAULT_TOL
    except InputError as exc:
        return _fail_input(str(exc))
    try:
        return args.func(args)
    except InputError as exc:
        return _fail_input(str(exc))
    except NumericalFailure as exc:
        return _fail_numerical(str(exc))


if __name__ == "__main__":
    sys.exit(main())
