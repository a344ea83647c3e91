"""Batch front-end.

Subcommands: basis, betti, delta, cocycle-check, euler, chord-dim, link,
pair, covering-check, cache.  Primary output is deterministic JSON on
stdout (schema "v1"); progress and errors go to stderr, computation
errors exit 1 with a machine-readable JSON object, usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

SCHEMA = "v1"


def _emit(obj, fmt="json"):
    obj = {"schema": SCHEMA, **obj}
    if fmt == "csv":
        lines = []
        for k, v in obj.items():
            if isinstance(v, (list, dict)):
                v = json.dumps(v, sort_keys=True)
            lines.append(f"{k},{v}")
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        sys.stdout.write(json.dumps(obj, sort_keys=True, default=str) + "\n")


def _fail(message, code=1):
    sys.stderr.write(json.dumps({"schema": SCHEMA, "error": message}) + "\n")
    sys.exit(code)


def build_parser():
    p = argparse.ArgumentParser(prog="knotgc", description=__doc__)
    p.add_argument("--json", action="store_true", help="force JSON output (default)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--cache-dir", help="overrides GC_CACHE_DIR")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("basis", help="canonical basis of one grading")
    s.add_argument("--ord", dest="k", type=int, required=True)
    s.add_argument("--deg", dest="l", type=int, required=True)
    s.add_argument("--list", action="store_true", help="include the graphs")

    s = sub.add_parser("betti", help="cohomology dimensions")
    s.add_argument("--ord", dest="k", type=int, required=True)
    s.add_argument("--deg", dest="l", type=int)
    s.add_argument("--table", action="store_true", help="all degrees of this order")

    s = sub.add_parser("delta", help="differential of one graph")
    s.add_argument("--graph", required=True)

    s = sub.add_parser("cocycle-check", help="is a cochain file a cocycle")
    s.add_argument("--file", required=True)

    s = sub.add_parser("euler", help="Euler characteristic of one order")
    s.add_argument("--ord", dest="k", type=int, required=True)

    s = sub.add_parser("chord-dim", help="chord diagram algebra dimension")
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--no-1t", action="store_true")

    s = sub.add_parser("link", help="Monte-Carlo linking number")
    s.add_argument("--preset", required=True,
                   choices=["s1-vs-i1", "s2-vs-i2", "circles", "circles-far"])
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--backend", choices=["auto", "fallback", "compiled"], default="auto")

    s = sub.add_parser("pair", help="Monte-Carlo cochain/cycle pairing")
    s.add_argument("--cochain", required=True, help="cochain JSON file")
    s.add_argument("--cycle", choices=["alpha", "lambda"], default="alpha")
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--eps", default="0.05,0.05", help="two window sizes")
    s.add_argument("--backend", choices=["auto", "fallback", "compiled"], default="auto")

    s = sub.add_parser("covering-check", help="two-fold covering trials")
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=1)

    s = sub.add_parser("cache", help="disk cache management")
    s.add_argument("action", choices=["clear", "stat"])
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        raise SystemExit(2 if e.code not in (0, None) else 0)

    if args.cache_dir:
        os.environ["GC_CACHE_DIR"] = args.cache_dir

    from knotgc import chords, cohomology
    from knotgc.graphs import GraphVector, format_graph, parse_graph
    from knotgc.differential import delta, delta_vec
    from knotgc.errors import GraphError

    fmt = args.format
    try:
        if args.cmd == "basis":
            table = cohomology.enumerate_basis(args.k, args.l)
            out = {"k": args.k, "l": args.l, "dim": len(table)}
            if args.list:
                out["graphs"] = [format_graph(g) for g in table]
            _emit(out, fmt)
        elif args.cmd == "betti":
            if args.table:
                rows = [
                    cohomology.cohomology_summary(args.k, l)
                    for l in range(0, cohomology.max_degree(args.k) + 1)
                ]
                _emit({"k": args.k, "table": rows,
                       "chi": cohomology.euler_characteristic(args.k)}, fmt)
            else:
                if args.l is None:
                    _fail("betti requires --deg or --table", 2)
                out = cohomology.cohomology_summary(args.k, args.l)
                _emit(out, fmt)
        elif args.cmd == "delta":
            g = parse_graph(args.graph)
            _emit({"graph": format_graph(g), "delta": delta(g).to_json()}, fmt)
        elif args.cmd == "cocycle-check":
            with open(args.file) as f:
                v = GraphVector.from_json(json.load(f))
            dv = delta_vec(v)
            _emit({"file": args.file, "is_cocycle": dv.is_zero(),
                   "delta_terms": len(dv)}, fmt)
        elif args.cmd == "euler":
            _emit({"k": args.k, "chi": cohomology.euler_characteristic(args.k)}, fmt)
        elif args.cmd == "chord-dim":
            dim = chords.algebra_dimension(args.order, use_1t=not args.no_1t)
            _emit({"order": args.order, "use_1t": not args.no_1t, "dim": dim}, fmt)
        elif args.cmd == "link":
            from knotgc.integrate.linking import linking_preset

            backend = None if args.backend == "auto" else args.backend
            est = linking_preset(args.preset, n=args.n, samples=args.samples,
                                 seed=args.seed, eps=args.eps, backend=backend,
                                 threads=args.threads)
            _emit({"preset": args.preset, "n": args.n, **est.to_json()}, fmt)
        elif args.cmd == "pair":
            from knotgc.geometry import ImmersionSpec
            from knotgc.integrate.pairing import PairingProblem, pairing

            with open(args.cochain) as f:
                v = GraphVector.from_json(json.load(f))
            eps = tuple(float(x) for x in args.eps.split(","))
            spec = ImmersionSpec(n=args.n, eps=eps)
            backend = None if args.backend == "auto" else args.backend
            prob = PairingProblem(cochain=v, cycle=args.cycle, n=args.n,
                                  samples=args.samples, seed=args.seed, spec=spec,
                                  backend=backend, threads=args.threads)
            import warnings

            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                est = pairing(prob)
            for w in caught:
                sys.stderr.write(f"warning: {w.message}\n")
            _emit({"cochain": args.cochain, **est.to_json()}, fmt)
        elif args.cmd == "covering-check":
            from knotgc.integrate.covering import covering_trials

            rep = covering_trials(trials=args.trials, n=args.n, seed=args.seed)
            _emit({"n": args.n, "trials": rep["trials"], "ok": rep["ok"],
                   "all_ok": rep["all_ok"]}, fmt)
        elif args.cmd == "cache":
            if args.action == "clear":
                _emit({"cleared": cohomology.clear_cache()}, fmt)
            else:
                _emit(cohomology.cache_stat(), fmt)
    except GraphError as e:
        _fail(f"{type(e).__name__}: {e}")
    except (OSError, ValueError) as e:
        _fail(f"{type(e).__name__}: {e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
