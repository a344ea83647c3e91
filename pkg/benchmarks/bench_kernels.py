"""Throughput comparison of the compiled kernels against the numpy
fallback on the hot integrands.

Usage: python benchmarks/bench_kernels.py [--samples N] [--threads T]
"""

import argparse
import time

import numpy as np

from knotgc import _kernels
from knotgc.geometry import default_spec
from knotgc.graphs import parse_graph
from knotgc.integrate.cycles import ResolutionSphereCycle, SegmentCycle
from knotgc.integrate.linking import _build_job
from knotgc.integrate.pairing import _term_job


def unit_sphere(rng, count, m):
    v = rng.standard_normal((count, m))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def pairing_case(name, graph, cycle, rng, count, imm):
    g = parse_graph(graph)
    job = _term_job(g, cycle, imm, 1e-5)
    centers = np.array([-0.6, -0.2, 0.2, 0.6])
    t = centers[rng.integers(0, 4, (count, g.vi))] + 0.01 * rng.standard_normal((count, g.vi))
    dom = {
        "u1": unit_sphere(rng, count, 3),
        "u2": unit_sphere(rng, count, 3),
        "t": np.sort(t, axis=1),
        "x": rng.uniform(-1, 1, (count, g.vf, 5)),
    }
    if cycle == "lambda":
        dom["s"] = rng.uniform(-1, 1, count)
        dom["u0"] = unit_sphere(rng, count, 3)
    return name, "pairing", job, dom


def linking_case(rng, count, imm):
    job = _build_job(ResolutionSphereCycle(imm, 0), SegmentCycle(imm, 0), 5, 1e-5, imm)
    dom = {
        "ta": rng.uniform(-0.65, -0.55, count),
        "tb": rng.uniform(0.15, 0.25, count),
        "ua": unit_sphere(rng, count, 3),
    }
    return "S1-vs-I1 linking", "linking", job, dom


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    imm = default_spec().immersion()
    cases = [
        pairing_case("chord diagram term (d=8)", "G[4,0;E{1>3,2>4}]", "alpha", rng, args.samples, imm),
        pairing_case("tripod term (d=12)", "G[3,1;E{1>4,2>4,3>4}]", "alpha", rng, args.samples, imm),
        pairing_case("rotated-cycle term (d=12)", "G[5,0;E{1>3,1>4,2>5}]", "lambda", rng, args.samples, imm),
        linking_case(rng, args.samples, imm),
    ]

    backends = [("fallback", _kernels.get_backend("fallback"))]
    try:
        backends.append(("compiled", _kernels.get_backend("compiled")))
    except ImportError:
        print("compiled kernels not built; benchmarking fallback only")

    print(f"samples per case: {args.samples}, threads: {args.threads}\n")
    header = f"{'case':<28}" + "".join(f"{name:>16}" for name, _ in backends) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, kind, job, dom in cases:
        rates = []
        ref = None
        for bname, backend in backends:
            fn = backend.pairing_integrand if kind == "pairing" else backend.linking_integrand
            fn(job, {k: v[:1000] for k, v in dom.items()})  # warm up
            t0 = time.perf_counter()
            vals = fn(job, dom, num_threads=args.threads)
            dt = time.perf_counter() - t0
            rates.append(dt * 1e6 / args.samples)
            if ref is None:
                ref = vals
            else:
                scale = np.abs(ref).max()
                if scale > 0:
                    assert np.abs(vals - ref).max() / scale < 1e-6, "backends disagree"
        row = f"{name:<28}" + "".join(f"{r:>13.2f} us" for r in rates)
        if len(rates) == 2:
            row += f"{rates[0] / rates[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
