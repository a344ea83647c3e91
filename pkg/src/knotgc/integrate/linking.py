"""Monte-Carlo linking numbers of two disjoint cycles.

The estimate is the integral of the Gauss-map pullback of the normalized
volume form over the product of the two parameter domains; for honestly
linked cycles it converges to the integer linking number.
"""

from __future__ import annotations

import numpy as np

from knotgc import _kernels
from knotgc.errors import DimensionMismatch
from knotgc.integrate.core import MCEstimate, run_chunked
from knotgc.integrate.cycles import ResolutionSphereCycle, SegmentCycle, hopf_circles, unlinked_circles
from knotgc.geometry import default_spec


def _build_job(cycle_a, cycle_b, n, fd_step, immersion=None):
    job = {"n": np.int64(n), "fd_step": float(fd_step)}
    for which, cyc in (("a", cycle_a), ("b", cycle_b)):
        desc = cyc.descriptor()
        job[f"cycle_{which}_kind"] = np.int64(desc["kind"])
        if "index" in desc:
            job[f"cycle_{which}_index"] = np.int64(desc["index"])
        if "data" in desc:
            job[f"cycle_{which}_data"] = desc["data"]
    if immersion is not None:
        job.update(immersion.kernel_tables())
    return job


def _sample_sphere(rng, count, m):
    v = rng.standard_normal((count, m))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def linking(cycle_a, cycle_b, samples, seed, n=None, fd_step=1e-5, backend=None, threads=1):
    """MC estimate of the linking pairing of two preset cycles."""
    n = n if n is not None else cycle_a.n
    if cycle_a.dim + cycle_b.dim != n - 1:
        raise DimensionMismatch(
            f"cycle dims {cycle_a.dim} + {cycle_b.dim} != n - 1 = {n - 1}"
        )
    immersion = getattr(cycle_a, "immersion", None) or getattr(cycle_b, "immersion", None)
    job = _build_job(cycle_a, cycle_b, n, fd_step, immersion)
    kern = _kernels.get_backend(backend)
    weight = cycle_a.weight() * cycle_b.weight()

    lo_a, hi_a = cycle_a.interval()
    lo_b, hi_b = cycle_b.interval()
    ma, mb = cycle_a.sphere_dim(), cycle_b.sphere_dim()

    def evaluate(rng, count):
        dom = {
            "ta": rng.uniform(lo_a, hi_a, count),
            "tb": rng.uniform(lo_b, hi_b, count),
        }
        if ma:
            dom["ua"] = _sample_sphere(rng, count, ma)
        if mb:
            dom["ub"] = _sample_sphere(rng, count, mb)
        return kern.linking_integrand(job, dom, num_threads=threads) * weight

    value, stderr, count = run_chunked(evaluate, samples, seed)
    return MCEstimate(
        value, stderr, count, seed,
        extra={"backend": kern.BACKEND_NAME, "kind": "linking"},
    )


def linking_preset(name, n=5, samples=1_000_000, seed=1, eps=0.05, backend=None, threads=1):
    """Named linking configurations used by the CLI and the acceptance
    suite: 's1-vs-i1', 's2-vs-i2' (resolution sphere against the partner
    strand), 'circles' and 'circles-far' (n=3)."""
    if name in ("s1-vs-i1", "s2-vs-i2"):
        idx = 0 if name == "s1-vs-i1" else 1
        spec = default_spec(n=n, eps=eps)
        imm = spec.immersion()
        a = ResolutionSphereCycle(imm, idx)
        b = SegmentCycle(imm, idx)
        return linking(a, b, samples, seed, n=n, backend=backend, threads=threads)
    if name == "circles":
        a, b = hopf_circles()
        return linking(a, b, samples, seed, n=3, backend=backend, threads=threads)
    if name == "circles-far":
        a, b = unlinked_circles()
        return linking(a, b, samples, seed, n=3, backend=backend, threads=threads)
    raise ValueError(f"unknown linking preset {name!r}")
