"""Monte-Carlo pairing of graph cochains with the geometric cycles.

For each graph term the integral runs over

    (cycle parameters) x Conf_0(R, vi) x (R^n)^{vf},

with the integrand the pullback density of the product of normalized
sphere volume forms under the map assembled from the edge Gauss maps and
the unit-tangent maps of small loops.  Interval points are drawn iid from
an importance mixture and sorted (weight 1/(vi! prod q)); free points
come from a mixture with closed-form density.  The estimate is linear
over the cochain's terms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from knotgc import _kernels
from knotgc._kernels.fallback import sphere_area
from knotgc.differential import delta_vec
from knotgc.errors import DimensionMismatch
from knotgc.geometry import default_spec
from knotgc.graphs import format_graph, grading
from knotgc.integrate.core import MCEstimate, run_chunked
from knotgc.integrate.samplers import (
    default_free_proposal,
    default_interval_proposal,
    sample_sphere,
)


@dataclass
class PairingProblem:
    cochain: object  # GraphVector
    cycle: str = "alpha"  # or "lambda" (direct mode, experimental)
    n: int = 5
    samples: int = 1_000_000
    seed: int = 1
    spec: object = None  # ImmersionSpec
    fd_step: float = 1e-5
    box: float = 2.5
    backend: str = None
    threads: int = 1
    stderr_threshold: float = None  # marks the estimate non-convergent

    def __post_init__(self):
        if self.spec is None:
            self.spec = default_spec(n=self.n)
        if self.spec.n != self.n:
            raise DimensionMismatch("spec dimension differs from problem dimension")


def cycle_dimension(cycle, n):
    if cycle == "alpha":
        return 2 * (n - 3)
    if cycle == "lambda":
        return (n - 2) + 2 * (n - 3)
    raise ValueError(f"unknown cycle {cycle!r}")


def check_balance(graph, cycle, n):
    """cycle dim + vi + n vf == (n-1) e, i.e. the form degree matches."""
    e = graph.n_edges
    want = (n - 1) * e
    got = cycle_dimension(cycle, n) + graph.vi + n * graph.vf
    if got != want:
        raise DimensionMismatch(
            f"{format_graph(graph)}: domain dim {got} != form degree {want}"
        )


def _term_job(graph, cycle, immersion, fd_step):
    job = {
        "n": np.int64(immersion.n),
        "vi": np.int64(graph.vi),
        "vf": np.int64(graph.vf),
        "edges": np.array([list(ab) for ab in graph.edges], dtype=np.int64).reshape(-1, 2),
        "loops": np.array([v for v, _ in graph.loops], dtype=np.int64),
        "cycle": np.int64(0 if cycle == "alpha" else 1),
        "fd_step": float(fd_step),
    }
    job.update(immersion.kernel_tables())
    return job


def pairing_term(graph, problem, immersion, stream, kern):
    """MC estimate for a single graph term (coefficient not applied)."""
    n = problem.n
    spec = problem.spec
    check_balance(graph, problem.cycle, n)
    job = _term_job(graph, problem.cycle, immersion, problem.fd_step)
    q_int = default_interval_proposal(spec, box=problem.box)
    q_free = default_free_proposal(immersion) if graph.vf else None
    is_lambda = problem.cycle == "lambda"

    a_small = sphere_area(n - 2)  # area of S^{n-3}
    vi, vf = graph.vi, graph.vf
    fact = math.factorial(vi)

    def evaluate(rng, count):
        dom = {
            "u1": sample_sphere(rng, count, n - 2),
            "u2": sample_sphere(rng, count, n - 2),
        }
        weight = np.full(count, a_small * a_small)
        if is_lambda:
            dom["s"] = rng.uniform(-1.0, 1.0, count)
            dom["u0"] = sample_sphere(rng, count, n - 2)
            weight *= 2.0 * a_small
        t = q_int.sample(rng, count * vi).reshape(count, vi) if vi else np.zeros((count, 0))
        if vi:
            weight /= fact
            weight /= np.prod(q_int.density(t), axis=1)
            t = np.sort(t, axis=1)
        dom["t"] = t
        if vf:
            x = q_free.sample(rng, count * vf).reshape(count, vf, n)
            weight /= np.prod(q_free.density(x.reshape(-1, n)).reshape(count, vf), axis=1)
            dom["x"] = x
        else:
            dom["x"] = np.zeros((count, 0, n))
        vals = kern.pairing_integrand(job, dom, num_threads=problem.threads)
        return vals * weight

    value, stderr, count = run_chunked(
        evaluate, problem.samples, problem.seed, stream=stream
    )
    return value, stderr, count


def pairing(problem):
    """Pairing of a cochain with the alpha or lambda cycle.

    Returns an MCEstimate whose extra dict carries per-term values and a
    cocycle flag; a warning is issued for non-cocycle inputs and the
    result labeled chain-level.
    """
    v = problem.cochain
    if not v.terms:
        return MCEstimate(0.0, 0.0, 0, problem.seed, extra={"terms": []})
    gradings = {grading(g) for g in v.terms}
    is_cocycle = delta_vec(v).is_zero() if len(gradings) == 1 else False
    if not is_cocycle:
        warnings.warn(
            "cochain is not a cocycle; the pairing is chain-level, not class-level",
            stacklevel=2,
        )
    for g in v.terms:
        check_balance(g, problem.cycle, problem.n)

    immersion = problem.spec.immersion()
    kern = _kernels.get_backend(problem.backend)
    terms = v.items_sorted()
    per_term_samples = max(1, problem.samples // len(terms))

    total = 0.0
    var = 0.0
    count = 0
    term_info = []
    sub = type(problem)(**{**problem.__dict__, "samples": per_term_samples})
    for idx, (g, coeff) in enumerate(terms):
        val, se, cnt = pairing_term(g, sub, immersion, stream=idx + 1, kern=kern)
        c = float(coeff)
        total += c * val
        var += (c * se) ** 2
        count += cnt
        term_info.append(
            {
                "graph": format_graph(g),
                "coeff": str(coeff),
                "value": val,
                "stderr": se,
                "samples": cnt,
            }
        )
    stderr = math.sqrt(var)
    extra = {
        "terms": term_info,
        "is_cocycle": is_cocycle,
        "cycle": problem.cycle,
        "backend": kern.BACKEND_NAME,
        "sign": 1 if total >= 0 else -1,
        "proposals": {
            "interval": "uniform+window+cauchy mixture",
            "free": "ball-compactified+gauss+shell mixture",
            "box": problem.box,
        },
    }
    if problem.stderr_threshold is not None:
        extra["non_convergent"] = stderr > problem.stderr_threshold
    return MCEstimate(total, stderr, count, problem.seed, extra=extra)
