import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knotgc import _kernels
from knotgc.errors import CoincidentPoints, DimensionMismatch, OnDiagonal, OutsideA
from knotgc.geometry import default_spec
from knotgc.graphs import GraphVector, parse_graph
from knotgc.integrate import (
    covering_check,
    covering_trials,
    gauss,
    gauss_jacobian,
    linking,
    linking_preset,
    pairing,
    PairingProblem,
)
from knotgc.integrate.cycles import CircleCycle, hopf_circles
from knotgc.integrate.pairing import _term_job, check_balance
from knotgc._kernels.fallback import oriented_frames


FB = _kernels.get_backend("fallback")

try:
    CP = _kernels.get_backend("compiled")
except ImportError:
    CP = None

needs_compiled = pytest.mark.skipif(CP is None, reason="compiled kernels unavailable")


class TestGauss:
    def test_example(self):
        assert np.allclose(gauss([1.0, 0, 0], [0.0, 0, 0]), [1, 0, 0])

    def test_coincident(self):
        with pytest.raises(CoincidentPoints):
            gauss([1.0, 2.0], [1.0, 2.0])

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_antisymmetry_and_norm(self, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.standard_normal(5), rng.standard_normal(5)
        if np.allclose(x, y):
            return
        g = gauss(x, y)
        assert np.allclose(g + gauss(y, x), 0.0, atol=1e-15)
        assert abs(np.linalg.norm(g) - 1.0) < 1e-12

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(20):
            x, y = rng.standard_normal(5), rng.standard_normal(5)
            jac = gauss_jacobian(x, y)
            fd = np.empty_like(jac)
            for c in range(5):
                e = np.zeros(5)
                e[c] = h
                fd[:, c] = (gauss(x + e, y) - gauss(x - e, y)) / (2 * h)
            assert np.abs(fd - jac).max() / np.abs(jac).max() < 1e-5


class TestFrames:
    def test_orthonormal_and_oriented(self):
        rng = np.random.default_rng(1)
        for m in (3, 5):
            u = rng.standard_normal((50, m))
            u /= np.linalg.norm(u, axis=-1, keepdims=True)
            fr = oriented_frames(u)
            for i in range(50):
                basis = np.vstack([u[i], fr[i]])
                assert np.abs(basis @ basis.T - np.eye(m)).max() < 1e-12
                assert np.linalg.det(basis) > 0.9


class TestLinking:
    def test_hopf_circles(self):
        est = linking_preset("circles", samples=150_000, seed=7)
        assert abs(abs(est.value) - 1.0) < max(0.05, 3 * est.stderr)

    def test_far_circles_unlinked(self):
        est = linking_preset("circles-far", samples=40_000, seed=7)
        assert abs(est.value) < max(0.01, 4 * est.stderr)

    def test_quadrature_oracle_agreement(self):
        # classical Gauss double integral on a Simpson grid, written against
        # the raw formula rather than the MC machinery
        a, b = hopf_circles()
        m = 400
        th = np.linspace(0, 2 * np.pi, m, endpoint=False)
        pa = a.eval(th)
        pb = b.eval(th)
        da = np.gradient(pa, th, axis=0)
        db = np.gradient(pb, th, axis=0)
        diff = pa[:, None, :] - pb[None, :, :]
        r3 = np.linalg.norm(diff, axis=-1) ** 3
        cross = np.cross(da[:, None, :], db[None, :, :])
        integrand = np.einsum("ijk,ijk->ij", diff, cross) / r3
        lk = integrand.sum() * (2 * np.pi / m) ** 2 / (4 * np.pi)
        est = linking_preset("circles", samples=150_000, seed=3)
        assert abs(abs(lk) - 1.0) < 0.01
        assert abs(abs(est.value) - abs(lk)) < max(0.05, 3 * est.stderr)

    def test_resolution_sphere_links_segment(self):
        est = linking_preset("s1-vs-i1", n=5, samples=400_000, seed=11)
        assert abs(est.value - 1.0) < max(0.05, 3 * est.stderr)

    def test_dimension_mismatch(self):
        a, _ = hopf_circles()
        with pytest.raises(DimensionMismatch):
            linking(a, a, samples=10, seed=0, n=5)

    def test_deterministic(self):
        e1 = linking_preset("circles", samples=30_000, seed=5)
        e2 = linking_preset("circles", samples=30_000, seed=5)
        assert e1.value == e2.value


class TestBackendParity:
    @needs_compiled
    @pytest.mark.parametrize(
        "gname,cyc",
        [
            ("G[4,0;E{1>3,2>4}]", "alpha"),
            ("G[3,1;E{1>4,2>4,3>4}]", "alpha"),
            ("G[5,0;E{1>3,1>4,2>5}]", "lambda"),
            ("G[5,0;E{1>3,2>5};L{4+}]", "lambda"),
        ],
    )
    def test_pairing_integrand(self, gname, cyc):
        g = parse_graph(gname)
        imm = default_spec().immersion()
        job = _term_job(g, cyc, imm, 1e-5)
        rng = np.random.default_rng(42)
        N = 800

        def usph(count):
            v = rng.standard_normal((count, 3))
            return v / np.linalg.norm(v, axis=-1, keepdims=True)

        centers = np.array([-0.6, -0.2, 0.2, 0.6])
        t = centers[rng.integers(0, 4, (N, g.vi))] + 0.004 * rng.standard_normal((N, g.vi))
        dom = {
            "u1": usph(N),
            "u2": usph(N),
            "t": np.sort(t, axis=1),
            "x": imm.z[0] + 0.3 * rng.standard_normal((N, g.vf, 5))
            if g.vf
            else np.zeros((N, 0, 5)),
        }
        if cyc == "lambda":
            dom["s"] = rng.uniform(-1, 1, N)
            dom["u0"] = usph(N)
        a = FB.pairing_integrand(job, dom)
        b = CP.pairing_integrand(job, dom)
        scale = np.abs(a).max()
        assert scale > 0
        assert np.abs(a - b).max() / scale < 1e-6

    @needs_compiled
    def test_threaded_identical(self):
        g = parse_graph("G[4,0;E{1>3,2>4}]")
        imm = default_spec().immersion()
        job = _term_job(g, "alpha", imm, 1e-5)
        rng = np.random.default_rng(0)
        N = 2000
        u = rng.standard_normal((N, 3))
        u /= np.linalg.norm(u, axis=-1, keepdims=True)
        dom = {
            "u1": u,
            "u2": np.roll(u, 1, axis=0),
            "t": np.sort(rng.uniform(-0.7, 0.7, (N, 4)), axis=1),
            "x": np.zeros((N, 0, 5)),
        }
        v1 = CP.pairing_integrand(job, dom, num_threads=1)
        v2 = CP.pairing_integrand(job, dom, num_threads=2)
        assert np.array_equal(v1, v2)


class TestPairing:
    def test_balance_check(self):
        with pytest.raises(DimensionMismatch):
            check_balance(parse_graph("G[2,0;E{1>2}]"), "alpha", 5)

    def test_balance_error_from_pairing(self):
        v = GraphVector.single(parse_graph("G[2,0;E{1>2}]"), 1)
        with pytest.raises(DimensionMismatch):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                pairing(PairingProblem(cochain=v, samples=10, seed=0))

    def test_non_cocycle_warns(self):
        v = GraphVector.single(parse_graph("G[4,0;E{1>3,2>4}]"), 1)
        with pytest.warns(UserWarning, match="chain-level"):
            pairing(PairingProblem(cochain=v, samples=2_000, seed=0))

    def test_trivalent_cocycle_pairing_is_unit(self):
        v = GraphVector.single(parse_graph("G[4,0;E{1>3,2>4}]"), 1) + GraphVector.single(
            parse_graph("G[3,1;E{1>4,2>4,3>4}]"), -1
        )
        est = pairing(PairingProblem(cochain=v, samples=400_000, seed=5))
        assert est.extra["is_cocycle"]
        assert abs(abs(est.value) - 1.0) < max(0.2, 4 * est.stderr)

    def test_linearity_same_stream(self):
        v = GraphVector.single(parse_graph("G[4,0;E{1>3,2>4}]"), 1) + GraphVector.single(
            parse_graph("G[3,1;E{1>4,2>4,3>4}]"), -1
        )
        e1 = pairing(PairingProblem(cochain=v, samples=30_000, seed=3))
        e2 = pairing(PairingProblem(cochain=2 * v, samples=30_000, seed=3))
        assert e2.value == pytest.approx(2 * e1.value, rel=1e-12)

    def test_reseed_stability(self):
        v = GraphVector.single(parse_graph("G[4,0;E{1>3,2>4}]"), 1) + GraphVector.single(
            parse_graph("G[3,1;E{1>4,2>4,3>4}]"), -1
        )
        e1 = pairing(PairingProblem(cochain=v, samples=400_000, seed=21))
        e2 = pairing(PairingProblem(cochain=v, samples=400_000, seed=22))
        assert abs(e1.value - e2.value) <= 4 * np.hypot(e1.stderr, e2.stderr)

    def test_deterministic(self):
        v = GraphVector.single(parse_graph("G[4,0;E{1>3,2>4}]"), 1) + GraphVector.single(
            parse_graph("G[3,1;E{1>4,2>4,3>4}]"), -1
        )
        e1 = pairing(PairingProblem(cochain=v, samples=20_000, seed=9))
        e2 = pairing(PairingProblem(cochain=v, samples=20_000, seed=9))
        assert e1.value == e2.value

    def test_lambda_direct_mode_runs(self):
        # experimental direct mode: runs and reports, no accuracy promise
        v = GraphVector.single(parse_graph("G[5,0;E{1>3,1>4,2>5}]"), 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = pairing(
                PairingProblem(cochain=v, cycle="lambda", samples=5_000, seed=1)
            )
        assert np.isfinite(est.value)


class TestCovering:
    def test_random_target(self):
        rng = np.random.default_rng(5)
        v3 = rng.standard_normal(5)
        v3 /= np.linalg.norm(v3)
        v4 = rng.standard_normal(5)
        v4 /= np.linalg.norm(v4)
        if v3[4] * v4[4] < 0:
            v4 = -v4
        rep = covering_check(v3, v4)
        assert rep["count"] == 2
        assert all(p["residual"] < 1e-8 for p in rep["preimages"])
        assert rep["signs_agree"]

    def test_on_diagonal(self):
        v = np.array([0.0, 0, 0, 0.6, 0.8])
        with pytest.raises(OnDiagonal):
            covering_check(v, v)

    def test_outside_a(self):
        v3 = np.array([0.0, 0, 0, 0.6, 0.8])
        v4 = np.array([0.0, 0, 0, 0.6, -0.8])
        with pytest.raises(OutsideA):
            covering_check(v3, v4)

    def test_trials(self):
        rep = covering_trials(trials=25, seed=2)
        assert rep["all_ok"]
