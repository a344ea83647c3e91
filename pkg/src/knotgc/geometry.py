"""Concrete long-knot geometry.

The default immersion is a planar curve in the (x_{n-1}, x_n)-plane built
from line segments and circular arcs (tangent-continuous), reparametrized
by a piecewise-quadratic monotone time map so that f(t) = (0,...,0,t)
exactly for |t| >= 1 and the two double points sit at the prescribed
parameters: f(xi1) = f(xi3) = z1 and f(xi2) = f(xi4) = z2 with the
interleaved pattern xi1 < xi2 < xi3 < xi4.

Resolutions displace the first-visit windows off the plane by a bump
profile times a unit vector perpendicular to both strands.  The paper-form
bump exp(1/((t-xi)^2 - eps^2)) underflows double precision for small eps
(at eps = 0.05 its peak is exp(-400)), so the default profile is the
rescaled bump exp(1 - 1/(1 - s^2)), s = (t-xi)/eps, with peak 1; the raw
profile remains available as profile="raw".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from knotgc.errors import NonPerpendicular, NonUnitVector, OverlappingBalls

__all__ = [
    "PlanarPath",
    "SpeedMap",
    "Immersion",
    "ImmersionSpec",
    "LongKnot",
    "FramedKnot",
    "LittleBall",
    "resolve",
    "bump",
    "bump_deriv",
    "clutching",
    "lambda_point",
    "LambdaKnot",
    "reparam",
    "operad_act",
    "default_spec",
]

_SQ2 = math.sqrt(2.0)


# --- planar path of segments and arcs ----------------------------------------


class PlanarPath:
    """Unit-speed C^1 path in the plane, made of segments and arcs.

    Encoded as arrays so the compiled kernel can mirror the evaluation:
    kind 0 = segment with params (x0, y0, dx, dy); kind 1 = arc with params
    (cx, cy, r, alpha0) and signed angle rate stored separately.
    """

    def __init__(self):
        self.kind = []
        self.s0 = []
        self.params = []  # 4 floats per piece
        self.rate = []  # arcs: +-1/r; segments: 0
        self.total = 0.0

    def add_segment(self, x0, y0, dx, dy, length):
        self.kind.append(0)
        self.s0.append(self.total)
        self.params.append((x0, y0, dx, dy))
        self.rate.append(0.0)
        self.total += length
        return self

    def add_arc(self, cx, cy, r, alpha0, sweep):
        """Sweep is the signed angle (radians); positive = counterclockwise."""
        self.kind.append(1)
        self.s0.append(self.total)
        self.params.append((cx, cy, r, alpha0))
        self.rate.append((1.0 if sweep > 0 else -1.0) / r)
        self.total += abs(sweep) * r
        return self

    def finalize(self):
        self.kind = np.array(self.kind, dtype=np.int64)
        self.s0 = np.array(self.s0 + [self.total])
        self.params = np.array(self.params)
        self.rate = np.array(self.rate)
        return self

    def end_point(self):
        return self.eval(np.array([self.total]))[0][0]

    def eval(self, s):
        """Positions and unit tangents at arc lengths s (array); the path is
        extended linearly beyond both ends."""
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.s0, s, side="right") - 1, 0, len(self.kind) - 1)
        ds = s - self.s0[idx]
        pos = np.empty(s.shape + (2,))
        tan = np.empty(s.shape + (2,))
        seg = self.kind[idx] == 0
        if np.any(seg):
            p = self.params[idx[seg]]
            pos[seg, 0] = p[:, 0] + p[:, 2] * ds[seg]
            pos[seg, 1] = p[:, 1] + p[:, 3] * ds[seg]
            tan[seg, 0] = p[:, 2]
            tan[seg, 1] = p[:, 3]
        arc = ~seg
        if np.any(arc):
            p = self.params[idx[arc]]
            w = self.rate[idx[arc]]
            al = p[:, 3] + w * ds[arc]
            r = p[:, 2]
            pos[arc, 0] = p[:, 0] + r * np.cos(al)
            pos[arc, 1] = p[:, 1] + r * np.sin(al)
            tan[arc, 0] = -np.sin(al) * np.sign(w)
            tan[arc, 1] = np.cos(al) * np.sign(w)
        return pos, tan


class SpeedMap:
    """Monotone C^1 map t -> s with piecewise-linear derivative.

    Outside [t0, tN] the map continues with slope 1, which keeps the curve
    equal to the axis with unit speed on the tails.
    """

    def __init__(self, knots_t, knots_v):
        self.t = np.asarray(knots_t, dtype=float)
        self.v = np.asarray(knots_v, dtype=float)
        assert np.all(self.v > 0), "speed must stay positive"
        cum = [0.0]
        for i in range(len(self.t) - 1):
            dt = self.t[i + 1] - self.t[i]
            cum.append(cum[-1] + 0.5 * (self.v[i] + self.v[i + 1]) * dt)
        self.s = np.array(cum)

    def eval(self, t):
        """Returns (s, ds/dt), vectorized."""
        t = np.asarray(t, dtype=float)
        s = np.empty(t.shape)
        sp = np.empty(t.shape)
        below = t <= self.t[0]
        above = t >= self.t[-1]
        mid = ~(below | above)
        s[below] = self.s[0] + (t[below] - self.t[0])
        sp[below] = 1.0
        s[above] = self.s[-1] + (t[above] - self.t[-1])
        sp[above] = 1.0
        if np.any(mid):
            i = np.clip(np.searchsorted(self.t, t[mid], side="right") - 1, 0, len(self.t) - 2)
            dt = t[mid] - self.t[i]
            seglen = self.t[i + 1] - self.t[i]
            slope = (self.v[i + 1] - self.v[i]) / seglen
            sp[mid] = self.v[i] + slope * dt
            s[mid] = self.s[i] + self.v[i] * dt + 0.5 * slope * dt * dt
        return s, sp


def _build_default_path():
    """Grid-routed curve with two perpendicular self-crossings.

    The first strand runs up the axis through z1 = (0,-0.6) and
    z2 = (0,-0.2); the return makes a wide right-and-under detour, crosses
    z1 heading right and z2 heading left, then climbs to merge with the
    axis at (0, 0.75).  An interleaved double-point pattern cannot be
    realized by a planar curve (each chord would interlace an odd number
    of chords), so the bottom run carries an out-of-plane bridge where it
    passes under the axis strand.

    Returns (path, s_z1_second, s_z2_second, merge_b, bridge).
    """
    rho = 0.1
    q = math.pi / 2

    p = PlanarPath()
    p.add_segment(0.0, -1.0, 0.0, 1.0, 1.0)                 # axis: z1 at s=0.4, z2 at s=0.8
    p.add_arc(rho, 0.0, rho, math.pi, -q)                   # up -> right
    p.add_segment(0.1, 0.1, 1.0, 0.0, 0.2)
    p.add_arc(0.3, 0.0, rho, q, -q)                         # right -> down
    p.add_segment(0.4, 0.0, 0.0, -1.0, 0.75)
    p.add_arc(0.3, -0.75, rho, 0.0, -q)                     # down -> left
    s_bridge = p.total + 0.3                                # bottom run crosses the axis here
    p.add_segment(0.3, -0.85, -1.0, 0.0, 0.4)
    p.add_arc(-0.1, -0.75, rho, 3 * q, -q)                  # left -> up
    p.add_segment(-0.2, -0.75, 0.0, 1.0, 0.05)
    p.add_arc(-0.1, -0.7, rho, math.pi, -q)                 # up -> right
    s_z1_second = p.total + 0.1                             # z1 pass, heading right
    p.add_segment(-0.1, -0.6, 1.0, 0.0, 0.2)
    p.add_arc(0.1, -0.5, rho, 3 * q, q)                     # right -> up
    p.add_segment(0.2, -0.5, 0.0, 1.0, 0.2)
    p.add_arc(0.1, -0.3, rho, 0.0, q)                       # up -> left
    s_z2_second = p.total + 0.1                             # z2 pass, heading left
    p.add_segment(0.1, -0.2, -1.0, 0.0, 0.3)
    p.add_arc(-0.2, -0.1, rho, 3 * q, -q)                   # left -> up
    p.add_segment(-0.3, -0.1, 0.0, 1.0, 0.65)
    p.add_arc(-0.2, 0.55, rho, math.pi, -q)                 # up -> right
    p.add_segment(-0.2, 0.65, 1.0, 0.0, 0.1)
    p.add_arc(-0.1, 0.75, rho, 3 * q, q)                    # right -> up, merge at (0, 0.75)
    merge_b = 0.75
    p.add_segment(0.0, merge_b, 0.0, 1.0, 1.0)              # upper axis
    p.finalize()
    bridge = {"center": s_bridge, "halfwidth": 0.12, "height": 0.08}
    return p, s_z1_second, s_z2_second, merge_b, bridge


@dataclass
class ImmersionSpec:
    """Defaults realize the interleaved two-double-point pattern with
    resolution sizes delta_i = eps_i^2."""

    n: int = 5
    xi: tuple = (-0.6, -0.2, 0.2, 0.6)
    eps: tuple = (0.05, 0.05)
    delta: tuple = None
    curve: str = "figure8-default"
    profile: str = "scaled"  # or "raw" (the un-normalized bump)

    def __post_init__(self):
        if self.delta is None:
            self.delta = tuple(e * e for e in self.eps)
        if self.curve != "figure8-default":
            raise ValueError(f"unknown curve {self.curve!r}")
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError("ambient dimension must be odd and >= 3")

    @classmethod
    def from_json(cls, obj):
        return cls(
            n=obj.get("n", 5),
            xi=tuple(obj["xi"]) if "xi" in obj else (-0.6, -0.2, 0.2, 0.6),
            eps=tuple(obj.get("eps", (0.05, 0.05))),
            delta=tuple(obj["delta"]) if "delta" in obj else None,
            curve=obj.get("curve", "figure8-default"),
            profile=obj.get("profile", "scaled"),
        )

    def immersion(self):
        return Immersion(self)


def default_spec(n=5, eps=0.05):
    return ImmersionSpec(n=n, eps=(eps, eps))


class Immersion:
    """The planar immersed curve f: R -> R^n of an ImmersionSpec."""

    def __init__(self, spec):
        self.spec = spec
        self.n = spec.n
        if tuple(spec.xi) != (-0.6, -0.2, 0.2, 0.6):
            raise ValueError("the built-in curve realizes xi = (-0.6, -0.2, 0.2, 0.6)")
        path, s_z1b, s_z2b, merge_b, bridge = _build_default_path()
        self.path = path
        self.bridge = bridge
        s_merge = path.s0[-1] - 1.0  # trailing axis segment has length 1
        # time map: speed 1 on the axis and on +-0.05 plateaus around the
        # second passes; the detours in between run fast
        plateau = 0.05
        anchors = [
            (0.0, 1.0),
            (spec.xi[2] - plateau, s_z1b - plateau),
            (spec.xi[2] + plateau, s_z1b + plateau),
            (spec.xi[3] - plateau, s_z2b - plateau),
            (spec.xi[3] + plateau, s_z2b + plateau),
            (merge_b, s_merge),
        ]
        knots_t, knots_v = [anchors[0][0]], [1.0]
        plateau_speed = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
        for i in range(1, len(anchors)):
            t0, s0 = anchors[i - 1]
            t1, s1 = anchors[i]
            va, vb = plateau_speed[i - 1], plateau_speed[i]
            vm = 2.0 * (s1 - s0) / (t1 - t0) - (va + vb) / 2.0
            assert vm > 0, "time map infeasible"
            knots_t += [(t0 + t1) / 2.0, t1]
            knots_v += [vm, vb]
        self.sigma = SpeedMap(knots_t, knots_v)
        self._s_offset = 1.0  # sigma(0) = 0 maps to arc length 1 (end of the first axis run)
        self.z = [self.eval(np.array([spec.xi[0]]))[0], self.eval(np.array([spec.xi[1]]))[0]]

    def arclength(self, t):
        s, sp = self.sigma.eval(t)
        return s + self._s_offset, sp

    def _bridge_x1(self, s):
        c, w, h = self.bridge["center"], self.bridge["halfwidth"], self.bridge["height"]
        return h * bump((s - c) / w, 1.0, "scaled")

    def _bridge_x1_deriv(self, s):
        c, w, h = self.bridge["center"], self.bridge["halfwidth"], self.bridge["height"]
        return h * bump_deriv((s - c) / w, 1.0, "scaled") / w

    def eval(self, t):
        """f(t), vectorized: t shape (...,) -> (..., n)."""
        t = np.asarray(t, dtype=float)
        s, _ = self.arclength(t)
        pos, _ = self.path.eval(s)
        out = np.zeros(t.shape + (self.n,))
        out[..., 0] = self._bridge_x1(s)
        out[..., self.n - 2] = pos[..., 0]
        out[..., self.n - 1] = pos[..., 1]
        return out

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        s, sp = self.arclength(t)
        _, tan = self.path.eval(s)
        out = np.zeros(t.shape + (self.n,))
        out[..., 0] = self._bridge_x1_deriv(s) * sp
        out[..., self.n - 2] = tan[..., 0] * sp
        out[..., self.n - 1] = tan[..., 1] * sp
        return out

    def kernel_tables(self):
        """Raw arrays mirrored by the compiled kernel."""
        return {
            "piece_kind": np.ascontiguousarray(self.path.kind),
            "piece_s0": np.ascontiguousarray(self.path.s0),
            "piece_params": np.ascontiguousarray(self.path.params),
            "piece_rate": np.ascontiguousarray(self.path.rate),
            "sigma_t": np.ascontiguousarray(self.sigma.t),
            "sigma_v": np.ascontiguousarray(self.sigma.v),
            "sigma_s": np.ascontiguousarray(self.sigma.s + self._s_offset),
            "bridge": np.array(
                [self.bridge["center"], self.bridge["halfwidth"], self.bridge["height"]]
            ),
            "xi": np.asarray(self.spec.xi, dtype=float),
            "eps": np.asarray(self.spec.eps, dtype=float),
            "delta": np.asarray(self.spec.delta, dtype=float),
            "profile": np.int64(0 if self.spec.profile == "scaled" else 1),
            "n": np.int64(self.n),
        }


# --- bump profiles ------------------------------------------------------------


def bump(x, eps, profile="scaled"):
    """Window profile on |x| < 1 (x = (t - xi)/eps); 0 outside.

    scaled: exp(1 - 1/(1-x^2)), peak 1.
    raw:    exp(1/(eps^2 (x^2-1))), peak exp(-1/eps^2).
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = np.abs(x) < 1.0
    xi2 = x[inside] ** 2
    if profile == "scaled":
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi2))
    else:
        out[inside] = np.exp(-1.0 / (eps * eps * (1.0 - xi2)))
    return out


def bump_deriv(x, eps, profile="scaled"):
    """d/dx of the profile."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = np.abs(x) < 1.0
    xs = x[inside]
    one = 1.0 - xs * xs
    if profile == "scaled":
        out[inside] = np.exp(1.0 - 1.0 / one) * (-2.0 * xs / one**2)
    else:
        out[inside] = np.exp(-1.0 / (eps * eps * one)) * (-2.0 * xs / (eps * eps * one**2))
    return out


# --- knots ---------------------------------------------------------------------


class LongKnot:
    """Base: parametric embedding with f(t) = (0,...,0,t) for |t| >= 1."""

    def __init__(self, n):
        self.n = n

    def eval(self, t):
        raise NotImplementedError

    def deriv(self, t, h=1e-6):
        t = np.asarray(t, dtype=float)
        return (self.eval(t + h) - self.eval(t - h)) / (2 * h)


class AxisKnot(LongKnot):
    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.n,))
        out[..., self.n - 1] = t
        return out

    def deriv(self, t, h=None):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.n,))
        out[..., self.n - 1] = 1.0
        return out


class ResolvedKnot(LongKnot):
    """f(t) + sum_i delta_i u_i w_i(t) on the first-visit windows."""

    def __init__(self, immersion, u1, u2):
        super().__init__(immersion.n)
        self.immersion = immersion
        self.spec = immersion.spec
        self.u = [np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)]

    def displacement(self, t):
        t = np.asarray(t, dtype=float)
        spec = self.spec
        disp = np.zeros(t.shape + (self.n,))
        for i in (0, 1):
            w = bump((t - spec.xi[i]) / spec.eps[i], spec.eps[i], spec.profile)
            disp += spec.delta[i] * w[..., None] * self.u[i]
        return disp

    def eval(self, t):
        return self.immersion.eval(t) + self.displacement(t)

    def deriv(self, t, h=None):
        t = np.asarray(t, dtype=float)
        spec = self.spec
        out = self.immersion.deriv(t)
        for i in (0, 1):
            wp = bump_deriv((t - spec.xi[i]) / spec.eps[i], spec.eps[i], spec.profile) / spec.eps[i]
            out += spec.delta[i] * wp[..., None] * self.u[i]
        return out


def resolve(spec, u1, u2, immersion=None):
    """Resolution of the two double points along unit vectors u1, u2
    perpendicular to both strand tangents at the respective crossing."""
    imm = immersion if immersion is not None else spec.immersion()
    for label, u, (xa, xb) in (("u1", u1, (spec.xi[0], spec.xi[2])), ("u2", u2, (spec.xi[1], spec.xi[3]))):
        u = np.asarray(u, dtype=float)
        if u.shape != (spec.n,):
            raise NonUnitVector(f"{label} must be a vector in R^{spec.n}")
        if abs(np.linalg.norm(u) - 1.0) > 1e-9:
            raise NonUnitVector(f"{label} is not unit")
        for x in (xa, xb):
            tang = imm.deriv(np.array([x]))[0]
            if abs(np.dot(u, tang / np.linalg.norm(tang))) > 1e-12:
                raise NonPerpendicular(f"{label} not perpendicular to the strand at t={x}")
    return ResolvedKnot(imm, u1, u2)


def embed_sphere_vector(u, n):
    """A point of S^{n-3} (unit u in R^{n-2}) as a vector in R^n."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape[:-1] + (n,))
    out[..., : n - 2] = u
    return out


# --- clutching frame and the rotated cycle -------------------------------------


def clutching(s, u, n=5):
    """e'[s,u] = H_{x_{n-1}} H_{[s,u]} in SO(n-1), returned as an n x n
    matrix fixing the x_n-axis.  s is clamped to [-1, 1]; u is a unit
    vector in R^{n-2}."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise NonUnitVector("u must be unit in R^{n-2}")
    s = min(1.0, max(-1.0, float(s)))
    v = np.zeros(n)
    v[: n - 2] = math.sqrt(max(0.0, 1.0 - s * s)) * u
    v[n - 2] = s
    h_v = np.eye(n) - 2.0 * np.outer(v, v)
    h_x = np.eye(n)
    h_x[n - 2, n - 2] = -1.0
    return h_x @ h_v


def lambda_point(s, u0, u1, u2, t, tau=0.0, spec=None, immersion=None):
    """The rotated-resolution family:

    Lambda'_tau([s,u0], u1, u2)(t)
        = e[(2-tau) s + (1-tau) p(v(t)), u0] . v(t),

    with v = resolve(u1, u2) and p the last-coordinate projection.
    tau=0 is the raw family, tau=1 the rigid rotation."""
    spec = spec if spec is not None else default_spec()
    imm = immersion if immersion is not None else spec.immersion()
    knot = resolve(spec, u1, u2, immersion=imm)
    t = np.asarray(t, dtype=float)
    pts = knot.eval(t)
    arg = (2.0 - tau) * s + (1.0 - tau) * pts[..., spec.n - 1]
    out = np.empty_like(pts)
    flat_pts = pts.reshape(-1, spec.n)
    flat_arg = np.ravel(np.broadcast_to(arg, pts.shape[:-1]))
    for i in range(flat_pts.shape[0]):
        out.reshape(-1, spec.n)[i] = clutching(flat_arg[i], u0, spec.n) @ flat_pts[i]
    return out


class LambdaKnot(LongKnot):
    """One member of the Lambda family, as a LongKnot."""

    def __init__(self, s, u0, u1, u2, tau=0.0, spec=None, immersion=None):
        spec = spec if spec is not None else default_spec()
        super().__init__(spec.n)
        self.spec = spec
        self.immersion = immersion if immersion is not None else spec.immersion()
        self.s, self.u0, self.tau = s, np.asarray(u0, dtype=float), tau
        self.base = resolve(spec, u1, u2, immersion=self.immersion)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        pts = self.base.eval(t)
        arg = (2.0 - self.tau) * self.s + (1.0 - self.tau) * pts[..., self.n - 1]
        out = np.empty_like(pts)
        flat = pts.reshape(-1, self.n)
        farg = np.ravel(np.broadcast_to(arg, pts.shape[:-1]))
        res = out.reshape(-1, self.n)
        for i in range(flat.shape[0]):
            res[i] = clutching(farg[i], self.u0, self.n) @ flat[i]
        return out


# --- framed knots and the little-balls action ----------------------------------


class FramedKnot:
    """Reduced model: core curve plus a frame loop in SO(n-1), both trivial
    outside [-1, 1].  The frame is a callable t -> (..., n, n) fixing e_n."""

    def __init__(self, core, frame=None):
        self.core = core
        self.n = core.n
        self.frame = frame if frame is not None else _identity_frame(core.n)

    def eval(self, t):
        return self.core.eval(t)


def _identity_frame(n):
    def frame(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.eye(n), t.shape + (n, n)).copy()

    return frame


def trivial_framed_knot(n=5):
    return FramedKnot(AxisKnot(n))


@dataclass(frozen=True)
class LittleBall:
    """b(x) = r (x - p) mapping B^m into B^m."""

    p: tuple
    r: float

    def __post_init__(self):
        if not (0 < self.r <= 1.0):
            raise ValueError("radius must be in (0, 1]")
        if np.linalg.norm(self.p) > 1.0 + 1e-12:
            raise ValueError("center must lie in the unit ball")

    def center_image(self):
        return -self.r * np.asarray(self.p, dtype=float)

    def t_b(self):
        """min y-coordinate of the image ball (2-balls only)."""
        return float(self.center_image()[1] - self.r)

    def interval(self):
        """(a, c): the 1-ball l(t) = a t + c from the first-coordinate projection."""
        return self.r, float(self.center_image()[0])


class _ReparamKnot(LongKnot):
    def __init__(self, inner, a, c):
        super().__init__(inner.n)
        self.inner, self.a, self.c = inner, a, c

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        pts = self.inner.eval((t - self.c) / self.a)
        out = pts.copy()
        out[..., self.n - 1] = self.a * pts[..., self.n - 1] + self.c
        return out


def reparam(ball_or_ac, fk):
    """mu_l: squeeze a framed knot into the sub-interval of a little 1-ball."""
    if isinstance(ball_or_ac, LittleBall):
        a, c = ball_or_ac.interval()
    else:
        a, c = ball_or_ac
    if not (0 < a <= 1):
        raise ValueError("1-ball scale must be in (0, 1]")
    core = _ReparamKnot(fk.core, a, c)
    inner_frame = fk.frame

    def frame(t):
        return inner_frame((np.asarray(t, dtype=float) - c) / a)

    return FramedKnot(core, frame)


class _ComposedKnot(LongKnot):
    """Graph-tube composition: apply the outer knot's (curve, frame) model to
    the inner knot's points."""

    def __init__(self, outer, inner):
        super().__init__(outer.n)
        self.outer, self.inner = outer, inner

    def eval(self, t):
        n = self.n
        pts2 = self.inner.core.eval(t)
        s = pts2[..., n - 1]
        pts1 = self.outer.core.eval(s)
        frames1 = self.outer.frame(s)
        perp = pts2.copy()
        perp[..., n - 1] = 0.0
        rotated = np.einsum("...ij,...j->...i", frames1, perp)
        out = rotated + pts1
        out[..., n - 1] = pts1[..., n - 1]
        return out


def compose(f1, f2):
    """Composition of framed knots in the curve+frame model."""
    core = _ComposedKnot(f1, f2)
    frame1, frame2 = f1.frame, f2.frame
    inner_core = f2.core
    n = f1.n

    def frame(t):
        s = inner_core.eval(t)[..., n - 1]
        return np.einsum("...ij,...jk->...ik", frame1(s), frame2(t))

    return FramedKnot(core, frame)


def operad_act(balls, knots):
    """kappa(k): order by t_b, squeeze each knot into its projected 1-ball,
    and compose."""
    if len(balls) != len(knots):
        raise ValueError("need one knot per ball")
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            ci, cj = balls[i].center_image(), balls[j].center_image()
            if np.linalg.norm(ci - cj) < balls[i].r + balls[j].r - 1e-12:
                raise OverlappingBalls(f"balls {i} and {j} overlap")
    order = sorted(range(len(balls)), key=lambda i: balls[i].t_b())
    squeezed = [reparam(balls[i], knots[i]) for i in order]
    out = squeezed[0]
    for nxt in squeezed[1:]:
        out = compose(out, nxt)
    return out
