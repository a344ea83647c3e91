"""Pure-numpy evaluation of the Monte-Carlo integrands.

Both backends implement the same contract:

  pairing_integrand(job, dom) -> (N,) values
  linking_integrand(job, dom) -> (N,) values

``job`` is a dict of plain numpy arrays/ints describing the graph term,
the cycle, and the immersion geometry (see ``knotgc.integrate.jobs``);
``dom`` holds one batch of domain samples.  Values are the pullback
density of the product of normalized sphere volume forms at each sample;
all sampling weights are applied by the caller.

Jacobians are central finite differences along orthonormal tangent
frames, projected on oriented orthonormal frames of each target sphere.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "fallback"


def sphere_area(m):
    """Surface area of the unit sphere S^{m-1} in R^m."""
    from math import gamma, pi

    return 2.0 * pi ** (m / 2.0) / gamma(m / 2.0)


def oriented_frames(u):
    """Orthonormal tangent frames at unit vectors u: (..., m) -> (..., m-1, m).

    det[u, f_1, ..., f_{m-1}] = +1 for every input (orientation: outward
    normal first).  Built from the Householder reflection exchanging u and
    -sign(u_1) e_1.
    """
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    s = np.where(u[..., 0] >= 0.0, 1.0, -1.0)
    w = u.copy()
    w[..., 0] += s
    wn = w / np.linalg.norm(w, axis=-1, keepdims=True)
    # rows j = 1..m-1 of H = I - 2 w w^T
    frames = np.zeros(u.shape[:-1] + (m - 1, m))
    for j in range(1, m):
        frames[..., j - 1, :] = -2.0 * wn[..., j, None] * wn
        frames[..., j - 1, j] += 1.0
    frames[..., m - 2, :] *= s[..., None]
    return frames


def _bump(x, eps, profile):
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xs = x[inside]
    one = 1.0 - xs * xs
    if profile == 0:
        out[inside] = np.exp(1.0 - 1.0 / one)
    else:
        out[inside] = np.exp(-1.0 / (eps * eps * one))
    return out


def _bump_deriv(x, eps, profile):
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xs = x[inside]
    one = 1.0 - xs * xs
    if profile == 0:
        out[inside] = np.exp(1.0 - 1.0 / one) * (-2.0 * xs / one**2)
    else:
        out[inside] = np.exp(-1.0 / (eps * eps * one)) * (-2.0 * xs / (eps * eps * one**2))
    return out


def _sigma_eval(job, t):
    kt, kv, ks = job["sigma_t"], job["sigma_v"], job["sigma_s"]
    s = np.empty_like(t)
    sp = np.empty_like(t)
    below = t <= kt[0]
    above = t >= kt[-1]
    mid = ~(below | above)
    s[below] = ks[0] + (t[below] - kt[0])
    sp[below] = 1.0
    s[above] = ks[-1] + (t[above] - kt[-1])
    sp[above] = 1.0
    if np.any(mid):
        i = np.clip(np.searchsorted(kt, t[mid], side="right") - 1, 0, len(kt) - 2)
        dt = t[mid] - kt[i]
        slope = (kv[i + 1] - kv[i]) / (kt[i + 1] - kt[i])
        sp[mid] = kv[i] + slope * dt
        s[mid] = ks[i] + kv[i] * dt + 0.5 * slope * dt * dt
    return s, sp


def _path_eval(job, s):
    kind, s0, params, rate = job["piece_kind"], job["piece_s0"], job["piece_params"], job["piece_rate"]
    idx = np.clip(np.searchsorted(s0, s, side="right") - 1, 0, len(kind) - 1)
    ds = s - s0[idx]
    pos = np.empty(s.shape + (2,))
    tan = np.empty(s.shape + (2,))
    seg = kind[idx] == 0
    if np.any(seg):
        p = params[idx[seg]]
        pos[seg, 0] = p[:, 0] + p[:, 2] * ds[seg]
        pos[seg, 1] = p[:, 1] + p[:, 3] * ds[seg]
        tan[seg, 0] = p[:, 2]
        tan[seg, 1] = p[:, 3]
    arc = ~seg
    if np.any(arc):
        p = params[idx[arc]]
        w = rate[idx[arc]]
        al = p[:, 3] + w * ds[arc]
        pos[arc, 0] = p[:, 0] + p[:, 2] * np.cos(al)
        pos[arc, 1] = p[:, 1] + p[:, 2] * np.sin(al)
        sw = np.sign(w)
        tan[arc, 0] = -np.sin(al) * sw
        tan[arc, 1] = np.cos(al) * sw
    return pos, tan


def knot_eval(job, t, u1, u2, want_deriv=False):
    """Resolved knot positions (and optionally derivatives).

    t: (...,); u1, u2: (..., n-2) unit direction blocks broadcastable
    against t's shape; returns (..., n).
    """
    n = int(job["n"])
    profile = int(job["profile"])
    s, sp = _sigma_eval(job, t)
    pos, tan = _path_eval(job, s)
    bc, bw, bh = job["bridge"]
    xb = bh * _bump((s - bc) / bw, 1.0, 0)
    out = np.zeros(t.shape + (n,))
    out[..., 0] = xb
    out[..., n - 2] = pos[..., 0]
    out[..., n - 1] = pos[..., 1]
    xi, eps, delta = job["xi"], job["eps"], job["delta"]
    for i in (0, 1):
        w = _bump((t - xi[i]) / eps[i], eps[i], profile)
        u = u1 if i == 0 else u2
        out[..., : n - 2] += delta[i] * w[..., None] * u
    if not want_deriv:
        return out
    der = np.zeros(t.shape + (n,))
    der[..., 0] = bh * _bump_deriv((s - bc) / bw, 1.0, 0) / bw * sp
    der[..., n - 2] = tan[..., 0] * sp
    der[..., n - 1] = tan[..., 1] * sp
    for i in (0, 1):
        wp = _bump_deriv((t - xi[i]) / eps[i], eps[i], profile) / eps[i]
        u = u1 if i == 0 else u2
        der[..., : n - 2] += delta[i] * wp[..., None] * u
    return out, der


def _clutching_batch(s, u0, n):
    """e'[s, u0] as (..., n, n) matrices; s clamped to [-1, 1]."""
    s = np.clip(s, -1.0, 1.0)
    v = np.zeros(s.shape + (n,))
    v[..., : n - 2] = np.sqrt(np.maximum(0.0, 1.0 - s * s))[..., None] * u0
    v[..., n - 2] = s
    eye = np.broadcast_to(np.eye(n), s.shape + (n, n)).copy()
    h_v = eye - 2.0 * v[..., :, None] * v[..., None, :]
    h_v[..., n - 2, :] *= -1.0  # apply H_{x_{n-1}} on the left
    return h_v


def _phi_stack(job, dom_struct):
    """Evaluate the e sphere-valued components for one stack of
    configurations.  dom_struct: dict with broadcast-ready arrays."""
    n = int(job["n"])
    vi = int(job["vi"])
    edges = job["edges"]
    loops = job["loops"]
    t = dom_struct["t"]  # (..., vi)
    x = dom_struct["x"]  # (..., vf, n)
    u1 = dom_struct["u1"]  # (..., n-2)
    u2 = dom_struct["u2"]

    shape = t.shape[:-1] if vi else x.shape[:-2]
    need_d = len(loops) > 0
    if vi:
        tt = t.reshape(shape + (vi,))
        uu1 = np.broadcast_to(u1[..., None, :], shape + (vi, n - 2))
        uu2 = np.broadcast_to(u2[..., None, :], shape + (vi, n - 2))
        if need_d:
            kp, kd = knot_eval(job, tt, uu1, uu2, want_deriv=True)
        else:
            kp = knot_eval(job, tt, uu1, uu2)
            kd = None
        if int(job["cycle"]) == 1:
            rot = _clutching_batch(dom_struct["s"], dom_struct["u0"], n)
            kp = np.einsum("...ij,...kj->...ki", rot, kp)
            if kd is not None:
                kd = np.einsum("...ij,...kj->...ki", rot, kd)
    else:
        kp = kd = None

    points = np.empty(shape + (vi + x.shape[-2], n))
    if vi:
        points[..., :vi, :] = kp
    if x.shape[-2]:
        points[..., vi:, :] = x

    e_total = len(edges) + len(loops)
    phis = np.empty(shape + (e_total, n))
    m = 0
    for a, b in edges:
        w = points[..., a - 1, :] - points[..., b - 1, :]
        phis[..., m, :] = w / np.linalg.norm(w, axis=-1, keepdims=True)
        m += 1
    for v in loops:
        w = kd[..., v - 1, :]
        phis[..., m, :] = w / np.linalg.norm(w, axis=-1, keepdims=True)
        m += 1
    return phis


def pairing_integrand(job, dom, num_threads=1):
    """Pullback density of the normalized product volume form for one
    graph term against the alpha or lambda cycle.

    dom: u1, u2: (N, n-2); t: (N, vi) sorted; x: (N, vf, n);
    lambda cycle additionally s: (N,), u0: (N, n-2).
    """
    n = int(job["n"])
    vi = int(job["vi"])
    vf = int(job["vf"])
    is_lambda = int(job["cycle"]) == 1
    h = float(job["fd_step"])
    edges = job["edges"]
    loops = job["loops"]
    e_total = len(edges) + len(loops)

    u1, u2, t, x = dom["u1"], dom["u2"], dom["t"], dom["x"]
    N = u1.shape[0]
    d = 2 * (n - 3) + (n - 2 if is_lambda else 0) + vi + n * vf
    assert d == (n - 1) * e_total, "dimension balance violated"

    f1 = oriented_frames(u1)  # (N, n-3, n-2)
    f2 = oriented_frames(u2)
    if is_lambda:
        f0 = oriented_frames(dom["u0"])

    M = 2 * d

    def expand(arr):
        return np.repeat(arr[:, None, ...], M, axis=1)

    U1, U2, T, X = expand(u1), expand(u2), expand(t), expand(x)
    if is_lambda:
        S, U0 = expand(dom["s"]), expand(dom["u0"])

    col = 0

    def slot(sign_idx):
        # evaluation copies are interleaved: column c uses copies 2c (plus), 2c+1 (minus)
        return 2 * col + sign_idx

    for j in range(n - 3):  # u1 tangent directions
        for sgn, idx in ((+1, 0), (-1, 1)):
            v = u1 + sgn * h * f1[:, j]
            U1[:, slot(idx)] = v / np.linalg.norm(v, axis=-1, keepdims=True)
        col += 1
    for j in range(n - 3):
        for sgn, idx in ((+1, 0), (-1, 1)):
            v = u2 + sgn * h * f2[:, j]
            U2[:, slot(idx)] = v / np.linalg.norm(v, axis=-1, keepdims=True)
        col += 1
    if is_lambda:
        S[:, slot(0)] = dom["s"] + h
        S[:, slot(1)] = dom["s"] - h
        col += 1
        for j in range(n - 3):
            for sgn, idx in ((+1, 0), (-1, 1)):
                v = dom["u0"] + sgn * h * f0[:, j]
                U0[:, slot(idx)] = v / np.linalg.norm(v, axis=-1, keepdims=True)
            col += 1
    for m in range(vi):
        T[:, slot(0), m] += h
        T[:, slot(1), m] -= h
        col += 1
    for j in range(vf):
        for axis in range(n):
            X[:, slot(0), j, axis] += h
            X[:, slot(1), j, axis] -= h
            col += 1
    assert col == d

    struct = {"u1": U1, "u2": U2, "t": T, "x": X}
    if is_lambda:
        struct["s"] = S
        struct["u0"] = U0
    phis = _phi_stack(job, struct)  # (N, M, e, n)

    base_struct = {"u1": u1, "u2": u2, "t": t, "x": x}
    if is_lambda:
        base_struct["s"] = dom["s"]
        base_struct["u0"] = dom["u0"]
    phi0 = _phi_stack(job, base_struct)  # (N, e, n)
    frames = oriented_frames(phi0.reshape(-1, n)).reshape(N, e_total, n - 1, n)

    diff = (phis[:, 0::2] - phis[:, 1::2]) / (2.0 * h)  # (N, d, e, n)
    # J[s, (m, a), c] = frames[s, m, a, :] . diff[s, c, m, :]
    jac = np.einsum("nmai,ncmi->nmac", frames, diff).reshape(N, d, d)
    jac = np.nan_to_num(jac, nan=0.0, posinf=0.0, neginf=0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dets = np.linalg.det(jac)
    # coincident configuration points give singular data on a null set
    dets = np.nan_to_num(dets, nan=0.0, posinf=0.0, neginf=0.0)
    return dets / sphere_area(n) ** e_total


def _eval_preset_cycle(job, which, t, u):
    """Point on a preset cycle.  t: (...,) interval parameter; u: (..., m)
    sphere parameter or None."""
    kind = int(job[f"cycle_{which}_kind"])
    n = int(job["n"])
    if kind == 0:  # resolution sphere i: (t, u) -> f(t) + delta_i w_i(t) u
        i = int(job[f"cycle_{which}_index"])
        zero = np.zeros(t.shape + (n - 2,))
        return knot_eval(job, t, u if i == 0 else zero, u if i == 1 else zero)
    if kind == 1:  # undisplaced segment
        zero = np.zeros(t.shape + (n - 2,))
        return knot_eval(job, t, zero, zero)
    if kind == 2:  # circle: data = center(n), axis1(n), axis2(n), radius
        data = job[f"cycle_{which}_data"]
        c, e1, e2, r = data[:n], data[n : 2 * n], data[2 * n : 3 * n], data[3 * n]
        return c + r * (np.cos(t)[..., None] * e1 + np.sin(t)[..., None] * e2)
    raise ValueError(f"unknown cycle kind {kind}")


def linking_integrand(job, dom, num_threads=1):
    """Gauss-map pullback density for a product of two preset cycles.

    dom: ta: (N,), ua: (N, m) or None, tb: (N,), ub: (N, m) or None.
    Column order: [A interval, A sphere dirs, B interval, B sphere dirs].
    """
    n = int(job["n"])
    h = float(job["fd_step"])
    ta, tb = dom["ta"], dom["tb"]
    ua, ub = dom.get("ua"), dom.get("ub")
    N = ta.shape[0]
    d = n - 1

    def cols_for(which, t, u):
        """List of (t_plus, u_plus, t_minus, u_minus) per column."""
        out = [(t + h, u, t - h, u)]
        if u is not None:
            fr = oriented_frames(u)
            for j in range(fr.shape[1]):
                vp = u + h * fr[:, j]
                vm = u - h * fr[:, j]
                vp /= np.linalg.norm(vp, axis=-1, keepdims=True)
                vm /= np.linalg.norm(vm, axis=-1, keepdims=True)
                out.append((t, vp, t, vm))
        return out

    A0 = _eval_preset_cycle(job, "a", ta, ua)
    B0 = _eval_preset_cycle(job, "b", tb, ub)
    w0 = A0 - B0
    phi0 = w0 / np.linalg.norm(w0, axis=-1, keepdims=True)
    frames = oriented_frames(phi0)  # (N, n-1, n)

    jac = np.empty((N, n - 1, d))
    c = 0
    for tp, up, tm, um in cols_for("a", ta, ua):
        Ap = _eval_preset_cycle(job, "a", tp, up)
        Am = _eval_preset_cycle(job, "a", tm, um)
        dphi = _phi_diff(Ap, Am, B0, B0, h)
        jac[:, :, c] = np.einsum("nai,ni->na", frames, dphi)
        c += 1
    for tp, up, tm, um in cols_for("b", tb, ub):
        Bp = _eval_preset_cycle(job, "b", tp, up)
        Bm = _eval_preset_cycle(job, "b", tm, um)
        dphi = _phi_diff(A0, A0, Bp, Bm, h)
        jac[:, :, c] = np.einsum("nai,ni->na", frames, dphi)
        c += 1
    assert c == d
    jac = np.nan_to_num(jac, nan=0.0, posinf=0.0, neginf=0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dets = np.linalg.det(jac)
    dets = np.nan_to_num(dets, nan=0.0, posinf=0.0, neginf=0.0)
    return dets / sphere_area(n)


def _phi_diff(Ap, Am, Bp, Bm, h):
    wp = Ap - Bp
    wm = Am - Bm
    fp = wp / np.linalg.norm(wp, axis=-1, keepdims=True)
    fm = wm / np.linalg.norm(wm, axis=-1, keepdims=True)
    return (fp - fm) / (2.0 * h)
