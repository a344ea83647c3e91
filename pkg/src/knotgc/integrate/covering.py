"""Two-fold covering check for the frame-times-sphere Gauss map.

F([s,u], P1, (P4, P3)) = (e[s,u] (P1-p3)/|P1-p3|, e[s,u] (P1-p4)/|P1-p4|)

with P1 on the sphere M = {|x| = 1, x_{n-1} = 0}, p_i = P_i e_{n-1} on the
x_{n-1}-axis, and e[s,u] the clutching rotation.  For targets (v3, v4)
with (v3)_n (v4)_n > 0 and v3 != v4 the preimage is solved in closed
form: the frame must carry the axis onto l = span(v3, v4) ∩ {x_n = 0},
the sphere point is picked by the sign of (v3)_n, and the two axis points
follow; the suspension coordinates [s,u] and [-s,-u] give the same
rotation, hence exactly two preimages.
"""

from __future__ import annotations

import numpy as np

from knotgc.errors import OnDiagonal, OutsideA
from knotgc.geometry import clutching
from knotgc.integrate.core import chunk_rng
from knotgc._kernels.fallback import oriented_frames


def _rotation_from_suspension(sigma, n):
    """e'[s,u] from the embedded suspension point sigma in R^{n-1}."""
    v = np.zeros(n)
    v[: n - 1] = sigma
    h_v = np.eye(n) - 2.0 * np.outer(v, v)
    h_v[n - 2, :] *= -1.0
    return h_v


def _forward(sigma, p1, p4, p3, n):
    rot = _rotation_from_suspension(sigma, n)
    e_axis = np.zeros(n)
    e_axis[n - 2] = 1.0
    w3 = p1 - p3 * e_axis
    w4 = p1 - p4 * e_axis
    return (
        rot @ (w3 / np.linalg.norm(w3)),
        rot @ (w4 / np.linalg.norm(w4)),
    )


def covering_check(v3, v4, n=5, fd_step=1e-6):
    """Solve F(pre) = (v3, v4) and report the preimages.

    Returns a dict with the two preimages, their forward residuals, and
    the signs of det dF in oriented local frames at each.
    """
    v3 = np.asarray(v3, dtype=float)
    v4 = np.asarray(v4, dtype=float)
    if v3[n - 1] * v4[n - 1] <= 0:
        raise OutsideA("(v3)_n (v4)_n <= 0")
    if np.linalg.norm(v3 - v4) < 1e-12:
        raise OnDiagonal("v3 == v4")

    w = v4[n - 1] * v3 - v3[n - 1] * v4  # direction of l = H ∩ {x_n = 0}
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        raise OnDiagonal("v3 and v4 are parallel")
    w_hat = w / nw
    n_hat = v3 - np.dot(v3, w_hat) * w_hat
    n_hat /= np.linalg.norm(n_hat)

    preimages = []
    for rho in (1.0, -1.0):
        tau = rho * w_hat  # wanted image of the axis direction
        s2 = (1.0 + tau[n - 2]) / 2.0
        s = np.sqrt(max(0.0, s2))
        denom = 2.0 * s * np.sqrt(max(0.0, 1.0 - s2))
        if denom < 1e-14:
            u = np.zeros(n - 2)
            u[0] = 1.0
        else:
            u = -tau[: n - 2] / denom
        rot = clutching(min(1.0, max(-1.0, s)), u, n)
        sign_q = 1.0 if v3[n - 1] * n_hat[n - 1] > 0 else -1.0
        q = sign_q * n_hat
        r3 = sign_q / np.dot(v3, n_hat)
        r4 = sign_q / np.dot(v4, n_hat)
        if r3 <= 0 or r4 <= 0:
            continue
        p3 = rho * np.dot(q - r3 * v3, w_hat)
        p4 = rho * np.dot(q - r4 * v4, w_hat)
        if not p4 < p3:
            continue
        p1 = rot.T @ q
        sigma = np.zeros(n - 1)
        sigma[: n - 2] = np.sqrt(max(0.0, 1.0 - s * s)) * u
        sigma[n - 2] = s
        for flip in (1.0, -1.0):
            out3, out4 = _forward(flip * sigma, p1, p4, p3, n)
            res = max(np.linalg.norm(out3 - v3), np.linalg.norm(out4 - v4))
            preimages.append(
                {
                    "sigma": flip * sigma,
                    "P1": p1,
                    "P4": p4,
                    "P3": p3,
                    "residual": float(res),
                    "det_sign": _det_sign(flip * sigma, p1, p4, p3, v3, v4, n, fd_step),
                }
            )
    return {
        "count": len(preimages),
        "preimages": preimages,
        "signs_agree": len({p["det_sign"] for p in preimages}) == 1 if preimages else False,
    }


def _det_sign(sigma, p1, p4, p3, v3, v4, n, h):
    """Sign of det dF in oriented orthonormal frames (suspension sphere,
    M-sphere, axis coordinates) -> (frames at v3, v4)."""
    fr_sigma = oriented_frames(sigma[None, :])[0]  # (n-2, n-1)
    # M lives in the hyperplane x_{n-1} = 0: drop that coordinate
    keep = [i for i in range(n) if i != n - 2]
    p1_red = p1[keep]
    fr_m_red = oriented_frames(p1_red[None, :])[0]  # (n-2, n-1)
    fr3 = oriented_frames(v3[None, :])[0]  # (n-1, n)
    fr4 = oriented_frames(v4[None, :])[0]

    d = 2 * (n - 1)
    jac = np.zeros((d, d))
    col = 0

    def project(out3, out4):
        return np.concatenate([fr3 @ out3, fr4 @ out4])

    def diff(plus, minus):
        return (project(*plus) - project(*minus)) / (2.0 * h)

    for j in range(n - 2):
        sp = sigma + h * fr_sigma[j]
        sm = sigma - h * fr_sigma[j]
        sp /= np.linalg.norm(sp)
        sm /= np.linalg.norm(sm)
        jac[:, col] = diff(_forward(sp, p1, p4, p3, n), _forward(sm, p1, p4, p3, n))
        col += 1
    for j in range(n - 2):
        qp_red = p1_red + h * fr_m_red[j]
        qm_red = p1_red - h * fr_m_red[j]
        qp_red /= np.linalg.norm(qp_red)
        qm_red /= np.linalg.norm(qm_red)
        qp = np.zeros(n)
        qm = np.zeros(n)
        qp[keep] = qp_red
        qm[keep] = qm_red
        jac[:, col] = diff(_forward(sigma, qp, p4, p3, n), _forward(sigma, qm, p4, p3, n))
        col += 1
    jac[:, col] = diff(
        _forward(sigma, p1, p4 + h, p3, n), _forward(sigma, p1, p4 - h, p3, n)
    )
    col += 1
    jac[:, col] = diff(
        _forward(sigma, p1, p4, p3 + h, n), _forward(sigma, p1, p4, p3 - h, n)
    )
    det = np.linalg.det(jac)
    return 1 if det > 0 else (-1 if det < 0 else 0)


def covering_trials(trials=100, n=5, seed=1, residual_tol=1e-8):
    """Random targets in Int A minus the diagonal; checks two preimages,
    small residuals, and matching orientation signs for each."""
    rng = chunk_rng(seed, 0)
    results = []
    ok = 0
    for _ in range(trials):
        while True:
            v3 = rng.standard_normal(n)
            v3 /= np.linalg.norm(v3)
            v4 = rng.standard_normal(n)
            v4 /= np.linalg.norm(v4)
            if v3[n - 1] * v4[n - 1] > 1e-6 and np.linalg.norm(v3 - v4) > 1e-3:
                break
        rep = covering_check(v3, v4, n=n)
        good = (
            rep["count"] == 2
            and all(p["residual"] < residual_tol for p in rep["preimages"])
            and rep["signs_agree"]
        )
        ok += int(good)
        results.append(
            {
                "count": rep["count"],
                "max_residual": max((p["residual"] for p in rep["preimages"]), default=float("inf")),
                "signs_agree": rep["signs_agree"],
                "ok": good,
            }
        )
    return {"trials": trials, "ok": ok, "all_ok": ok == trials, "results": results}
