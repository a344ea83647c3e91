# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte-Carlo integrand kernels.

Mirrors knotgc._kernels.fallback exactly (same job/dom contract, same
column ordering and frame conventions); the per-sample loops run in C
with stack buffers.
"""

import numpy as np

cimport numpy as cnp
cimport openmp
from cython.parallel cimport prange
from libc.math cimport cos, exp, fabs, sin, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

DEF NMAX = 8        # ambient dimension bound
DEF EMAX = 8        # edges + loops bound
DEF VIMAX = 12      # interval vertices bound
DEF VFMAX = 6       # free vertices bound
DEF DMAX = 32       # Jacobian size bound


def sphere_area(m):
    from math import gamma, pi

    return 2.0 * pi ** (m / 2.0) / gamma(m / 2.0)


cdef class Tables:
    """Geometry and graph data unpacked from a job dict."""

    cdef double[::1] piece_s0, piece_rate, sigma_t, sigma_v, sigma_s
    cdef double[:, ::1] piece_params
    cdef long[::1] piece_kind
    cdef double bridge_c, bridge_w, bridge_h
    cdef double xi[4]
    cdef double eps[2]
    cdef double delta[2]
    cdef int profile, n, npieces, nsigma
    cdef int vi, vf, ne, nl, cycle
    cdef long[:, ::1] edges
    cdef long[::1] loops
    cdef double fd_step
    cdef int has_geometry

    def __init__(self, job, need_graph):
        self.n = int(job["n"])
        self.fd_step = float(job.get("fd_step", 1e-5))
        self.has_geometry = 1 if "piece_kind" in job else 0
        if self.has_geometry:
            self.piece_kind = np.ascontiguousarray(job["piece_kind"], dtype=np.int64)
            self.piece_s0 = np.ascontiguousarray(job["piece_s0"], dtype=np.float64)
            self.piece_params = np.ascontiguousarray(job["piece_params"], dtype=np.float64)
            self.piece_rate = np.ascontiguousarray(job["piece_rate"], dtype=np.float64)
            self.sigma_t = np.ascontiguousarray(job["sigma_t"], dtype=np.float64)
            self.sigma_v = np.ascontiguousarray(job["sigma_v"], dtype=np.float64)
            self.sigma_s = np.ascontiguousarray(job["sigma_s"], dtype=np.float64)
            br = job["bridge"]
            self.bridge_c, self.bridge_w, self.bridge_h = br[0], br[1], br[2]
            for i in range(4):
                self.xi[i] = job["xi"][i]
            for i in range(2):
                self.eps[i] = job["eps"][i]
                self.delta[i] = job["delta"][i]
            self.profile = int(job["profile"])
            self.npieces = self.piece_kind.shape[0]
            self.nsigma = self.sigma_t.shape[0]
        if need_graph:
            self.vi = int(job["vi"])
            self.vf = int(job["vf"])
            self.cycle = int(job["cycle"])
            self.edges = np.ascontiguousarray(job["edges"], dtype=np.int64).reshape(-1, 2)
            self.loops = np.ascontiguousarray(job["loops"], dtype=np.int64)
            self.ne = self.edges.shape[0]
            self.nl = self.loops.shape[0]

    # --- geometry ------------------------------------------------------------

    cdef void sigma_eval(self, double t, double* s, double* sp) noexcept nogil:
        cdef int k = self.nsigma
        cdef int i
        cdef double dt, slope
        if t <= self.sigma_t[0]:
            s[0] = self.sigma_s[0] + (t - self.sigma_t[0])
            sp[0] = 1.0
            return
        if t >= self.sigma_t[k - 1]:
            s[0] = self.sigma_s[k - 1] + (t - self.sigma_t[k - 1])
            sp[0] = 1.0
            return
        i = 0
        while i < k - 2 and t >= self.sigma_t[i + 1]:
            i += 1
        dt = t - self.sigma_t[i]
        slope = (self.sigma_v[i + 1] - self.sigma_v[i]) / (self.sigma_t[i + 1] - self.sigma_t[i])
        sp[0] = self.sigma_v[i] + slope * dt
        s[0] = self.sigma_s[i] + self.sigma_v[i] * dt + 0.5 * slope * dt * dt

    cdef void path_eval(self, double s, double* pos, double* tan) noexcept nogil:
        cdef int i = 0
        cdef double ds, al, sw
        while i < self.npieces - 1 and s >= self.piece_s0[i + 1]:
            i += 1
        ds = s - self.piece_s0[i]
        if self.piece_kind[i] == 0:
            pos[0] = self.piece_params[i, 0] + self.piece_params[i, 2] * ds
            pos[1] = self.piece_params[i, 1] + self.piece_params[i, 3] * ds
            tan[0] = self.piece_params[i, 2]
            tan[1] = self.piece_params[i, 3]
        else:
            al = self.piece_params[i, 3] + self.piece_rate[i] * ds
            pos[0] = self.piece_params[i, 0] + self.piece_params[i, 2] * cos(al)
            pos[1] = self.piece_params[i, 1] + self.piece_params[i, 2] * sin(al)
            sw = 1.0 if self.piece_rate[i] > 0 else -1.0
            tan[0] = -sin(al) * sw
            tan[1] = cos(al) * sw

    cdef double bump(self, double x, double eps) noexcept nogil:
        cdef double one
        if fabs(x) >= 1.0:
            return 0.0
        one = 1.0 - x * x
        if self.profile == 0:
            return exp(1.0 - 1.0 / one)
        return exp(-1.0 / (eps * eps * one))

    cdef double bump_d(self, double x, double eps) noexcept nogil:
        cdef double one
        if fabs(x) >= 1.0:
            return 0.0
        one = 1.0 - x * x
        if self.profile == 0:
            return exp(1.0 - 1.0 / one) * (-2.0 * x / (one * one))
        return exp(-1.0 / (eps * eps * one)) * (-2.0 * x / (eps * eps * one * one))

    cdef void knot_eval(self, double t, double* u1, double* u2,
                        double* out, double* der, bint want_der) noexcept nogil:
        """Resolved knot point (and derivative if want_der)."""
        cdef double s, sp, w, wp, xarg
        cdef double pos[2]
        cdef double tan[2]
        cdef int n = self.n
        cdef int i, j
        cdef double* u
        self.sigma_eval(t, &s, &sp)
        self.path_eval(s, pos, tan)
        for j in range(n):
            out[j] = 0.0
        xarg = (s - self.bridge_c) / self.bridge_w
        out[0] = self.bridge_h * self.bump(xarg, 1.0)
        out[n - 2] = pos[0]
        out[n - 1] = pos[1]
        for i in range(2):
            w = self.bump((t - self.xi[i]) / self.eps[i], self.eps[i])
            if w != 0.0:
                u = u1 if i == 0 else u2
                for j in range(n - 2):
                    out[j] += self.delta[i] * w * u[j]
        if want_der:
            for j in range(n):
                der[j] = 0.0
            der[0] = self.bridge_h * self.bump_d(xarg, 1.0) / self.bridge_w * sp
            der[n - 2] = tan[0] * sp
            der[n - 1] = tan[1] * sp
            for i in range(2):
                wp = self.bump_d((t - self.xi[i]) / self.eps[i], self.eps[i]) / self.eps[i]
                if wp != 0.0:
                    u = u1 if i == 0 else u2
                    for j in range(n - 2):
                        der[j] += self.delta[i] * wp * u[j]


cdef void rot_apply(double s, double* u0, int n, double* x, double* y) noexcept nogil:
    """y = e'[s, u0] x (clutching rotation; s clamped to [-1, 1])."""
    cdef double v[NMAX]
    cdef double dot = 0.0
    cdef double root
    cdef int j
    if s > 1.0:
        s = 1.0
    if s < -1.0:
        s = -1.0
    root = sqrt(1.0 - s * s) if s * s < 1.0 else 0.0
    for j in range(n):
        v[j] = 0.0
    for j in range(n - 2):
        v[j] = root * u0[j]
    v[n - 2] = s
    for j in range(n):
        dot += v[j] * x[j]
    for j in range(n):
        y[j] = x[j] - 2.0 * dot * v[j]
    y[n - 2] = -y[n - 2]


cdef void unit_frames(double* u, int m, double* frames) noexcept nogil:
    """Oriented tangent frames: (m-1) x m rows with det[u, f...] = +1."""
    cdef double w[NMAX]
    cdef double norm = 0.0
    cdef double sgn = 1.0 if u[0] >= 0.0 else -1.0
    cdef int i, j
    for i in range(m):
        w[i] = u[i]
    w[0] += sgn
    for i in range(m):
        norm += w[i] * w[i]
    norm = sqrt(norm)
    for i in range(m):
        w[i] /= norm
    for j in range(1, m):
        for i in range(m):
            frames[(j - 1) * m + i] = -2.0 * w[j] * w[i]
        frames[(j - 1) * m + j] += 1.0
    for i in range(m):
        frames[(m - 2) * m + i] *= sgn


cdef double lu_det(double* a, int d) noexcept nogil:
    """Determinant by partial-pivot LU on a d x d row-major buffer."""
    cdef double det = 1.0
    cdef int i, j, k, piv
    cdef double maxv, tmp, f
    for k in range(d):
        piv = k
        maxv = fabs(a[k * d + k])
        for i in range(k + 1, d):
            if fabs(a[i * d + k]) > maxv:
                maxv = fabs(a[i * d + k])
                piv = i
        if maxv == 0.0:
            return 0.0
        if piv != k:
            det = -det
            for j in range(d):
                tmp = a[k * d + j]
                a[k * d + j] = a[piv * d + j]
                a[piv * d + j] = tmp
        det *= a[k * d + k]
        for i in range(k + 1, d):
            f = a[i * d + k] / a[k * d + k]
            for j in range(k, d):
                a[i * d + j] -= f * a[k * d + j]
    return det


cdef void normalize_into(double* src, double* dst, int m) noexcept nogil:
    cdef double norm = 0.0
    cdef int i
    for i in range(m):
        norm += src[i] * src[i]
    norm = sqrt(norm)
    for i in range(m):
        dst[i] = src[i] / norm


cdef int phi_config(Tables tb, double* u1, double* u2, double s_lam, double* u0,
                    double* t, double* x, double* phis) noexcept nogil:
    """Evaluate the e sphere components of one configuration into phis
    (row-major (ne + nl) x n).  Returns 0 on degenerate input."""
    cdef double pts[(VIMAX + VFMAX) * NMAX]
    cdef double ders[VIMAX * NMAX]
    cdef double buf[NMAX]
    cdef int n = tb.n
    cdef int m, j, a, b
    cdef double norm
    for m in range(tb.vi):
        tb.knot_eval(t[m], u1, u2, &pts[m * n], &ders[m * n], tb.nl > 0)
        if tb.cycle == 1:
            rot_apply(s_lam, u0, n, &pts[m * n], buf)
            for j in range(n):
                pts[m * n + j] = buf[j]
            if tb.nl > 0:
                rot_apply(s_lam, u0, n, &ders[m * n], buf)
                for j in range(n):
                    ders[m * n + j] = buf[j]
    for m in range(tb.vf):
        for j in range(n):
            pts[(tb.vi + m) * n + j] = x[m * n + j]
    for m in range(tb.ne):
        a = tb.edges[m, 0] - 1
        b = tb.edges[m, 1] - 1
        norm = 0.0
        for j in range(n):
            buf[j] = pts[a * n + j] - pts[b * n + j]
            norm += buf[j] * buf[j]
        if norm == 0.0:
            return 0
        norm = sqrt(norm)
        for j in range(n):
            phis[m * n + j] = buf[j] / norm
    for m in range(tb.nl):
        a = tb.loops[m] - 1
        norm = 0.0
        for j in range(n):
            norm += ders[a * n + j] * ders[a * n + j]
        if norm == 0.0:
            return 0
        norm = sqrt(norm)
        for j in range(n):
            phis[(tb.ne + m) * n + j] = ders[a * n + j] / norm
    return 1


cdef struct Work:
    # per-sample state shared by the incremental column evaluation
    double u1[NMAX]
    double u2[NMAX]
    double u0[NMAX]
    double s_lam
    double t[VIMAX]
    double x[VFMAX * NMAX]
    double pts[(VIMAX + VFMAX) * NMAX]
    double ders[VIMAX * NMAX]
    double pts2[(VIMAX + VFMAX) * NMAX]
    double ders2[VIMAX * NMAX]


cdef void sync_masked(Tables tb, Work* w, unsigned int vmask) noexcept nogil:
    """Restore the perturbed copies of masked interval vertices from base."""
    cdef int n = tb.n
    cdef int m, j
    for m in range(tb.vi):
        if not (vmask >> m) & 1:
            continue
        for j in range(n):
            w.pts2[m * n + j] = w.pts[m * n + j]
            w.ders2[m * n + j] = w.ders[m * n + j]


cdef int eval_vertices(Tables tb, Work* w, bint perturbed, unsigned int vmask) noexcept nogil:
    """(Re)compute knot points/derivatives for the interval vertices in
    vmask, into pts/ders (base) or pts2/ders2 (perturbed copy)."""
    cdef int n = tb.n
    cdef int m, j
    cdef double buf[NMAX]
    cdef double* pts = &w.pts2[0] if perturbed else &w.pts[0]
    cdef double* ders = &w.ders2[0] if perturbed else &w.ders[0]
    for m in range(tb.vi):
        if not (vmask >> m) & 1:
            continue
        tb.knot_eval(w.t[m], w.u1, w.u2, &pts[m * n], &ders[m * n], tb.nl > 0)
        if tb.cycle == 1:
            rot_apply(w.s_lam, w.u0, n, &pts[m * n], buf)
            for j in range(n):
                pts[m * n + j] = buf[j]
            if tb.nl > 0:
                rot_apply(w.s_lam, w.u0, n, &ders[m * n], buf)
                for j in range(n):
                    ders[m * n + j] = buf[j]
    return 1


cdef int eval_phis_masked(Tables tb, Work* w, bint perturbed, unsigned int vmask,
                          double* phis) noexcept nogil:
    """Recompute the phi components whose vertices intersect vmask.
    Free-vertex coordinates are read from w.x (base) or w.pts2 free slots."""
    cdef int n = tb.n
    cdef int m, j, a, b
    cdef double norm
    cdef double buf[NMAX]
    cdef double* pts = &w.pts2[0] if perturbed else &w.pts[0]
    cdef double* ders = &w.ders2[0] if perturbed else &w.ders[0]
    for m in range(tb.ne):
        a = tb.edges[m, 0] - 1
        b = tb.edges[m, 1] - 1
        if not (((vmask >> a) & 1) or ((vmask >> b) & 1)):
            continue
        norm = 0.0
        for j in range(n):
            buf[j] = pts[a * n + j] - pts[b * n + j]
            norm += buf[j] * buf[j]
        if norm == 0.0:
            return 0
        norm = sqrt(norm)
        for j in range(n):
            phis[m * n + j] = buf[j] / norm
    for m in range(tb.nl):
        a = tb.loops[m] - 1
        if not (vmask >> a) & 1:
            continue
        norm = 0.0
        for j in range(n):
            norm += ders[a * n + j] * ders[a * n + j]
        if norm == 0.0:
            return 0
        norm = sqrt(norm)
        for j in range(n):
            phis[(tb.ne + m) * n + j] = ders[a * n + j] / norm
    return 1


cdef void fill_col_masked(Tables tb, unsigned int vmask, double h, double* frames,
                          double* phip, double* phim, double* jac, int d, int c) noexcept nogil:
    """Column c of the Jacobian; rows of phis untouched by vmask are zero."""
    cdef int n = tb.n
    cdef int m, a, b, j, row
    cdef double acc, diff
    cdef bint hit
    for m in range(tb.ne + tb.nl):
        if m < tb.ne:
            a = tb.edges[m, 0] - 1
            b = tb.edges[m, 1] - 1
            hit = ((vmask >> a) & 1) or ((vmask >> b) & 1)
        else:
            a = tb.loops[m - tb.ne] - 1
            hit = (vmask >> a) & 1
        for a in range(n - 1):
            row = m * (n - 1) + a
            if not hit:
                jac[row * d + c] = 0.0
                continue
            acc = 0.0
            for j in range(n):
                diff = (phip[m * n + j] - phim[m * n + j]) / (2.0 * h)
                acc += frames[m * (n - 1) * n + a * n + j] * diff
            jac[row * d + c] = acc


cdef double pairing_sample(Tables tb, double* u1in, double* u2in, double s_in,
                           double* u0in, double* t_in, double* x_in,
                           int d, double norm_factor) noexcept nogil:
    """Full integrand for one sample; all buffers live on this frame's
    stack, so the function is safe to call from parallel loops."""
    cdef Work w
    cdef double f1[NMAX * NMAX]
    cdef double f2[NMAX * NMAX]
    cdef double f0[NMAX * NMAX]
    cdef double phi0[EMAX * NMAX]
    cdef double phip[EMAX * NMAX]
    cdef double phim[EMAX * NMAX]
    cdef double frames[EMAX * NMAX * NMAX]
    cdef double jac[DMAX * DMAX]
    cdef double pert[NMAX]
    cdef double save[NMAX]
    cdef double sval
    cdef double* uptr
    cdef double* fptr
    cdef int j, c, m, a, ok
    cdef int n = tb.n
    cdef int vi = tb.vi, vf = tb.vf
    cdef int e_total = tb.ne + tb.nl
    cdef bint is_lambda = tb.cycle == 1
    cdef double h = tb.fd_step
    cdef int nsph = n - 2
    cdef unsigned int all_iv, mask1, mask2, mask, allv
    cdef int nv = vi + vf

    for j in range(nsph):
        w.u1[j] = u1in[j]
        w.u2[j] = u2in[j]
        w.u0[j] = u0in[j]
    w.s_lam = s_in
    for j in range(vi):
        w.t[j] = t_in[j]
    for j in range(vf * n):
        w.x[j] = x_in[j]
        w.pts[(vi * n) + j] = w.x[j]
        w.pts2[(vi * n) + j] = w.x[j]

    all_iv = (<unsigned int>1 << vi) - 1
    allv = (<unsigned int>1 << nv) - 1
    eval_vertices(tb, &w, 0, all_iv)
    sync_masked(tb, &w, all_iv)
    ok = eval_phis_masked(tb, &w, 0, allv, phi0)
    if not ok:
        return 0.0
    for m in range(e_total):
        unit_frames(&phi0[m * n], n, &frames[m * (n - 1) * n])
    unit_frames(w.u1, nsph, f1)
    unit_frames(w.u2, nsph, f2)
    if is_lambda:
        unit_frames(w.u0, nsph, f0)
    # which interval vertices sit in each displacement window
    mask1 = 0
    mask2 = 0
    for m in range(vi):
        if fabs(w.t[m] - tb.xi[0]) < tb.eps[0]:
            mask1 |= <unsigned int>1 << m
        if fabs(w.t[m] - tb.xi[1]) < tb.eps[1]:
            mask2 |= <unsigned int>1 << m

    c = 0
    ok = 1
    # u1 / u2 tangent directions (affect only window vertices)
    for m in range(2):
        mask = mask1 if m == 0 else mask2
        uptr = &w.u1[0] if m == 0 else &w.u2[0]
        fptr = &f1[0] if m == 0 else &f2[0]
        for j in range(nsph):
            save[j] = uptr[j]
        for j in range(nsph - 1):
            if mask == 0:
                fill_col_masked(tb, 0, h, frames, phip, phim, jac, d, c)
                c = c + 1
                continue
            for a in range(nsph):
                pert[a] = save[a] + h * fptr[j * nsph + a]
            normalize_into(pert, uptr, nsph)
            eval_vertices(tb, &w, 1, mask)
            ok = ok and eval_phis_masked(tb, &w, 1, mask, phip)
            for a in range(nsph):
                pert[a] = save[a] - h * fptr[j * nsph + a]
            normalize_into(pert, uptr, nsph)
            eval_vertices(tb, &w, 1, mask)
            ok = ok and eval_phis_masked(tb, &w, 1, mask, phim)
            for a in range(nsph):
                uptr[a] = save[a]
            sync_masked(tb, &w, mask)
            if not ok:
                break
            fill_col_masked(tb, mask, h, frames, phip, phim, jac, d, c)
            c = c + 1
        if not ok:
            break
    # lambda frame coordinates rotate every interval vertex
    if ok and is_lambda:
        sval = w.s_lam
        w.s_lam = sval + h
        eval_vertices(tb, &w, 1, all_iv)
        ok = ok and eval_phis_masked(tb, &w, 1, all_iv, phip)
        w.s_lam = sval - h
        eval_vertices(tb, &w, 1, all_iv)
        ok = ok and eval_phis_masked(tb, &w, 1, all_iv, phim)
        w.s_lam = sval
        sync_masked(tb, &w, all_iv)
        if ok:
            fill_col_masked(tb, all_iv, h, frames, phip, phim, jac, d, c)
            c = c + 1
        if ok:
            for j in range(nsph):
                save[j] = w.u0[j]
            for j in range(nsph - 1):
                for a in range(nsph):
                    pert[a] = save[a] + h * f0[j * nsph + a]
                normalize_into(pert, w.u0, nsph)
                eval_vertices(tb, &w, 1, all_iv)
                ok = ok and eval_phis_masked(tb, &w, 1, all_iv, phip)
                for a in range(nsph):
                    pert[a] = save[a] - h * f0[j * nsph + a]
                normalize_into(pert, w.u0, nsph)
                eval_vertices(tb, &w, 1, all_iv)
                ok = ok and eval_phis_masked(tb, &w, 1, all_iv, phim)
                for a in range(nsph):
                    w.u0[a] = save[a]
                sync_masked(tb, &w, all_iv)
                if not ok:
                    break
                fill_col_masked(tb, all_iv, h, frames, phip, phim, jac, d, c)
                c = c + 1
    # interval points: one vertex each
    if ok:
        for m in range(vi):
            mask = <unsigned int>1 << m
            w.t[m] += h
            eval_vertices(tb, &w, 1, mask)
            ok = ok and eval_phis_masked(tb, &w, 1, mask, phip)
            w.t[m] -= 2.0 * h
            eval_vertices(tb, &w, 1, mask)
            ok = ok and eval_phis_masked(tb, &w, 1, mask, phim)
            w.t[m] += h
            sync_masked(tb, &w, mask)
            if not ok:
                break
            fill_col_masked(tb, mask, h, frames, phip, phim, jac, d, c)
            c = c + 1
    # free point coordinates: no knot evaluation at all
    if ok:
        for m in range(vf * n):
            mask = <unsigned int>1 << (vi + m // n)
            w.pts2[vi * n + m] = w.x[m] + h
            ok = ok and eval_phis_masked(tb, &w, 1, mask, phip)
            w.pts2[vi * n + m] = w.x[m] - h
            ok = ok and eval_phis_masked(tb, &w, 1, mask, phim)
            w.pts2[vi * n + m] = w.x[m]
            if not ok:
                break
            fill_col_masked(tb, mask, h, frames, phip, phim, jac, d, c)
            c = c + 1
    if not ok:
        return 0.0
    return lu_det(jac, d) * norm_factor


def pairing_integrand(job, dom, num_threads=1):
    cdef Tables tb = Tables(job, True)
    cdef int n = tb.n
    cdef int vi = tb.vi, vf = tb.vf
    cdef int e_total = tb.ne + tb.nl
    cdef bint is_lambda = tb.cycle == 1

    cdef double[:, ::1] u1v = np.ascontiguousarray(dom["u1"], dtype=np.float64)
    cdef double[:, ::1] u2v = np.ascontiguousarray(dom["u2"], dtype=np.float64)
    t_in = np.ascontiguousarray(dom["t"], dtype=np.float64).reshape(len(dom["t"]), -1)
    x_in = np.ascontiguousarray(dom["x"], dtype=np.float64).reshape(len(dom["x"]), -1)
    if t_in.shape[1] == 0:
        t_in = np.zeros((t_in.shape[0], 1))
    if x_in.shape[1] == 0:
        x_in = np.zeros((x_in.shape[0], 1))
    cdef double[:, ::1] tv = t_in
    cdef double[:, ::1] xv = x_in
    cdef double[::1] sv
    cdef double[:, ::1] u0v
    if is_lambda:
        sv = np.ascontiguousarray(dom["s"], dtype=np.float64)
        u0v = np.ascontiguousarray(dom["u0"], dtype=np.float64)
    else:
        sv = np.zeros(u1v.shape[0])
        u0v = np.zeros((u1v.shape[0], n - 2))

    cdef int N = u1v.shape[0]
    cdef int d = 2 * (n - 3) + (n - 2 if is_lambda else 0) + vi + n * vf
    cdef double norm_factor = sphere_area(n) ** (-e_total)
    out_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int i
    cdef int nt = int(num_threads)

    if nt > 1:
        for i in prange(N, nogil=True, num_threads=nt, schedule="static"):
            out[i] = pairing_sample(tb, &u1v[i, 0], &u2v[i, 0], sv[i], &u0v[i, 0],
                                    &tv[i, 0], &xv[i, 0], d, norm_factor)
    else:
        with nogil:
            for i in range(N):
                out[i] = pairing_sample(tb, &u1v[i, 0], &u2v[i, 0], sv[i], &u0v[i, 0],
                                        &tv[i, 0], &xv[i, 0], d, norm_factor)
    return out_arr


# --- linking ------------------------------------------------------------------


cdef int eval_cycle(Tables tb, int kind, int index, double* data,
                    double t, double* u, double* out) noexcept nogil:
    cdef double zero[NMAX]
    cdef double dummy[NMAX]
    cdef int n = tb.n
    cdef int j
    if kind == 0:
        for j in range(n - 2):
            zero[j] = 0.0
        if index == 0:
            tb.knot_eval(t, u, zero, out, dummy, 0)
        else:
            tb.knot_eval(t, zero, u, out, dummy, 0)
        return 1
    if kind == 1:
        for j in range(n - 2):
            zero[j] = 0.0
        tb.knot_eval(t, zero, zero, out, dummy, 0)
        return 1
    if kind == 2:
        for j in range(n):
            out[j] = data[j] + data[3 * n] * (cos(t) * data[n + j] + sin(t) * data[2 * n + j])
        return 1
    return 0


cdef double linking_sample(Tables tb, int kind_a, int idx_a, double* data_a,
                           int kind_b, int idx_b, double* data_b,
                           double ta, double* ua, int ma,
                           double tb_, double* ub, int mb,
                           double norm_factor) noexcept nogil:
    cdef double fa[NMAX * NMAX]
    cdef double fb[NMAX * NMAX]
    cdef double A0[NMAX]
    cdef double B0[NMAX]
    cdef double Ap[NMAX]
    cdef double Am[NMAX]
    cdef double w[NMAX]
    cdef double phi0[NMAX]
    cdef double frames[NMAX * NMAX]
    cdef double jac[NMAX * NMAX]
    cdef double pert[NMAX]
    cdef double up[NMAX]
    cdef double um[NMAX]
    cdef double norm
    cdef int j, c, a
    cdef int n = tb.n
    cdef int d = n - 1
    cdef double h = tb.fd_step

    eval_cycle(tb, kind_a, idx_a, data_a, ta, ua, A0)
    eval_cycle(tb, kind_b, idx_b, data_b, tb_, ub, B0)
    norm = 0.0
    for j in range(n):
        w[j] = A0[j] - B0[j]
        norm += w[j] * w[j]
    if norm == 0.0:
        return 0.0
    norm = sqrt(norm)
    for j in range(n):
        phi0[j] = w[j] / norm
    unit_frames(phi0, n, frames)
    c = 0
    # A interval direction
    eval_cycle(tb, kind_a, idx_a, data_a, ta + h, ua, Ap)
    eval_cycle(tb, kind_a, idx_a, data_a, ta - h, ua, Am)
    _link_col(n, h, frames, Ap, B0, Am, B0, jac, d, c)
    c += 1
    # A sphere directions
    if ma:
        unit_frames(ua, ma, fa)
        for j in range(ma - 1):
            for a in range(ma):
                pert[a] = ua[a] + h * fa[j * ma + a]
            normalize_into(pert, up, ma)
            for a in range(ma):
                pert[a] = ua[a] - h * fa[j * ma + a]
            normalize_into(pert, um, ma)
            eval_cycle(tb, kind_a, idx_a, data_a, ta, up, Ap)
            eval_cycle(tb, kind_a, idx_a, data_a, ta, um, Am)
            _link_col(n, h, frames, Ap, B0, Am, B0, jac, d, c)
            c += 1
    # B interval direction
    eval_cycle(tb, kind_b, idx_b, data_b, tb_ + h, ub, Ap)
    eval_cycle(tb, kind_b, idx_b, data_b, tb_ - h, ub, Am)
    _link_col(n, h, frames, A0, Ap, A0, Am, jac, d, c)
    c += 1
    if mb:
        unit_frames(ub, mb, fb)
        for j in range(mb - 1):
            for a in range(mb):
                pert[a] = ub[a] + h * fb[j * mb + a]
            normalize_into(pert, up, mb)
            for a in range(mb):
                pert[a] = ub[a] - h * fb[j * mb + a]
            normalize_into(pert, um, mb)
            eval_cycle(tb, kind_b, idx_b, data_b, tb_, up, Ap)
            eval_cycle(tb, kind_b, idx_b, data_b, tb_, um, Am)
            _link_col(n, h, frames, A0, Ap, A0, Am, jac, d, c)
            c += 1
    return lu_det(jac, d) * norm_factor


def linking_integrand(job, dom, num_threads=1):
    cdef Tables tb = Tables(job, False)
    cdef int n = tb.n
    cdef int kind_a = int(job["cycle_a_kind"])
    cdef int kind_b = int(job["cycle_b_kind"])
    cdef int idx_a = int(job.get("cycle_a_index", 0))
    cdef int idx_b = int(job.get("cycle_b_index", 0))
    cdef double[::1] data_a_v = np.ascontiguousarray(job.get("cycle_a_data", np.zeros(1)), dtype=np.float64)
    cdef double[::1] data_b_v = np.ascontiguousarray(job.get("cycle_b_data", np.zeros(1)), dtype=np.float64)

    cdef double[::1] ta = np.ascontiguousarray(dom["ta"], dtype=np.float64)
    cdef double[::1] tb_ = np.ascontiguousarray(dom["tb"], dtype=np.float64)
    cdef int N = ta.shape[0]
    cdef double[:, ::1] ua_v
    cdef double[:, ::1] ub_v
    cdef int ma = 0, mb = 0
    if "ua" in dom:
        ua_v = np.ascontiguousarray(dom["ua"], dtype=np.float64)
        ma = ua_v.shape[1]
    else:
        ua_v = np.zeros((N, 1))
    if "ub" in dom:
        ub_v = np.ascontiguousarray(dom["ub"], dtype=np.float64)
        mb = ub_v.shape[1]
    else:
        ub_v = np.zeros((N, 1))

    cdef double norm_factor = 1.0 / sphere_area(n)
    out_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int i
    cdef int nt = int(num_threads)

    if nt > 1:
        for i in prange(N, nogil=True, num_threads=nt, schedule="static"):
            out[i] = linking_sample(tb, kind_a, idx_a, &data_a_v[0], kind_b, idx_b,
                                    &data_b_v[0], ta[i], &ua_v[i, 0], ma,
                                    tb_[i], &ub_v[i, 0], mb, norm_factor)
    else:
        with nogil:
            for i in range(N):
                out[i] = linking_sample(tb, kind_a, idx_a, &data_a_v[0], kind_b, idx_b,
                                        &data_b_v[0], ta[i], &ua_v[i, 0], ma,
                                        tb_[i], &ub_v[i, 0], mb, norm_factor)
    return out_arr


cdef void _link_col(int n, double h, double* frames, double* Ap, double* Bp,
                    double* Am, double* Bm, double* jac, int d, int c) noexcept nogil:
    cdef double wp[NMAX]
    cdef double wm[NMAX]
    cdef double np_ = 0.0
    cdef double nm = 0.0
    cdef double acc, diff
    cdef int j, a
    for j in range(n):
        wp[j] = Ap[j] - Bp[j]
        wm[j] = Am[j] - Bm[j]
        np_ += wp[j] * wp[j]
        nm += wm[j] * wm[j]
    np_ = sqrt(np_)
    nm = sqrt(nm)
    for a in range(n - 1):
        acc = 0.0
        for j in range(n):
            diff = (wp[j] / np_ - wm[j] / nm) / (2.0 * h)
            acc += frames[a * n + j] * diff
        jac[a * d + c] = acc
