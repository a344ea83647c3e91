"""Importance-sampling proposals for the pairing integrals.

The integrand concentrates where interval points sit in the resolution
windows (at the delta scale around the crossing parameters) and where
free points approach the crossing sites, so the proposals are explicit
mixtures with closed-form densities: the weight of a sample is the
product of inverse densities, which keeps the estimator unbiased for any
mixture weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from knotgc._kernels.fallback import sphere_area


def sample_sphere(rng, count, m):
    v = rng.standard_normal((count, m))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@dataclass
class IntervalProposal:
    """Per-coordinate density on [-T, T]: uniform background plus, around
    each crossing parameter, a window uniform and a truncated Cauchy with
    scale gamma (the fine structure scale, default the resolution size)."""

    box: float
    centers: tuple
    window: float  # half-width of the window components
    gamma: float  # Cauchy scale
    w_uniform: float = 0.30
    w_window: float = 0.05  # per center
    w_cauchy: float = 0.125  # per center

    def __post_init__(self):
        total = self.w_uniform + len(self.centers) * (self.w_window + self.w_cauchy)
        assert abs(total - 1.0) < 1e-9, f"mixture weights sum to {total}"
        self._atan = math.atan(self.window / self.gamma)

    def sample(self, rng, count):
        k = len(self.centers)
        u = rng.random(count)
        comp = np.zeros(count, dtype=np.int64)
        edges = [self.w_uniform]
        for _ in range(k):
            edges.append(edges[-1] + self.w_window)
        for _ in range(k):
            edges.append(edges[-1] + self.w_cauchy)
        comp = np.searchsorted(np.array(edges), u, side="right")
        out = np.empty(count)
        base = rng.random(count)
        for c in range(2 * k + 1):
            mask = comp == c
            if not np.any(mask):
                continue
            if c == 0:
                out[mask] = -self.box + 2 * self.box * base[mask]
            elif c <= k:
                xi = self.centers[c - 1]
                out[mask] = xi - self.window + 2 * self.window * base[mask]
            else:
                xi = self.centers[c - k - 1]
                th = (2 * base[mask] - 1.0) * self._atan
                out[mask] = xi + self.gamma * np.tan(th)
        return out

    def density(self, t):
        q = np.where(np.abs(t) <= self.box, self.w_uniform / (2 * self.box), 0.0)
        for xi in self.centers:
            dt = t - xi
            inside = np.abs(dt) < self.window
            q += np.where(inside, self.w_window / (2 * self.window), 0.0)
            cau = self.w_cauchy / (2 * self._atan * self.gamma * (1.0 + (dt / self.gamma) ** 2))
            q += np.where(inside, cau, 0.0)
        return q


@dataclass
class FreeProposal:
    """Density on R^n: compactifying ball map for the background, plus
    Gaussian blobs and inverse-power shells at the crossing sites."""

    n: int
    sites: tuple  # crossing points z_i as arrays
    sigma: float = 0.2  # Gaussian scale
    shell_r: float = 0.3
    w_ball: float = 0.40
    w_gauss: float = 0.15  # per site
    w_shell: float = 0.15  # per site

    def __post_init__(self):
        total = self.w_ball + len(self.sites) * (self.w_gauss + self.w_shell)
        assert abs(total - 1.0) < 1e-9
        self._vball = math.pi ** (self.n / 2.0) / math.gamma(self.n / 2.0 + 1.0)
        self._area = sphere_area(self.n)

    def sample(self, rng, count):
        k = len(self.sites)
        u = rng.random(count)
        edges = [self.w_ball]
        for _ in range(k):
            edges.append(edges[-1] + self.w_gauss)
        for _ in range(k):
            edges.append(edges[-1] + self.w_shell)
        comp = np.searchsorted(np.array(edges), u, side="right")
        out = np.empty((count, self.n))
        for c in range(2 * k + 1):
            mask = comp == c
            m = int(mask.sum())
            if m == 0:
                continue
            if c == 0:
                w = sample_sphere(rng, m, self.n)
                r = rng.random(m) ** (1.0 / self.n)
                y = w * r[:, None]
                r2 = np.sum(y * y, axis=-1, keepdims=True)
                out[mask] = y / (1.0 - r2)
            elif c <= k:
                z = self.sites[c - 1]
                out[mask] = z + self.sigma * rng.standard_normal((m, self.n))
            else:
                z = self.sites[c - k - 1]
                w = sample_sphere(rng, m, self.n)
                r = self.shell_r * rng.random(m) ** (2.0 / 3.0)
                out[mask] = z + w * r[:, None]
        return out

    def density(self, x):
        rx = np.linalg.norm(x, axis=-1)
        # invert the compactifying map r_x = r_y / (1 - r_y^2)
        ry = np.where(rx > 0, (-1.0 + np.sqrt(1.0 + 4.0 * rx * rx)) / (2.0 * np.maximum(rx, 1e-300)), 0.0)
        det = (1.0 + ry * ry) / (1.0 - ry * ry) ** (self.n + 1)
        q = self.w_ball / (self._vball * det)
        for z in self.sites:
            dz = x - z
            r2 = np.sum(dz * dz, axis=-1)
            q += (
                self.w_gauss
                * np.exp(-0.5 * r2 / self.sigma**2)
                / (2 * math.pi * self.sigma**2) ** (self.n / 2.0)
            )
            r = np.sqrt(r2)
            inside = (r < self.shell_r) & (r > 0)
            shell = np.zeros_like(q)
            rr = np.maximum(r, 1e-300)
            shell = np.where(
                inside,
                1.5 * np.sqrt(rr) / (self.shell_r**1.5 * self._area * rr ** (self.n - 1)),
                0.0,
            )
            q += self.w_shell * shell
        return q


def default_interval_proposal(spec, box=2.5):
    gamma = max(min(spec.delta), 1e-4)
    return IntervalProposal(
        box=box,
        centers=tuple(spec.xi),
        window=2.0 * max(spec.eps),
        gamma=gamma,
    )


def default_free_proposal(immersion):
    return FreeProposal(n=immersion.n, sites=tuple(np.asarray(z) for z in immersion.z))
