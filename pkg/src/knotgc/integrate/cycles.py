"""Preset cycles for linking-number integrals.

Each cycle carries its parameter factors (one interval, optionally one
sphere), the product of factor volumes, and the descriptor fields the
kernels understand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from knotgc._kernels.fallback import sphere_area


@dataclass
class ResolutionSphereCycle:
    """S_i: all resolutions over the window around xi_i; an (n-2)-sphere."""

    immersion: object
    index: int  # 0 or 1

    @property
    def n(self):
        return self.immersion.n

    @property
    def dim(self):
        return self.n - 2

    def interval(self):
        spec = self.immersion.spec
        xi = spec.xi[self.index]
        eps = spec.eps[self.index]
        return xi - eps, xi + eps

    def sphere_dim(self):
        return self.n - 2  # ambient dimension of the u-sphere S^{n-3}

    def weight(self):
        lo, hi = self.interval()
        return (hi - lo) * sphere_area(self.n - 2)

    def descriptor(self):
        return {"kind": 0, "index": self.index}


@dataclass
class SegmentCycle:
    """I_i: the undisplaced strand through z_i, parametrized by t near
    xi_{i+2}."""

    immersion: object
    index: int

    @property
    def n(self):
        return self.immersion.n

    @property
    def dim(self):
        return 1

    def interval(self):
        spec = self.immersion.spec
        xi = spec.xi[self.index + 2]
        eps = spec.eps[self.index]
        return xi - eps, xi + eps

    def sphere_dim(self):
        return 0

    def weight(self):
        lo, hi = self.interval()
        return hi - lo

    def descriptor(self):
        return {"kind": 1, "index": self.index}


@dataclass
class CircleCycle:
    """Round circle: center + r (cos t e1 + sin t e2)."""

    center: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    radius: float
    n: int = 3

    @property
    def dim(self):
        return 1

    def interval(self):
        return 0.0, 2.0 * np.pi

    def sphere_dim(self):
        return 0

    def weight(self):
        return 2.0 * np.pi

    def descriptor(self):
        data = np.concatenate(
            [
                np.asarray(self.center, dtype=float),
                np.asarray(self.e1, dtype=float),
                np.asarray(self.e2, dtype=float),
                [self.radius],
            ]
        )
        return {"kind": 2, "data": data}

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        return self.center + self.radius * (
            np.cos(t)[..., None] * self.e1 + np.sin(t)[..., None] * self.e2
        )


def hopf_circles():
    """The classical linked pair in R^3: unit circle in the xy-plane and a
    unit circle through its center in the xz-plane."""
    a = CircleCycle(np.zeros(3), np.eye(3)[0], np.eye(3)[1], 1.0)
    b = CircleCycle(np.array([1.0, 0.0, 0.0]), np.eye(3)[0], np.eye(3)[2], 1.0)
    return a, b


def unlinked_circles(separation=10.0):
    a = CircleCycle(np.zeros(3), np.eye(3)[0], np.eye(3)[1], 1.0)
    b = CircleCycle(
        np.array([separation, 0.0, 0.0]), np.eye(3)[0], np.eye(3)[2], 1.0
    )
    return a, b
