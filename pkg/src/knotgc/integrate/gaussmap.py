"""The Gauss map and its analytic derivative."""

import numpy as np

from knotgc.errors import CoincidentPoints


def gauss(x, y):
    """(x - y)/|x - y|; antisymmetric in its arguments."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = x - y
    r = np.linalg.norm(w, axis=-1, keepdims=True)
    if np.any(r == 0):
        raise CoincidentPoints("gauss map at coincident points")
    return w / r


def gauss_jacobian(x, y):
    """d(gauss)/dx = (I - phi phi^T)/|x - y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = x - y
    r = np.linalg.norm(w)
    if r == 0:
        raise CoincidentPoints("gauss map at coincident points")
    phi = w / r
    return (np.eye(len(w)) - np.outer(phi, phi)) / r
