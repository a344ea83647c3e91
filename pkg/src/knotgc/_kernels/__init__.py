"""Backend selection: compiled kernels when available, numpy fallback
otherwise.  Set KNOTGC_NO_EXT=1 to force the fallback."""

import os

from knotgc._kernels import fallback

_impl = fallback
if os.environ.get("KNOTGC_NO_EXT") != "1":
    try:
        from knotgc._kernels import _speedups as _impl  # type: ignore
    except ImportError:
        _impl = fallback


def backend_name():
    return _impl.BACKEND_NAME


def pairing_integrand(job, dom, num_threads=1):
    return _impl.pairing_integrand(job, dom, num_threads=num_threads)


def linking_integrand(job, dom, num_threads=1):
    return _impl.linking_integrand(job, dom, num_threads=num_threads)


def get_backend(name=None):
    """Explicit backend lookup ('fallback', 'compiled', or None for the
    selected default)."""
    if name in (None, "auto"):
        return _impl
    if name == "fallback":
        return fallback
    if name == "compiled":
        from knotgc._kernels import _speedups

        return _speedups
    raise ValueError(f"unknown backend {name!r}")
