"""Kernel backend selection.

Two interchangeable kernel modules exist: the compiled extension
``mcflow._core`` (Cython) and the pure-numpy fallback ``mcflow._ref``.
The compiled one is preferred when it importable; the environment variable
``MCFLOW_BACKEND`` (``cython`` or ``numpy``) or :func:`use` override the
choice, mainly for tests and the kernel benchmark.
"""

import os

from . import _ref

_BACKENDS = {"numpy": _ref}
try:
    from . import _core
    _BACKENDS["cython"] = _core
except ImportError:
    _core = None

_active = None


def available():
    """Names of the importable backends."""
    return sorted(_BACKENDS)


def use(name):
    """Select a backend by name; returns the kernel module."""
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; "
                         f"available: {available()}") from None
    return _active


def active():
    """The selected kernel module (resolving the default on first use)."""
    global _active
    if _active is None:
        name = os.environ.get("MCFLOW_BACKEND")
        if name:
            use(name)
        else:
            _active = _BACKENDS.get("cython", _ref)
    return _active
