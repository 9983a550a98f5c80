"""Propagation kernel backends: compiled extension with pure-Python fallback.

The compiled module is preferred when it imported successfully; setting the
environment variable QMEM_PURE_PYTHON=1 before import, or calling
`select("fallback")`, forces the numpy implementation. Selection is
process-global; it exists for benchmarking and debugging, not for
per-call switching.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built; fall back silently
    _core = None


def _env_forces_fallback() -> bool:
    return os.environ.get("QMEM_PURE_PYTHON", "").strip().lower() not in ("", "0", "false")


_active = _fallback if (_core is None or _env_forces_fallback()) else _core


def available() -> tuple[str, ...]:
    names = ["fallback"]
    if _core is not None:
        names.append("compiled")
    return tuple(names)


def active():
    """The currently selected backend module."""
    return _active


def select(name: str):
    """Choose the backend by name: 'compiled', 'fallback' or 'auto'."""
    global _active
    if name == "fallback":
        _active = _fallback
    elif name == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not available")
        _active = _core
    elif name == "auto":
        _active = _fallback if (_core is None or _env_forces_fallback()) else _core
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _active
