"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-NumPy
module is the fallback.  ``CREDRO_BACKEND`` overrides the choice:
``compiled`` demands the extension, ``python`` forces the fallback,
``auto`` (default) picks the best available.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def available_backends() -> dict:
    """Mapping of backend name to kernel module for every importable backend."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def _select():
    choice = os.environ.get("CREDRO_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return _compiled if _compiled is not None else _kernels_py
    if choice == "python":
        return _kernels_py
    if choice == "compiled":
        if _compiled is None:
            raise ImportError(
                "CREDRO_BACKEND=compiled but the credro._kernels extension "
                "is not built; install with the Cython toolchain or unset "
                "the variable"
            )
        return _compiled
    raise ImportError(f"unknown CREDRO_BACKEND value: {choice!r}")


kernels = _select()


def active_backend() -> str:
    """Name of the kernel backend in use ('compiled' or 'python')."""
    return kernels.BACKEND_NAME
