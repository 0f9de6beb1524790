"""Kernel backend selection: compiled extension when available, numpy otherwise.

The compiled module is built from _core.pyx at install time; if the build was
skipped or failed, or STRATA_PURE_PYTHON=1 is set, the numpy fallback in
_core_py is used. Each backend is deterministic for a given seed; the two
agree on any non-degenerate input (they can differ only when a point is
equidistant from two centroids to the last float bit).
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from types import ModuleType

from . import _core_py

_compiled: ModuleType | None
try:
    from . import _core as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None


def _default_backend() -> ModuleType:
    if os.environ.get("STRATA_PURE_PYTHON") == "1" or _compiled is None:
        return _core_py
    return _compiled


active: ModuleType = _default_backend()


def backend_name() -> str:
    return "numpy" if active is _core_py else "cython"


def available_backends() -> tuple[str, ...]:
    return ("cython", "numpy") if _compiled is not None else ("numpy",)


@contextmanager
def use(name: str):
    """Temporarily switch backends (used by tests and the benchmark)."""
    global active
    if name == "numpy":
        chosen: ModuleType = _core_py
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel not available")
        chosen = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    previous = active
    active = chosen
    try:
        yield
    finally:
        active = previous
