"""Selects the batch-kernel backend at import time.

The compiled extension (revealment._core, built from _core.pyx) and the
NumPy module (_core_py) export the same functions with identical
semantics; whichever is importable wins, compiled first.  BACKEND names
the active one, and get_backend lets the benchmark pit them against each
other explicitly.
"""

from __future__ import annotations

try:
    from . import _core as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built; the NumPy fallback is complete
    from . import _core_py as _impl

    BACKEND = "python"

nonmono_lv_batch = _impl.nonmono_lv_batch
nonmono_mc_batch = _impl.nonmono_mc_batch
mono_lv_values_batch = _impl.mono_lv_values_batch
mono_lv_reads_batch = _impl.mono_lv_reads_batch
mono_mc_batch = _impl.mono_mc_batch
winding_count_batch = _impl.winding_count_batch


def get_backend(name: str):
    """Return the kernel module for 'compiled' or 'python'; raises if the
    compiled extension is unavailable."""
    if name == "python":
        from . import _core_py

        return _core_py
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
