"""Hot-kernel backend: compiled Cython extension with a NumPy fallback.

The compiled kernel is preferred when the extension built successfully;
``MIMO_ENERGY_BACKEND=numpy`` (or ``cython``) forces a choice. Both expose

- ``advance_billiard(pos, steps, radius)``: in-place reflected walk step
- ``weighted_inv_pathloss_sums(pos, weights, group, beta, xbar_m, l_xbar, out)``
"""

from __future__ import annotations

import os

from . import _walk_np

_forced = os.environ.get("MIMO_ENERGY_BACKEND", "").strip().lower()

_cy = None
if _forced != "numpy":
    try:
        from . import _walk_cy as _cy  # type: ignore[attr-defined]
    except ImportError:
        _cy = None
        if _forced == "cython":
            raise ImportError(
                "MIMO_ENERGY_BACKEND=cython but the compiled kernel is not "
                "available; reinstall with a working C toolchain")

_impl = _cy if _cy is not None else _walk_np

BACKEND_NAME = "cython" if _cy is not None else "numpy"

advance_billiard = _impl.advance_billiard
weighted_inv_pathloss_sums = _impl.weighted_inv_pathloss_sums


def available_backends() -> list[str]:
    names = ["numpy"]
    if _cy is not None:
        names.insert(0, "cython")
    return names


def get_backend(name: str):
    """Return the named backend module (for benchmarks and parity tests)."""
    if name == "numpy":
        return _walk_np
    if name == "cython":
        if _cy is None:
            raise ValueError("compiled backend not available")
        return _cy
    raise ValueError(f"unknown backend {name!r}")
