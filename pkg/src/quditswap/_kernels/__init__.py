"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-numpy
implementation when the extension is unavailable or when the environment
variable ``QUDITSWAP_PURE_PYTHON`` is set to a non-empty value.
"""

from __future__ import annotations

import os

from . import _reference

if os.environ.get("QUDITSWAP_PURE_PYTHON"):
    _impl = _reference
    BACKEND = "reference"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _reference
        BACKEND = "reference"

evolve = _impl.evolve
gate_grad = _impl.gate_grad

__all__ = ["evolve", "gate_grad", "BACKEND"]
