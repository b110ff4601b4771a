"""Hot loops, compiled when the extension is available.

Set ``CROSSMACHINE_PURE_PYTHON=1`` to force the NumPy fallback.
"""

from __future__ import annotations

import os

from . import _reference

BACKEND = "python"
leave_two_out_counts = _reference.leave_two_out_counts

if os.environ.get("CROSSMACHINE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        leave_two_out_counts = _core.leave_two_out_counts

__all__ = ["BACKEND", "leave_two_out_counts"]
