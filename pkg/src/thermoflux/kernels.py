"""Stencil backend selection.

Imports the compiled extension when present, otherwise the NumPy fallback.
Set THERMOFLUX_FORCE_PYTHON=1 to force the fallback (used by the benchmark
and by tests that compare the two backends).
"""
import os

from . import _stencils_py

if os.environ.get("THERMOFLUX_FORCE_PYTHON") == "1":
    _impl = _stencils_py
    BACKEND = "python"
else:
    try:
        from . import _stencils as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _stencils_py
        BACKEND = "python"

lap1 = _impl.lap1
lap2 = _impl.lap2
dagb1 = _impl.dagb1
dagb2 = _impl.dagb2
grad1 = _impl.grad1
grad2 = _impl.grad2
