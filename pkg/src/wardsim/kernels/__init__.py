"""Kernel backend selection.

The daily contact/transmission loop has two interchangeable implementations:
a compiled Cython extension (``_speedups``) and a pure numpy fallback
(``reference``).  Both produce bit-identical results; the compiled one is
simply faster.  Selection happens at import: the extension if it built, else
the fallback.  Set WARDSIM_BACKEND=python or =cython to force one.
"""

from __future__ import annotations

import os

from . import reference

_forced = os.environ.get("WARDSIM_BACKEND", "").lower()

if _forced == "python":
    _impl = None
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None
        if _forced == "cython":
            raise ImportError(
                "WARDSIM_BACKEND=cython but the compiled kernel is not built; "
                "reinstall with `pip install -e . --no-build-isolation`"
            )

if _impl is not None:
    BACKEND = "cython"
    day_new_exposures = _impl.day_new_exposures
else:
    BACKEND = "python"
    day_new_exposures = reference.day_new_exposures

# The materialised-event view has no compiled variant; it exists for
# inspection and tests and always runs on numpy.
contact_event_arrays = reference.contact_event_arrays
exposures_from_events = reference.exposures_from_events
