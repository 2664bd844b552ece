"""Hot-kernel backend selection.

The compiled Cython extension is used when available; the pure-numpy twin
otherwise.  Set the environment variable CAVEM_DISABLE_EXT=1 before import
to force the numpy backend (used by the benchmark and the equivalence
tests).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("CAVEM_DISABLE_EXT"):
    _impl = _pure
    _BACKEND = "numpy"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        _BACKEND = "cython"
    except ImportError:
        _impl = _pure
        _BACKEND = "numpy"

eit_reflection_grid = _impl.eit_reflection_grid
psd_quanta_grid = _impl.psd_quanta_grid
lorentzian_grid = _impl.lorentzian_grid
exp_decay_grid = _impl.exp_decay_grid


def backend() -> str:
    """Name of the active kernel backend: 'cython' or 'numpy'."""
    return _BACKEND
