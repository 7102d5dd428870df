"""Backend selection for the quadrature kernels.

The compiled extension is used when it imports; set
``MODEFORGE_KERNELS=python`` to force the NumPy fallback.
"""
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def _select():
    wanted = os.environ.get("MODEFORGE_KERNELS", "").strip().lower()
    if wanted:
        if wanted not in BACKENDS:
            raise ImportError(f"MODEFORGE_KERNELS={wanted!r} is not available "
                              f"(have {sorted(BACKENDS)})")
        return wanted
    return "cython" if "cython" in BACKENDS else "python"


BACKEND = _select()
_impl = BACKENDS[BACKEND]


def get_backend(name=None):
    return _impl if name is None else BACKENDS[name]


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def phase_integrals(starts, off_out, wg_out, omega, phase, backend=None):
    return get_backend(backend).phase_integrals(
        _c(starts), _c(off_out), _c(wg_out), _c(omega), _c(phase))


def ordered_double_integrals(starts, off_out, off_in, wg_out, wg_in, omega, backend=None):
    return get_backend(backend).ordered_double_integrals(
        _c(starts), _c(off_out), _c(off_in), _c(wg_out), _c(wg_in), _c(omega))
