"""Hot loops, compiled when possible.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
numpy implementations in ``_pykernels`` take over.  Setting the environment
variable ``SEQCA_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("SEQCA_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def get(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    return BACKENDS[name or BACKEND]


def use(name):
    """Switch the active backend; returns the previous name."""
    global BACKEND
    if name not in BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}")
    prev, BACKEND = BACKEND, name
    return prev
