"""Backend selection for the hot decoding/likelihood kernels.

The compiled extension is preferred; set ``SECUREID_PURE_PYTHON=1`` to force
the NumPy fallback. ``BACKEND`` names the active one.
"""
import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None
else:
    BACKENDS["cython"] = _kernels_c

if os.environ.get("SECUREID_PURE_PYTHON") or _kernels_c is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_impl = BACKENDS[BACKEND]
nearest_codeword = _impl.nearest_codeword
binned_log_likelihood = _impl.binned_log_likelihood
identity_log_likelihood = _impl.identity_log_likelihood
