"""NumPy implementations of the decoding and likelihood kernels.

Always available; used when the compiled extension is missing or when
``SECUREID_PURE_PYTHON=1`` is set.
"""
import numpy as np
from scipy.special import logsumexp

_CHUNK = 1 << 22  # max elements of a temporary distance matrix


def _sq_dists(Y, C, c_norms):
    # ||y||^2 is constant per row; it is added back for the reported distance
    return c_norms[None, :] - 2.0 * (Y @ C.T)


def nearest_codeword(Y, C):
    """Index and squared distance of the closest row of ``C`` for each row of ``Y``."""
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    c_norms = np.einsum("ij,ij->i", C, C)
    y_norms = np.einsum("ij,ij->i", Y, Y)
    idx = np.empty(Y.shape[0], dtype=np.int64)
    dist = np.empty(Y.shape[0], dtype=np.float64)
    step = max(1, _CHUNK // max(1, C.shape[0]))
    for s in range(0, Y.shape[0], step):
        d = _sq_dists(Y[s : s + step], C, c_norms)
        k = np.argmin(d, axis=1)
        idx[s : s + step] = k
        dist[s : s + step] = np.maximum(d[np.arange(k.size), k] + y_norms[s : s + step], 0.0)
    return idx, dist


def binned_log_likelihood(Y, C, group, inv_two_var):
    """out[t, g] = log sum_{k in group g} exp(-||Y[t] - C[k]||^2 * inv_two_var).

    ``C`` rows are grouped consecutively, ``group`` rows per group.
    """
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    M = C.shape[0]
    if M % group:
        raise ValueError("codebook size must be a multiple of the group size")
    c_norms = np.einsum("ij,ij->i", C, C)
    y_norms = np.einsum("ij,ij->i", Y, Y)
    out = np.empty((Y.shape[0], M // group), dtype=np.float64)
    step = max(1, _CHUNK // max(1, M))
    for s in range(0, Y.shape[0], step):
        d = np.maximum(_sq_dists(Y[s : s + step], C, c_norms) + y_norms[s : s + step, None], 0.0)
        e = (-inv_two_var * d).reshape(d.shape[0], M // group, group)
        out[s : s + step] = e[..., 0] if group == 1 else logsumexp(e, axis=2)
    return out


def identity_log_likelihood(L_in, L_out, coloring):
    """out[t] = log sum_j exp(L_in[t, j] + L_out[t, coloring[j]])."""
    L_in = np.asarray(L_in, dtype=np.float64)
    L_out = np.asarray(L_out, dtype=np.float64)
    coloring = np.asarray(coloring, dtype=np.int64)
    return logsumexp(L_in + L_out[:, coloring], axis=1)
