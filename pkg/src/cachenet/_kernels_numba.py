"""Numba-compiled variants of the hot kernels (see _kernels_numpy for specs).

Importing this module requires numba; callers should go through
:mod:`cachenet._kernels`, which falls back to the numpy implementations when
numba is unavailable or disabled via CACHENET_BACKEND=numpy.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def log2_interference_sum(dist, fading, alpha):
    n, j = dist.shape
    out = np.empty(n)
    for i in range(n):
        acc = 0.0
        for k in range(j):
            acc += dist[i, k] ** (-alpha) * fading[i, k]
        out[i] = np.log2(acc)
    return out


@njit(cache=True, nogil=True)
def zf_precode(h, starts, counts):
    n_streams, n_t = h.shape
    w = np.empty_like(h)
    gains = np.empty(n_streams)
    for c in range(len(starts)):
        s0 = starts[c]
        k = counts[c]
        hb = h[s0 : s0 + k]
        gram = np.conj(hb) @ hb.T
        inv = np.linalg.inv(gram)
        wb = hb.T @ inv  # (n_t, k)
        for i in range(k):
            norm2 = 0.0
            for t in range(n_t):
                v = wb[t, i]
                norm2 += v.real * v.real + v.imag * v.imag
            gains[s0 + i] = 1.0 / norm2
            scale = 1.0 / np.sqrt(norm2)
            for t in range(n_t):
                w[s0 + i, t] = wb[t, i] * scale
    return w, gains


@njit(cache=True, nogil=True)
def interference_power(hx, w, cell_of_stream, inv_streams, rel_gain):
    n_victims = hx.shape[0]
    n_t = hx.shape[2]
    n_streams = w.shape[0]
    out = np.zeros(n_victims)
    for v in range(n_victims):
        acc = 0.0
        for s in range(n_streams):
            j = cell_of_stream[s]
            g = rel_gain[v, j]
            if g == 0.0:
                continue
            re = 0.0
            im = 0.0
            for t in range(n_t):
                a = hx[v, j, t]
                b = w[s, t]
                # conj(a) * b
                re += a.real * b.real + a.imag * b.imag
                im += a.real * b.imag - a.imag * b.real
            acc += g * inv_streams[j] * (re * re + im * im)
        out[v] = acc
    return out
