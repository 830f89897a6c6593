"""Pure-numpy reference implementations of the hot numerical kernels.

These are the fallback path behind :mod:`cachenet._kernels`; the numba
variants in :mod:`cachenet._kernels_numba` are loop-for-loop translations
with identical semantics (up to floating-point association order).
"""

import numpy as np


def log2_interference_sum(dist: np.ndarray, fading: np.ndarray, alpha: float) -> np.ndarray:
    """log2 of the fading-weighted pathloss sum, per sample.

    dist: (n, j) distances, fading: (n, j) nonnegative weights.
    Returns (n,) values log2(sum_j dist^-alpha * fading).
    """
    return np.log2(np.sum(dist ** (-alpha) * fading, axis=1))


def zf_precode(h: np.ndarray, starts: np.ndarray, counts: np.ndarray):
    """Zero-forcing precoders for stacked per-cell channel blocks.

    h: (n_streams, n_t) complex user channels, grouped into contiguous cell
    blocks described by starts/counts.  Returns (w, gains): w holds the
    unit-norm precoding vector of each stream as a row, gains the beamforming
    power gain |h_k^H w_k|^2 of each stream.
    """
    n_streams, n_t = h.shape
    w = np.empty_like(h)
    gains = np.empty(n_streams)
    counts = np.asarray(counts)
    starts = np.asarray(starts)
    for k in np.unique(counts):
        cells = np.flatnonzero(counts == k)
        idx = starts[cells][:, None] + np.arange(k)[None, :]  # (m, k) stream ids
        hb = h[idx]  # (m, k, n_t)
        hbh = np.conj(hb)
        gram = hbh @ hb.transpose(0, 2, 1)  # (m, k, k)
        inv = np.linalg.inv(gram)
        wb = hb.transpose(0, 2, 1) @ inv  # (m, n_t, k) raw pseudo-inverse columns
        norms2 = np.einsum("mtk,mtk->mk", np.conj(wb), wb).real
        g = 1.0 / norms2
        wn = wb / np.sqrt(norms2)[:, None, :]
        flat = idx.ravel()
        w[flat] = wn.transpose(0, 2, 1).reshape(len(cells) * k, n_t)
        gains[flat] = g.ravel()
    return w, gains


def interference_power(
    hx: np.ndarray,
    w: np.ndarray,
    cell_of_stream: np.ndarray,
    inv_streams: np.ndarray,
    rel_gain: np.ndarray,
) -> np.ndarray:
    """Aggregate cross-cell interference power per victim user.

    hx: (n_victims, n_cells, n_t) cross channels, w: (n_streams, n_t)
    normalized precoders, cell_of_stream: (n_streams,) owning-cell index
    into the hx cell axis, inv_streams: (n_cells,) 1/K_j per cell,
    rel_gain: (n_victims, n_cells) linear link gains with the victim's own
    serving entry already zeroed.  Returns (n_victims,) sums
    sum_j gain[v, j] / K_j * ||h_vj^H W_j||^2.
    """
    hs = np.conj(hx[:, cell_of_stream, :])  # (V, S, n_t)
    dots = np.einsum("vst,st->vs", hs, w)
    weights = rel_gain[:, cell_of_stream] * inv_streams[cell_of_stream][None, :]
    return np.sum((dots.real**2 + dots.imag**2) * weights, axis=1)
