"""Slot-level Monte-Carlo simulator of the cache-enabled ZF downlink.

Each drop realizes the PPP user field over the full lattice (core + guard),
associates users, schedules up to N_t of them per cell, draws i.i.d. CN(0,1)
channels, applies per-cell zero-forcing and computes exact SINRs including
the interference from every other active cell.  Per-cell throughput counts
cache hits at the radio rate and caps the aggregated miss traffic at the
backhaul capacity; per-cell power mirrors the analytic power model with the
*realized* backhaul rate.  Only core cells are measured.

Reductions are ratio-of-means and are carried out in drop-index order from a
preallocated per-drop table, so results are bit-identical for a given seed
regardless of the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import (
    CellLayout,
    NetworkConfig,
    UserDrop,
    associate_distributed,
    associate_nearest,
    drop_users,
)
from .model import PowerConfig
from .popularity import ContentConfig

_SQRT_HALF = math.sqrt(0.5)


@dataclass
class SlotRealization:
    """Full detail of one simulated slot (arrays per scheduled user / per cell)."""

    drop: UserDrop
    scheduled: np.ndarray  # indices into the drop arrays, core cells only
    serving_cell: np.ndarray
    sinr: np.ndarray
    rate_bps: np.ndarray
    cache_hit: np.ndarray
    cell_active: np.ndarray  # all cells
    cell_rate_hit: np.ndarray  # core cells carry data, guard cells zero
    cell_rate_miss: np.ndarray
    cell_throughput: np.ndarray
    cell_backhaul: np.ndarray
    cell_power_w: np.ndarray


@dataclass(frozen=True)
class SimSummary:
    """Per-cell averages over drops with drop-level standard errors."""

    cell_throughput_mean: float
    cell_throughput_stderr: float
    backhaul_rate_mean: float
    backhaul_rate_stderr: float
    power_mean: float
    power_stderr: float
    active_fraction: float
    ee: float
    drops: int
    seed: int


@dataclass(frozen=True)
class LogTermEstimate:
    """Monte-Carlo estimate of E{log2(beta*I + sigma^2/P)} at the central cell."""

    value: float
    std_error: float
    drops: int
    beta: float


def zfbf_precoder(h: np.ndarray) -> np.ndarray:
    """Zero-forcing precoder for one cell.

    h: (K, N_t) complex, rows are the user channels.  Returns (N_t, K) with
    unit-norm columns satisfying h_i^H w_j = 0 for i != j.  For K = 1 this
    reduces to maximum-ratio transmission h/||h||.  Raises ValueError on a
    (numerically) rank-deficient channel matrix; the caller should resample.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] > h.shape[1]:
        raise ValueError(f"need (K, N_t) channels with K <= N_t, got {h.shape}")
    k = h.shape[0]
    gram = np.conj(h) @ h.T
    if np.linalg.cond(gram) > 1e12:
        raise ValueError("rank-deficient channel matrix: resample the fading")
    raw = h.T @ np.linalg.inv(gram)  # (N_t, K)
    return raw / np.linalg.norm(raw, axis=0, keepdims=True)


def slot_sinr(signal_power_w, interference_power_w, streams, net: NetworkConfig):
    """Exact SINR of a served user.

    signal_power_w: received signal power including the beamforming gain but
    before the equal power split over ``streams``; interference_power_w: the
    aggregate received other-cell interference power (already averaged over
    nothing — this is the exact per-slot value).  Scalars or arrays.
    """
    return (np.asarray(signal_power_w) / streams) / (
        net.interference_factor * np.asarray(interference_power_w) + net.noise_power_w
    )


def slot_throughput(cell_rate_hit, cell_rate_miss, backhaul_capacity_bps: float):
    """Apply the backhaul cap: returns (cell throughput, realized backhaul rate)."""
    backhaul = np.minimum(cell_rate_miss, backhaul_capacity_bps)
    return np.asarray(cell_rate_hit) + backhaul, backhaul


def _drop_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index))))


def _complex_normal(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    flat = rng.standard_normal(shape + (2,))
    return (flat[..., 0] + 1j * flat[..., 1]) * _SQRT_HALF


def _schedule(drop: UserDrop, n_cells: int, antennas: int, rng) -> np.ndarray:
    """Random fair selection: up to ``antennas`` users per cell, chosen by a
    single uniform priority draw.  Returns indices of scheduled users."""
    if drop.n_users == 0:
        return np.empty(0, dtype=np.int64)
    priority = rng.random(drop.n_users)
    order = np.argsort(priority, kind="stable")
    taken = np.zeros(n_cells, dtype=np.int64)
    keep = []
    for u in order:
        cell = drop.serving_bs[u]
        if taken[cell] < antennas:
            taken[cell] += 1
            keep.append(u)
    keep = np.array(keep, dtype=np.int64)
    return keep[np.argsort(drop.serving_bs[keep], kind="stable")]


def _run_drop(
    net: NetworkConfig,
    pw: PowerConfig,
    content: ContentConfig,
    layout: CellLayout,
    rng: np.random.Generator,
    *,
    shadowing_db: float = 0.0,
    association: str = "nearest",
    want_detail: bool = False,
):
    """Simulate one slot; returns (metrics row, SlotRealization | None).

    Row layout: [mean core-cell throughput, mean core-cell backhaul rate,
    mean core-cell power, active fraction of core cells].
    """
    n_cells = layout.n_cells
    alpha = net.pathloss_exponent
    p_link = net.link_power_w

    drop = drop_users(layout, net.mean_users, content, rng)
    if association == "nearest":
        drop = associate_nearest(drop, layout)
    elif association == "distributed":
        drop = associate_distributed(drop, layout, layout.colors(), content)
    else:
        raise ValueError(f"unknown association mode {association!r}")

    shadow_gain = None
    if shadowing_db > 0.0 and drop.n_users > 0:
        shadow_gain = 10.0 ** (
            shadowing_db * rng.standard_normal((drop.n_users, n_cells)) / 10.0
        )

    sched = _schedule(drop, n_cells, net.antennas, rng)
    streams_of_cell = np.bincount(drop.serving_bs[sched], minlength=n_cells)
    active_cells = np.flatnonzero(streams_of_cell)
    cell_active = streams_of_cell > 0

    is_core = np.zeros(n_cells, dtype=bool)
    is_core[layout.core_cell_indices] = True

    cell_rate_hit = np.zeros(n_cells)
    cell_rate_miss = np.zeros(n_cells)

    victims = np.empty(0, dtype=np.int64)
    sinr = np.empty(0)
    rates = np.empty(0)
    hits = np.empty(0, dtype=bool)

    if len(active_cells) > 0:
        # ZF precoding for every active cell (guard included: their beams
        # shape the interference seen by the core).
        n_streams = int(streams_of_cell.sum())
        h_own = _complex_normal(rng, (n_streams, net.antennas))
        counts = streams_of_cell[active_cells]
        starts = np.concatenate(([0], np.cumsum(counts[:-1])))
        w_all, own_gain = _kernels.zf_precode(
            h_own, starts.astype(np.int64), counts.astype(np.int64)
        )

        core_mask = is_core[drop.serving_bs[sched]]
        victims = sched[core_mask]
        if len(victims) > 0:
            vic_gain = own_gain[core_mask]
            vic_cell = drop.serving_bs[victims]
            slot_of_cell = np.full(n_cells, -1, dtype=np.int64)
            slot_of_cell[active_cells] = np.arange(len(active_cells))

            hx = _complex_normal(rng, (len(victims), len(active_cells), net.antennas))
            delta = drop.user_positions[victims][:, None, :] - layout.bs_positions[active_cells][None, :, :]
            dist = np.sqrt(np.einsum("vjx,vjx->vj", delta, delta))
            rel_gain = dist ** (-alpha)
            if shadow_gain is not None:
                rel_gain = rel_gain * shadow_gain[victims][:, active_cells]
            rel_gain[np.arange(len(victims)), slot_of_cell[vic_cell]] = 0.0

            cell_of_stream = np.repeat(np.arange(len(active_cells)), counts)
            inv_streams = 1.0 / counts.astype(np.float64)
            i_norm = _kernels.interference_power(
                hx, w_all, cell_of_stream.astype(np.int64), inv_streams, rel_gain
            )

            serve_delta = drop.user_positions[victims] - layout.bs_positions[vic_cell]
            serve_dist = np.sqrt(np.einsum("vx,vx->v", serve_delta, serve_delta))
            serve_pl = serve_dist ** (-alpha)
            if shadow_gain is not None:
                serve_pl = serve_pl * shadow_gain[victims, vic_cell]
            signal = p_link * serve_pl * vic_gain
            sinr = slot_sinr(signal, p_link * i_norm, streams_of_cell[vic_cell], net)
            rates = net.bandwidth_hz * np.log2(1.0 + sinr)

            if association == "distributed":
                hits = drop.requested_content[victims] <= 3 * content.cached_count
            else:
                hits = drop.requested_content[victims] <= content.cached_count
            np.add.at(cell_rate_hit, vic_cell[hits], rates[hits])
            np.add.at(cell_rate_miss, vic_cell[~hits], rates[~hits])

    cell_tput, cell_backhaul = slot_throughput(
        cell_rate_hit, cell_rate_miss, pw.backhaul_capacity_bps
    )
    cache_power = pw.cache_w_per_bit * content.cached_count * content.content_bits
    cell_power = np.where(
        cell_active,
        pw.amplifier_factor * net.transmit_power_w + pw.circuit_active_w,
        pw.circuit_idle_w,
    ) + cache_power + pw.backhaul_j_per_bit * cell_backhaul

    core = layout.core_cell_indices
    row = np.array(
        [
            cell_tput[core].mean(),
            cell_backhaul[core].mean(),
            cell_power[core].mean(),
            cell_active[core].mean(),
        ]
    )
    if not want_detail:
        return row, None
    return row, SlotRealization(
        drop=drop,
        scheduled=victims,
        serving_cell=drop.serving_bs[victims] if len(victims) else np.empty(0, dtype=np.int64),
        sinr=sinr,
        rate_bps=rates,
        cache_hit=hits,
        cell_active=cell_active,
        cell_rate_hit=cell_rate_hit,
        cell_rate_miss=cell_rate_miss,
        cell_throughput=cell_tput,
        cell_backhaul=cell_backhaul,
        cell_power_w=cell_power,
    )


def realize_slot(
    net: NetworkConfig,
    pw: PowerConfig,
    content: ContentConfig,
    layout: CellLayout,
    seed: int,
    *,
    shadowing_db: float = 0.0,
    association: str = "nearest",
) -> SlotRealization:
    """Run a single fully detailed slot (drop index 0 of the given seed)."""
    _check_layout(net, layout)
    _, slot = _run_drop(
        net,
        pw,
        content,
        layout,
        _drop_rng(int(seed), 0),
        shadowing_db=shadowing_db,
        association=association,
        want_detail=True,
    )
    return slot


def _check_layout(net: NetworkConfig, layout: CellLayout):
    if layout.n_core != net.bs_count:
        raise ValueError(
            f"layout has {layout.n_core} core cells but the network config says "
            f"bs_count={net.bs_count}"
        )


def simulate(
    net: NetworkConfig,
    pw: PowerConfig,
    content: ContentConfig,
    layout: CellLayout,
    drops: int = 2000,
    seed: int = 0,
    *,
    shadowing_db: float = 0.0,
    association: str = "nearest",
    workers: int = 1,
) -> SimSummary:
    """Monte-Carlo estimate of cell throughput, backhaul rate, power and EE.

    Every drop gets its own counter-derived random stream, results are stored
    per drop index and reduced in fixed order, and the EE is the ratio of the
    mean throughput to the mean power.
    """
    _check_layout(net, layout)
    if drops < 2:
        raise ValueError("drops >= 2 required")
    seed = int(seed)
    rows = np.empty((drops, 4))

    def work(lo: int, hi: int):
        for d in range(lo, hi):
            rows[d], _ = _run_drop(
                net,
                pw,
                content,
                layout,
                _drop_rng(seed, d),
                shadowing_db=shadowing_db,
                association=association,
            )

    if workers <= 1:
        work(0, drops)
    else:
        chunk = -(-drops // workers)
        bounds = [(i, min(i + chunk, drops)) for i in range(0, drops, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: work(*b), bounds))

    mean = rows.mean(axis=0)
    stderr = rows.std(axis=0, ddof=1) / math.sqrt(drops)
    return SimSummary(
        cell_throughput_mean=float(mean[0]),
        cell_throughput_stderr=float(stderr[0]),
        backhaul_rate_mean=float(mean[1]),
        backhaul_rate_stderr=float(stderr[1]),
        power_mean=float(mean[2]),
        power_stderr=float(stderr[2]),
        active_fraction=float(mean[3]),
        ee=float(mean[0] / mean[2]),
        drops=drops,
        seed=seed,
    )


def simulate_interference_log_term(
    net: NetworkConfig,
    layout: CellLayout,
    drops: int,
    seed: int,
    beta: float | None = None,
) -> LogTermEstimate:
    """Monte-Carlo average of log2(beta*I + sigma^2/P_link) for central-cell users.

    I is the normalized interference sum (pathloss r^-alpha times per-stream
    fading through the actual ZF precoders of every active cell).  Drops
    whose central cell is empty contribute nothing; the standard error is
    taken over per-drop means.  With beta = 0 the value is deterministic.
    """
    _check_layout(net, layout)
    beta = net.interference_factor if beta is None else float(beta)
    seed = int(seed)
    center = int(layout.core_cell_indices[0])
    noise_over_p = net.noise_power_w / net.link_power_w
    per_drop = np.full(drops, np.nan)

    for d in range(drops):
        rng = _drop_rng(seed, d)
        drop = drop_users(layout, net.mean_users, _DUMMY_CONTENT, rng)
        drop = associate_nearest(drop, layout)
        sched = _schedule(drop, layout.n_cells, net.antennas, rng)
        streams_of_cell = np.bincount(drop.serving_bs[sched], minlength=layout.n_cells)
        if streams_of_cell[center] == 0:
            continue
        active_cells = np.flatnonzero(streams_of_cell)
        counts = streams_of_cell[active_cells]
        starts = np.concatenate(([0], np.cumsum(counts[:-1])))
        h_own = _complex_normal(rng, (int(counts.sum()), net.antennas))
        w_all, _ = _kernels.zf_precode(
            h_own, starts.astype(np.int64), counts.astype(np.int64)
        )

        vic_mask = drop.serving_bs[sched] == center
        victims = sched[vic_mask]
        hx = _complex_normal(rng, (len(victims), len(active_cells), net.antennas))
        delta = drop.user_positions[victims][:, None, :] - layout.bs_positions[active_cells][None, :, :]
        dist = np.sqrt(np.einsum("vjx,vjx->vj", delta, delta))
        rel_gain = dist ** (-net.pathloss_exponent)
        slot_of_center = int(np.flatnonzero(active_cells == center)[0])
        rel_gain[:, slot_of_center] = 0.0
        cell_of_stream = np.repeat(np.arange(len(active_cells)), counts)
        i_norm = _kernels.interference_power(
            hx, w_all, cell_of_stream.astype(np.int64), 1.0 / counts.astype(np.float64), rel_gain
        )
        per_drop[d] = np.log2(beta * i_norm + noise_over_p).mean()

    got = per_drop[~np.isnan(per_drop)]
    if len(got) < 2:
        raise RuntimeError("not enough drops with a non-empty central cell")
    return LogTermEstimate(
        value=float(got.mean()),
        std_error=float(got.std(ddof=1) / math.sqrt(len(got))),
        drops=int(len(got)),
        beta=beta,
    )


# requests are irrelevant to the interference statistics; a minimal catalog
# keeps the shared drop pipeline unchanged
_DUMMY_CONTENT = ContentConfig(catalog_size=2, content_bits=1.0, skew=0.0, cached_count=0)
