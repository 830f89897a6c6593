"""Hexagonal network layout, user dropping, association and scheduling statistics.

The network is a triangular lattice of base stations, each serving a regular
hexagonal cell of circumradius D (flat sides facing the six neighbors, BS
spacing sqrt(3)*D).  A block of inner "core" tiers is measured; at least
three further "guard" tiers are kept populated and transmitting so that core
cells see realistic interference from all directions.

Users form a PPP: per-cell counts are i.i.d. Poisson with mean lambda/N_b
(lambda is the mean user count over the core region), positions are uniform
within each hexagon, and each user requests one file drawn from the Zipf
popularity law.
"""

import math
from dataclasses import dataclass, replace as _dc_replace

import numpy as np

from .popularity import ContentConfig, zipf_pmf_vector

# outward normals of the three hexagon slab directions (0, 60, 120 degrees)
_HEX_NORMALS = np.array(
    [[1.0, 0.0], [0.5, 0.5 * math.sqrt(3.0)], [-0.5, 0.5 * math.sqrt(3.0)]]
)


@dataclass(frozen=True)
class NetworkConfig:
    """Radio-side parameters of the cellular downlink.

    Attributes:
        bs_count: number of measured (core) cells N_b.
        antennas: transmit antennas per BS; also the max users served per slot.
        cell_radius_m: hexagon circumradius D in meters.
        bandwidth_hz: downlink bandwidth B.
        pathloss_exponent: distance exponent alpha (> 2).
        noise_power_w: receiver noise power sigma^2 in watts.
        mean_users: mean number of users over the core region (lambda).
        interference_factor: inter-cell interference scale beta in [0, 1]
            (0 = perfectly orthogonalized, 1 = fully interfering).
        transmit_power_w: per-BS transmit power P, watts (consumed power).
        pathloss_ref_db: pathloss at 1 m reference distance, dB.  The link
            budget uses P * 10^(-pathloss_ref_db/10) * r^-alpha; the power
            model keeps the raw P.
    """

    bs_count: int
    antennas: int
    cell_radius_m: float
    bandwidth_hz: float
    pathloss_exponent: float
    noise_power_w: float
    mean_users: float
    interference_factor: float
    transmit_power_w: float
    pathloss_ref_db: float = 0.0

    def __post_init__(self):
        if self.bs_count < 1 or self.antennas < 1:
            raise ValueError("bs_count and antennas must be >= 1")
        if self.pathloss_exponent <= 2.0:
            raise ValueError(
                f"pathloss_exponent > 2 required, got {self.pathloss_exponent}"
            )
        if not 0.0 <= self.interference_factor <= 1.0:
            raise ValueError(
                f"interference_factor in [0, 1] required, got {self.interference_factor}"
            )
        for name in ("cell_radius_m", "bandwidth_hz", "noise_power_w", "transmit_power_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.mean_users < 0:
            raise ValueError("mean_users must be >= 0")

    @property
    def load(self) -> float:
        """Mean users per cell, lambda / N_b."""
        return self.mean_users / self.bs_count

    @property
    def link_power_w(self) -> float:
        """Transmit power folded with the 1 m pathloss intercept."""
        return self.transmit_power_w * 10.0 ** (-self.pathloss_ref_db / 10.0)

    def replace(self, **kw) -> "NetworkConfig":
        return _dc_replace(self, **kw)


@dataclass(frozen=True)
class CellLayout:
    """Geometry of the simulated lattice.

    ``bs_positions`` is (n_cells, 2) in meters, ``axial_coords`` the integer
    lattice coordinates (q, r) of each cell (position = spacing * (q + r/2,
    r*sqrt(3)/2)).  Core cells are measured; guard cells only generate load
    and interference.
    """

    bs_positions: np.ndarray
    axial_coords: np.ndarray
    core_cell_indices: np.ndarray
    guard_cell_indices: np.ndarray
    cell_radius_m: float

    @property
    def n_cells(self) -> int:
        return len(self.bs_positions)

    @property
    def n_core(self) -> int:
        return len(self.core_cell_indices)

    @property
    def spacing_m(self) -> float:
        return math.sqrt(3.0) * self.cell_radius_m

    def colors(self) -> np.ndarray:
        """A proper 3-coloring of the lattice: (q + 2r) mod 3."""
        q = self.axial_coords[:, 0]
        r = self.axial_coords[:, 1]
        return ((q + 2 * r) % 3).astype(np.int64)

    def adjacent_pairs(self) -> np.ndarray:
        """(m, 2) index pairs of neighboring cells (center distance = spacing)."""
        ax = self.axial_coords
        index = {(int(q), int(r)): i for i, (q, r) in enumerate(ax)}
        pairs = []
        for i, (q, r) in enumerate(ax):
            for dq, dr in ((1, 0), (0, 1), (-1, 1)):
                j = index.get((int(q) + dq, int(r) + dr))
                if j is not None:
                    pairs.append((i, j))
        return np.array(pairs, dtype=np.int64)

    def cache_key(self) -> tuple:
        return (
            self.n_cells,
            self.n_core,
            round(self.cell_radius_m, 9),
            int(self.axial_coords[:, 0].min()),
            int(self.axial_coords[:, 0].max()),
        )


@dataclass
class UserDrop:
    """One realization of user positions, associations and requests.

    ``serving_bs`` is -1 until an association rule has been applied.
    ``cell_of_user`` is the index of the hexagon each user was dropped in.
    """

    user_positions: np.ndarray
    serving_bs: np.ndarray
    requested_content: np.ndarray
    cell_of_user: np.ndarray

    @property
    def n_users(self) -> int:
        return len(self.user_positions)


def build_hex_layout(
    core_tiers: int, guard_tiers: int = 3, cell_radius_m: float = 1.0
) -> CellLayout:
    """Build a hexagonal lattice with ``core_tiers`` measured rings around the
    center cell plus ``guard_tiers`` additional interference-only rings.

    Ring 0 is the center cell alone; ring n >= 1 holds 6n cells, so
    core_tiers = 3 gives the usual 37-cell measured region.
    """
    if core_tiers < 0:
        raise ValueError("core_tiers must be >= 0")
    if guard_tiers < 3:
        raise ValueError(f"guard_tiers >= 3 required for interference fidelity, got {guard_tiers}")
    total = core_tiers + guard_tiers
    axial = []
    rings = []
    for q in range(-total, total + 1):
        for r in range(-total, total + 1):
            ring = max(abs(q), abs(r), abs(q + r))  # hex (cube) distance from origin
            if ring <= total:
                axial.append((q, r))
                rings.append(ring)
    axial = np.array(axial, dtype=np.int64)
    rings = np.array(rings, dtype=np.int64)
    # sort by ring, then lexicographically, so cell 0 is the center cell
    order = np.lexsort((axial[:, 1], axial[:, 0], rings))
    axial = axial[order]
    rings = rings[order]
    spacing = math.sqrt(3.0) * cell_radius_m
    positions = np.empty((len(axial), 2))
    positions[:, 0] = spacing * (axial[:, 0] + 0.5 * axial[:, 1])
    positions[:, 1] = spacing * (0.5 * math.sqrt(3.0)) * axial[:, 1]
    core = np.flatnonzero(rings <= core_tiers)
    guard = np.flatnonzero(rings > core_tiers)
    return CellLayout(
        bs_positions=positions,
        axial_coords=axial,
        core_cell_indices=core,
        guard_cell_indices=guard,
        cell_radius_m=float(cell_radius_m),
    )


def in_hexagon(points: np.ndarray, center: np.ndarray, cell_radius_m: float) -> np.ndarray:
    """Boolean mask: which points lie in the hexagon around ``center``."""
    rel = np.atleast_2d(points) - center
    half_width = 0.5 * math.sqrt(3.0) * cell_radius_m
    proj = np.abs(rel @ _HEX_NORMALS.T)
    return np.all(proj <= half_width + 1e-9 * cell_radius_m, axis=1)


def pathloss_db(distance_m, ref_db: float = 30.6, exponent: float = 3.67):
    """Distance pathloss in dB: ref_db + 10*exponent*log10(r)."""
    return ref_db + 10.0 * exponent * np.log10(distance_m)


def _poisson_inversion(rng: np.random.Generator, mean: float, size: int) -> np.ndarray:
    """Poisson draws by CDF inversion (stable across platforms for small means)."""
    u = rng.random(size)
    out = np.zeros(size, dtype=np.int64)
    p = math.exp(-mean)
    cdf = np.full(size, p)
    k = 0
    term = np.full(size, p)
    active = u >= cdf
    while active.any():
        k += 1
        if k > 60 + int(10 * mean):  # numerical tail guard
            out[active] = k
            break
        term = term * (mean / k)
        cdf = cdf + term
        out[active] = k
        active = u >= cdf
    return out


def _uniform_in_hex(rng: np.random.Generator, n: int, cell_radius_m: float) -> np.ndarray:
    """n points uniform in the origin-centered hexagon, by batched rejection."""
    half_width = 0.5 * math.sqrt(3.0) * cell_radius_m
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        m = max(16, int(1.5 * (n - filled)) + 4)
        cand = rng.random((m, 2))
        cand[:, 0] = (2.0 * cand[:, 0] - 1.0) * half_width
        cand[:, 1] = (2.0 * cand[:, 1] - 1.0) * cell_radius_m
        proj = np.abs(cand @ _HEX_NORMALS[1:].T)  # |x| <= half_width holds by design
        good = cand[np.all(proj <= half_width, axis=1)]
        take = min(len(good), n - filled)
        out[filled : filled + take] = good[:take]
        filled += take
    return out


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def drop_users(
    layout: CellLayout, mean_users: float, content: ContentConfig, seed
) -> UserDrop:
    """Sample one PPP user drop over the full lattice.

    Cell counts are Poisson with mean ``mean_users / n_core`` in *every* cell
    (core and guard), so the user count over the core region has mean
    ``mean_users``.  ``seed`` may be an int or a ``numpy.random.Generator``.
    Association is left unset (serving_bs = -1).
    """
    rng = _as_rng(seed)
    per_cell = mean_users / layout.n_core
    counts = _poisson_inversion(rng, per_cell, layout.n_cells)
    total = int(counts.sum())
    cell_of_user = np.repeat(np.arange(layout.n_cells), counts)
    positions = _uniform_in_hex(rng, total, layout.cell_radius_m)
    positions += layout.bs_positions[cell_of_user]
    cdf = np.cumsum(zipf_pmf_vector(content))
    ranks = np.searchsorted(cdf, rng.random(total), side="right") + 1
    ranks = np.minimum(ranks, content.catalog_size).astype(np.int64)
    return UserDrop(
        user_positions=positions,
        serving_bs=np.full(total, -1, dtype=np.int64),
        requested_content=ranks,
        cell_of_user=cell_of_user,
    )


def associate_nearest(drop: UserDrop, layout: CellLayout) -> UserDrop:
    """Associate each user with the nearest BS (ties -> lowest BS index)."""
    if drop.n_users == 0:
        return _dc_replace(drop, serving_bs=drop.serving_bs.copy())
    delta = drop.user_positions[:, None, :] - layout.bs_positions[None, :, :]
    dist2 = np.einsum("ukx,ukx->uk", delta, delta)
    return _dc_replace(drop, serving_bs=np.argmin(dist2, axis=1).astype(np.int64))


def associate_distributed(
    drop: UserDrop,
    layout: CellLayout,
    cache_assignment: np.ndarray,
    content: ContentConfig,
) -> UserDrop:
    """Distributed-caching association.

    ``cache_assignment`` labels every cell with a class in {0, 1, 2}; class c
    caches the ranks f <= 3*cached_count with (f-1) mod 3 == c, so any point
    can reach 3x more distinct cached files than a single cell holds.  A user
    requesting a cached rank goes to the nearest BS of the matching class;
    everyone else goes to the plain nearest BS.  The assignment must be a
    proper coloring (no two adjacent cells share a class).
    """
    labels = np.asarray(cache_assignment)
    if labels.shape != (layout.n_cells,):
        raise ValueError(
            f"cache_assignment must have shape ({layout.n_cells},), got {labels.shape}"
        )
    if not np.isin(labels, (0, 1, 2)).all():
        raise ValueError("cache_assignment labels must be in {0, 1, 2}")
    pairs = layout.adjacent_pairs()
    if (labels[pairs[:, 0]] == labels[pairs[:, 1]]).any():
        raise ValueError("cache_assignment is not a proper coloring: adjacent cells share a class")
    if drop.n_users == 0:
        return _dc_replace(drop, serving_bs=drop.serving_bs.copy())

    delta = drop.user_positions[:, None, :] - layout.bs_positions[None, :, :]
    dist2 = np.einsum("ukx,ukx->uk", delta, delta)
    serving = np.argmin(dist2, axis=1).astype(np.int64)
    reachable = 3 * content.cached_count
    cached_req = drop.requested_content <= reachable
    if content.cached_count > 0 and cached_req.any():
        req_class = (drop.requested_content[cached_req] - 1) % 3
        masked = dist2[cached_req].copy()
        masked[req_class[:, None] != labels[None, :]] = np.inf
        serving[cached_req] = np.argmin(masked, axis=1)
    return _dc_replace(drop, serving_bs=serving)


def scheduled_count_pmf(mean_users: float, bs_count: int, antennas: int) -> np.ndarray:
    """Pmf of the number of users served per cell and slot.

    Per-cell user counts are Poisson(mean_users / bs_count); a BS serves all
    of them up to the antenna count, so the pmf is the truncated Poisson with
    the tail mass lumped at ``antennas``.
    """
    load = mean_users / bs_count
    pmf = np.zeros(antennas + 1)
    term = math.exp(-load)
    acc = term
    pmf[0] = term
    for k in range(1, antennas):
        term *= load / k
        pmf[k] = term
        acc += term
    pmf[antennas] = max(0.0, 1.0 - acc)
    return pmf


def active_probability(mean_users: float, bs_count: int) -> float:
    """Probability a cell has at least one user to serve: 1 - exp(-load)."""
    return -math.expm1(-mean_users / bs_count)
