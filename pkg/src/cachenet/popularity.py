"""Content catalog, request popularity and cache hit statistics.

Requests follow a Zipf law over a static catalog of equally sized files.
Every base station caches the same top-ranked files, so the cache hit ratio
is simply the popularity mass of the cached prefix.  The module also carries
the asymptotic (skew = 1) hit-ratio scaling used by the cache-sizing closed
forms, and the bookkeeping for how much energy periodic cache refreshes cost.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .special import harmonic_sum

BITS_PER_MB = 8e6  # catalog sizes are quoted in MB = 10^6 bytes


@dataclass(frozen=True)
class ContentConfig:
    """Request popularity and per-BS cache contents.

    Attributes:
        catalog_size: number of distinct cacheable files.
        content_bits: size of each file in bits (all files equal).
        skew: Zipf exponent of the request popularity, >= 0.
        cached_count: files cached at every BS, 0 <= cached_count <= catalog_size.
    """

    catalog_size: int
    content_bits: float
    skew: float
    cached_count: int

    def __post_init__(self):
        if self.catalog_size < 1:
            raise ValueError(f"catalog_size >= 1 required, got {self.catalog_size}")
        if self.content_bits <= 0:
            raise ValueError(f"content_bits > 0 required, got {self.content_bits}")
        if self.skew < 0:
            raise ValueError(f"skew >= 0 required, got {self.skew}")
        if not 0 <= self.cached_count <= self.catalog_size:
            raise ValueError(
                f"cached_count must lie in [0, {self.catalog_size}], got {self.cached_count}"
            )

    @property
    def cache_fraction(self) -> float:
        return self.cached_count / self.catalog_size

    def with_cached_count(self, cached_count: int) -> "ContentConfig":
        return replace(self, cached_count=int(cached_count))

    def with_cache_fraction(self, fraction: float) -> "ContentConfig":
        return replace(self, cached_count=int(round(fraction * self.catalog_size)))


def zipf_pmf(rank: int, content: ContentConfig) -> float:
    """Request probability of the file at popularity rank f (1-based)."""
    if not 1 <= rank <= content.catalog_size:
        raise ValueError(f"rank must lie in [1, {content.catalog_size}], got {rank}")
    return rank ** -content.skew / harmonic_sum(content.catalog_size, content.skew)


_PMF_CACHE: dict[tuple[int, float], np.ndarray] = {}


def zipf_pmf_vector(content: ContentConfig) -> np.ndarray:
    """Full popularity pmf as a vector indexed by rank-1 (cached per catalog)."""
    key = (content.catalog_size, content.skew)
    pmf = _PMF_CACHE.get(key)
    if pmf is None:
        ranks = np.arange(1, content.catalog_size + 1, dtype=np.float64)
        weights = ranks ** -content.skew
        pmf = weights / harmonic_sum(content.catalog_size, content.skew)
        if len(_PMF_CACHE) > 8:
            _PMF_CACHE.clear()
        _PMF_CACHE[key] = pmf
    return pmf


def hit_ratio(content: ContentConfig) -> float:
    """Probability that a request falls in the cached top-ranked prefix."""
    if content.cached_count == 0:
        return 0.0
    return harmonic_sum(content.cached_count, content.skew) / harmonic_sum(
        content.catalog_size, content.skew
    )


def hit_ratio_asymptotic(cache_fraction: float, catalog_size: int) -> float:
    """Large-catalog hit ratio 1 + ln(eta)/ln(N_f) for skew = 1, clamped to [0, 1].

    Valid when both the cache and the catalog are large; the clamp keeps the
    expression usable down to eta = 0 (empty cache) and above eta = 1.
    """
    if not 0.0 <= cache_fraction:
        raise ValueError(f"cache_fraction >= 0 required, got {cache_fraction}")
    if catalog_size < 2:
        raise ValueError("catalog_size >= 2 required for the asymptotic form")
    if cache_fraction == 0.0:
        return 0.0
    return min(1.0, max(0.0, 1.0 + math.log(cache_fraction) / math.log(catalog_size)))


def update_energy_fraction(
    update_fraction: float,
    period_s: float,
    bs_count: int,
    content: ContentConfig,
    backhaul_j_per_bit: float,
    network_avg_power_w: float,
) -> float:
    """Share of the network energy budget spent refreshing the caches.

    A fraction ``update_fraction`` of every cache is replaced over the
    backhaul once per ``period_s``.  ``network_avg_power_w`` is the average
    *network-wide* power (all BSs summed); the result is the ratio of update
    energy to total energy over one period.
    """
    if update_fraction < 0 or period_s <= 0 or network_avg_power_w <= 0:
        raise ValueError("need update_fraction >= 0, period_s > 0, positive power")
    update_bits = update_fraction * bs_count * content.cached_count * content.content_bits
    return update_bits * backhaul_j_per_bit / (period_s * network_avg_power_w)
