"""Energy efficiency of a cache-enabled multi-antenna cellular downlink.

Analytic model of per-cell throughput, power and energy efficiency for a
hexagonal network whose base stations cache the most popular contents, serve
up to N_t users with zero-forcing beamforming, and fetch cache misses over a
capacity-limited backhaul — plus closed-form optimizers for the cache size
and transmit power, and a slot-level Monte-Carlo simulator to validate the
model.  Hot simulator kernels run under numba when available; set
CACHENET_BACKEND=numpy (or numba/auto) to pick the implementation.
"""

from ._kernels import BACKEND, get_backend
from .geometry import (
    CellLayout,
    NetworkConfig,
    UserDrop,
    active_probability,
    associate_distributed,
    associate_nearest,
    build_hex_layout,
    drop_users,
    pathloss_db,
    scheduled_count_pmf,
)
from .model import (
    EEReport,
    PhiEstimate,
    PowerBreakdown,
    PowerConfig,
    RateBreakdown,
    approx_interference_log_term,
    avg_backhaul_rate,
    avg_total_power,
    cell_throughput,
    edge_rate,
    estimate_phi,
    network_ee,
    rate_cache_hit,
    rate_cache_miss,
    single_user_ee,
    single_user_rates,
)
from .optimize import (
    ConditionReport,
    JointOptimum,
    OptimumReport,
    caching_benefit_condition,
    caching_benefit_condition_infinite_backhaul,
    ee_of_eta,
    ee_of_eta_infinite,
    ee_of_power,
    grid_argmax_2d,
    grid_argmax_eta,
    joint_optimum,
    log_grid,
    max_ee_gain,
    optimal_eta,
    optimal_eta_infinite_backhaul,
    optimal_power_noise_limited,
    tradeoff_threshold,
)
from .popularity import (
    BITS_PER_MB,
    ContentConfig,
    hit_ratio,
    hit_ratio_asymptotic,
    update_energy_fraction,
    zipf_pmf,
    zipf_pmf_vector,
)
from .scenarios import (
    RunSpec,
    Scenario,
    SimOptions,
    SweepSpec,
    load_config,
    parse_config,
    preset,
    write_sweep_csv,
)
from .simulate import (
    LogTermEstimate,
    SimSummary,
    SlotRealization,
    realize_slot,
    simulate,
    simulate_interference_log_term,
    slot_sinr,
    slot_throughput,
    zfbf_precoder,
)
from .special import (
    harmonic_sum,
    lambert_w0,
    lambert_w0_log,
    lower_reg_gamma_int,
    upper_reg_gamma_int,
)

__version__ = "0.1.0"
