"""Closed-form EE optimizers: when to cache, how much to cache, how hard to transmit.

All closed forms in this module live in the single-user-per-cell regime with
unit popularity skew, where the cache hit ratio follows the asymptotic
log-law and the EE-versus-cache-fraction curve has a Lambert-W stationary
point.  Grid-search helpers are provided as independent verification oracles
and for the skewed / multi-user cases the closed forms do not cover.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import NetworkConfig, active_probability
from .model import PowerConfig, single_user_ee, single_user_rates
from .popularity import ContentConfig
from .special import harmonic_sum, lambert_w0, lambert_w0_log

__all__ = [
    "ConditionReport",
    "OptimumReport",
    "JointOptimum",
    "ee_of_eta",
    "ee_of_eta_infinite",
    "ee_of_power",
    "caching_benefit_condition",
    "caching_benefit_condition_infinite_backhaul",
    "optimal_eta",
    "optimal_eta_infinite_backhaul",
    "tradeoff_threshold",
    "max_ee_gain",
    "optimal_power_noise_limited",
    "joint_optimum",
    "grid_argmax_eta",
    "grid_argmax_2d",
    "log_grid",
]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the does-caching-help test: holds iff lhs < rhs."""

    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class OptimumReport:
    """Optimal cache fraction: the clamped optimizer and its diagnostics."""

    eta_star: float
    eta_unclamped: float
    omega: float
    maximizer_verified: bool


@dataclass(frozen=True)
class JointOptimum:
    """Jointly optimized transmit power and cache fraction."""

    power_w: float
    eta: float
    converged: bool
    iterations: int


def _require_unit_skew(content: ContentConfig):
    if content.skew != 1.0:
        raise ValueError(
            "closed-form cache optimization requires skew = 1 "
            f"(got {content.skew}); use the grid helpers for other skews"
        )


def _static_power(net: NetworkConfig, pw: PowerConfig) -> float:
    """Activity-averaged transmit+circuit power, the eta-independent part."""
    p_a = active_probability(net.mean_users, net.bs_count)
    return p_a * (pw.amplifier_factor * net.transmit_power_w + pw.circuit_active_w) + (
        1.0 - p_a
    ) * pw.circuit_idle_w


# ----------------------------------------------------------- EE objectives

def ee_of_eta(
    eta: float, net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> float:
    """Single-user EE as a function of the cache fraction eta in (0, 1].

    Uses the asymptotic skew-1 hit ratio 1 + ln(eta)/ln(N_f); exact rather
    than clamped on [1/N_f, 1], which is the domain the optimizer works on.
    """
    _require_unit_skew(content)
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    n_f = content.catalog_size
    p_a = active_probability(net.mean_users, net.bs_count)
    _, r_ca, r_bh = single_user_rates(net, pw, phi)
    p_h = 1.0 + math.log(eta) / math.log(n_f)
    num = p_a * (r_bh + (r_ca - r_bh) * p_h)
    den = (
        _static_power(net, pw)
        + pw.cache_w_per_bit * eta * n_f * content.content_bits
        - p_a * pw.backhaul_j_per_bit * r_bh * math.log(eta) / math.log(n_f)
    )
    return num / den


def ee_of_eta_infinite(
    eta: float, net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> float:
    """Same objective in the uncapped-backhaul limit (miss rate = hit rate)."""
    return ee_of_eta(
        eta, net, pw.replace(backhaul_capacity_bps=math.inf), content, phi
    )


def ee_of_power(
    power_w: float, net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> float:
    """Single-user EE as a function of the transmit power (bit/J)."""
    if power_w <= 0:
        raise ValueError(f"power_w must be positive, got {power_w}")
    report = single_user_ee(net.replace(transmit_power_w=power_w), pw, content, phi)
    return report.ee_bits_per_joule


# ------------------------------------------------------ caching conditions

def caching_benefit_condition(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> ConditionReport:
    """Does caching the most popular file improve EE over caching nothing?

    Compares the marginal cache power (lhs) against the saved backhaul power
    plus the rate advantage of serving hits at the uncapped radio rate (rhs).
    With a zero-capacity backhaul the rhs is unbounded: caching always helps.
    """
    _require_unit_skew(content)
    lhs = pw.cache_w_per_bit * content.content_bits * harmonic_sum(content.catalog_size, 1.0)
    if pw.backhaul_capacity_bps == 0.0:
        return ConditionReport(lhs=lhs, rhs=math.inf, holds=True)
    p_a = active_probability(net.mean_users, net.bs_count)
    _, r_ca, r_bh = single_user_rates(net, pw, phi)
    rhs = (r_ca / r_bh - 1.0) * _static_power(net, pw) + p_a * pw.backhaul_j_per_bit * r_ca
    return ConditionReport(lhs=lhs, rhs=rhs, holds=bool(lhs < rhs))


def caching_benefit_condition_infinite_backhaul(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> ConditionReport:
    """Benefit condition in the uncapped-backhaul limit: cache power per file
    versus the backhaul energy it saves."""
    return caching_benefit_condition(
        net, pw.replace(backhaul_capacity_bps=math.inf), content, phi
    )


# ------------------------------------------------------- cache-size optima

def optimal_eta(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> OptimumReport:
    """Cache fraction maximizing the single-user EE (finite backhaul).

    The stationary point is Omega / (N_f * W(Omega * e^(q ln N_f - 1))) with
    q the miss/headroom rate ratio; the W argument is handled in log space
    because it overflows for nearly-saturating backhaul.  Falls back to the
    uncapped-backhaul formula when hit and miss rates coincide.
    """
    _require_unit_skew(content)
    _, r_ca, r_bh = single_user_rates(net, pw, phi)
    if r_bh >= r_ca * (1.0 - 1e-12):
        return optimal_eta_infinite_backhaul(net, pw, content, phi)
    n_f = content.catalog_size
    p_a = active_probability(net.mean_users, net.bs_count)
    omega = (
        (r_ca * r_bh / (r_ca - r_bh)) * pw.backhaul_j_per_bit * p_a
        + _static_power(net, pw)
    ) / (pw.cache_w_per_bit * content.content_bits)
    log_arg = math.log(omega) - 1.0 + (r_bh / (r_ca - r_bh)) * math.log(n_f)
    eta0 = omega / (n_f * lambert_w0_log(log_arg))
    eta_star = min(eta0, 1.0)
    verified = _verify_eta_maximizer(eta_star, eta0, net, pw, content, phi, ee_of_eta)
    return OptimumReport(
        eta_star=eta_star, eta_unclamped=eta0, omega=omega, maximizer_verified=verified
    )


def optimal_eta_infinite_backhaul(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> OptimumReport:
    """Cache fraction maximizing EE with an uncapped backhaul.

    Balances the marginal cache power against the marginal saved backhaul
    energy: eta_0 = p_a * w_bh * R_ca / (w_ca * F * N_f * ln N_f).  The
    Lambert-W machinery of the finite-backhaul case degenerates here (omega
    is reported as inf).
    """
    _require_unit_skew(content)
    pw_inf = pw.replace(backhaul_capacity_bps=math.inf)
    _, r_ca, _ = single_user_rates(net, pw_inf, phi)
    n_f = content.catalog_size
    p_a = active_probability(net.mean_users, net.bs_count)
    eta0 = (
        p_a
        * pw.backhaul_j_per_bit
        * r_ca
        / (pw.cache_w_per_bit * content.content_bits * n_f * math.log(n_f))
    )
    eta_star = min(eta0, 1.0)
    verified = _verify_eta_maximizer(
        eta_star, eta0, net, pw_inf, content, phi, ee_of_eta
    )
    return OptimumReport(
        eta_star=eta_star, eta_unclamped=eta0, omega=math.inf, maximizer_verified=verified
    )


def _verify_eta_maximizer(eta_star, eta0, net, pw, content, phi, objective) -> bool:
    """Cheap sanity probe: the objective at eta_star beats nearby samples."""
    lo = 1.0 / content.catalog_size
    best = objective(min(max(eta_star, lo), 1.0), net, pw, content, phi)
    for probe in (0.5 * eta0, 2.0 * eta0):
        probe = min(max(probe, lo), 1.0)
        if objective(probe, net, pw, content, phi) > best * (1.0 + 1e-9):
            return False
    return True


def tradeoff_threshold(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> float:
    """Largest catalog size for which filling the whole cache stays optimal.

    Below the threshold the unclamped optimizer sits at or above eta = 1
    (EE keeps growing with cache size); above it an interior optimum appears.
    Uses the uncapped-backhaul rates: N_th = exp(W(p_a w_bh R_ca / (w_ca F))).
    """
    _require_unit_skew(content)
    pw_inf = pw.replace(backhaul_capacity_bps=math.inf)
    _, r_ca, _ = single_user_rates(net, pw_inf, phi)
    p_a = active_probability(net.mean_users, net.bs_count)
    x = p_a * pw.backhaul_j_per_bit * r_ca / (pw.cache_w_per_bit * content.content_bits)
    return math.exp(lambert_w0(x))


def max_ee_gain(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig, phi
) -> float:
    """Ratio of the EE at the optimal cache fraction to the EE without caching
    (uncapped backhaul).  Requires backhaul_capacity_bps = inf."""
    _require_unit_skew(content)
    if not math.isinf(pw.backhaul_capacity_bps):
        raise ValueError("max_ee_gain is defined for backhaul_capacity_bps = inf")
    _, r_ca, _ = single_user_rates(net, pw, phi)
    p_a = active_probability(net.mean_users, net.bs_count)
    n_f = content.catalog_size
    log_n = math.log(n_f)
    backhaul_no_cache = p_a * pw.backhaul_j_per_bit * r_ca  # W spent on misses at eta=0
    g_num = (
        math.log(backhaul_no_cache / (pw.cache_w_per_bit * content.content_bits * log_n))
        - 1.0
    ) / log_n
    g_den = _static_power(net, pw) / backhaul_no_cache + 1.0
    return 1.0 / (1.0 - g_num / g_den)


# ---------------------------------------------------------- power optimum

def _optimal_power_for_cache_power(
    net: NetworkConfig, pw: PowerConfig, cache_power_w: float
) -> float:
    p_a = active_probability(net.mean_users, net.bs_count)
    fixed = p_a * pw.circuit_active_w + (1.0 - p_a) * pw.circuit_idle_w + cache_power_w
    alpha = net.pathloss_exponent
    intercept = 10.0 ** (-net.pathloss_ref_db / 10.0)
    noise = net.cell_radius_m**alpha * net.noise_power_w
    arg = (
        net.antennas
        * intercept
        * fixed
        * math.exp(0.5 * alpha - 1.0)
        / (p_a * pw.amplifier_factor * noise)
    )
    return fixed / (p_a * pw.amplifier_factor * lambert_w0(arg))


def optimal_power_noise_limited(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig
) -> float:
    """Transmit power maximizing the noise-limited single-user EE.

    Solves the stationarity condition balancing the marginal rate B/(P ln 2)
    against the amplifier draw; the backhaul power terms cancel out of the
    stationarity equation, so the result holds for any cache fraction.
    Requires interference_factor = 0 (the noise-limited regime) and assumes
    the backhaul never caps the miss rate -- with a binding rate cap the
    stationarity point shifts and this closed form is only a starting guess.
    """
    if net.interference_factor != 0.0:
        raise ValueError(
            "optimal_power_noise_limited requires interference_factor = 0; "
            "with interference the EE has no interior optimum in P"
        )
    cache_power = pw.cache_w_per_bit * content.cached_count * content.content_bits
    return _optimal_power_for_cache_power(net, pw, cache_power)


def joint_optimum(
    net: NetworkConfig, pw: PowerConfig, content: ContentConfig
) -> JointOptimum:
    """Alternate the two closed-form optima until (P, eta) stops moving.

    Noise-limited, uncapped backhaul, unit skew.  Oscillations are damped by
    halving the power step; if 300 rounds do not reach 1e-6 relative change,
    the result falls back to a 200x200 grid search and is flagged.
    """
    _require_unit_skew(content)
    if net.interference_factor != 0.0:
        raise ValueError("joint_optimum requires interference_factor = 0")
    if not math.isinf(pw.backhaul_capacity_bps):
        raise ValueError("joint_optimum requires backhaul_capacity_bps = inf")

    n_f = content.catalog_size
    bits = content.content_bits
    p_a = active_probability(net.mean_users, net.bs_count)

    def eta_of_power(p_w: float) -> float:
        _, r_ca, _ = single_user_rates(
            net.replace(transmit_power_w=p_w), pw, 0.0
        )
        eta0 = p_a * pw.backhaul_j_per_bit * r_ca / (
            pw.cache_w_per_bit * bits * n_f * math.log(n_f)
        )
        return min(1.0, max(1.0 / n_f, eta0))

    power = net.transmit_power_w
    eta = eta_of_power(power)
    prev_step = 0.0
    for iteration in range(1, 301):
        new_power = _optimal_power_for_cache_power(
            net, pw, pw.cache_w_per_bit * eta * n_f * bits
        )
        step = new_power - power
        if prev_step * step < 0.0:  # oscillating: damp
            new_power = power + 0.5 * step
            step = 0.5 * step
        new_eta = eta_of_power(new_power)
        moved = abs(step) / max(new_power, 1e-300) + abs(new_eta - eta) / max(new_eta, 1e-300)
        power, eta, prev_step = new_power, new_eta, step
        if moved < 1e-6:
            return JointOptimum(power_w=power, eta=eta, converged=True, iterations=iteration)

    powers = log_grid(net.transmit_power_w * 1e-3, net.transmit_power_w * 1e3, 200)
    etas = log_grid(1.0 / n_f, 1.0, 200)
    p_hat, eta_hat = grid_argmax_2d(
        lambda p, e: ee_of_eta_infinite(
            e, net.replace(transmit_power_w=p), pw, content, 0.0
        ),
        powers,
        etas,
    )
    return JointOptimum(power_w=p_hat, eta=eta_hat, converged=False, iterations=300)


# ------------------------------------------------------------ grid oracles

def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Log-spaced grid from lo to hi inclusive."""
    if not 0 < lo < hi or n < 2:
        raise ValueError("need 0 < lo < hi and n >= 2")
    return np.geomspace(lo, hi, n)


def grid_argmax_eta(objective, etas) -> float:
    """Grid argmax over eta; ties resolve to the first (smallest) grid point."""
    etas = np.asarray(etas, dtype=np.float64)
    values = np.array([objective(float(e)) for e in etas])
    return float(etas[int(np.argmax(values))])


def grid_argmax_2d(objective, powers, etas) -> tuple[float, float]:
    """Grid argmax of objective(power, eta); first maximum in row-major order."""
    powers = np.asarray(powers, dtype=np.float64)
    etas = np.asarray(etas, dtype=np.float64)
    values = np.empty((len(powers), len(etas)))
    for i, p in enumerate(powers):
        for j, e in enumerate(etas):
            values[i, j] = objective(float(p), float(e))
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    return float(powers[i]), float(etas[j])
