"""Scalar special functions for the closed-form rate and caching expressions.

Everything here is deliberately dependency-free (stdlib ``math`` only) so the
closed-form layer stays cheap to import and trivially portable.  The functions
are restricted to the regimes the model actually needs: principal-branch
Lambert W on [-1/e, inf), regularized incomplete gammas at *integer* shape
(where they reduce to finite Poisson sums), and generalized harmonic numbers.
"""

import math
from functools import lru_cache

__all__ = [
    "lambert_w0",
    "lambert_w0_log",
    "upper_reg_gamma_int",
    "lower_reg_gamma_int",
    "harmonic_sum",
]

_INV_E = math.exp(-1.0)


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert W function.

    Solves w * exp(w) = x for x >= -1/e.  Halley iteration seeded with
    log1p(x); falls back to bisection if the iteration misbehaves (it does
    not, in practice, but the fallback keeps the function total on its
    domain).  Residual |w e^w - x| <= 1e-14 * |x|.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w0: x is NaN")
    if x < -_INV_E - 1e-12:
        raise ValueError(f"lambert_w0: x={x!r} below -1/e, no real principal branch")
    if x <= -_INV_E:
        return -1.0
    if x == 0.0:
        return 0.0

    w = math.log1p(x)  # exact at x=0, decent everywhere on the domain
    tol = 1e-14 * abs(x)
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol:
            return w
        wp1 = w + 1.0
        # Halley step: f' = e^w (w+1), f'' = e^w (w+2)
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if not math.isfinite(w):
            break
    return _lambert_bisect(x)


def _lambert_bisect(x: float) -> float:
    lo, hi = -1.0, 1.0
    while hi * math.exp(hi) < x:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambert_w0_log(log_x: float) -> float:
    """W0(exp(log_x)) without forming exp(log_x).

    Needed by the cache-fraction optimum, whose W argument grows like
    N_f^(rate ratio) and overflows float64 long before the optimum stops
    being well defined.  For moderate arguments this defers to
    :func:`lambert_w0`; for large ones it solves w + log(w) = log_x by
    Newton iteration (quadratic, seeded with the standard asymptotic).
    """
    t = float(log_x)
    if t <= 30.0:
        return lambert_w0(math.exp(t))
    w = t - math.log(t)
    for _ in range(40):
        g = w + math.log(w) - t
        if abs(g) <= 1e-14 * t:
            break
        w -= g * w / (w + 1.0)
    return w


def _check_shape(k) -> int:
    ki = int(k)
    if ki != k or ki < 1:
        raise ValueError(f"integer shape k >= 1 required, got {k!r}")
    return ki


def upper_reg_gamma_int(k, x: float) -> float:
    """Regularized upper incomplete gamma Q(k, x) for integer shape k >= 1.

    Reduces to the Poisson tail identity Q(k, x) = e^-x * sum_{i<k} x^i/i!,
    evaluated with compensated summation.  For very large x the sum is done
    in log space to dodge intermediate overflow.
    """
    ki = _check_shape(k)
    x = float(x)
    if x < 0.0:
        raise ValueError(f"x >= 0 required, got {x!r}")
    if x == 0.0:
        return 1.0
    if x > 500.0:
        # log-space evaluation: terms -x + i log x - log i!
        logs = []
        lg = 0.0  # log(i!)
        for i in range(ki):
            if i > 0:
                lg += math.log(i)
            logs.append(i * math.log(x) - lg)
        m = max(logs)
        if m - x < -745.0:
            return 0.0
        return math.exp(m - x) * math.fsum(math.exp(v - m) for v in logs)
    terms = [1.0]
    t = 1.0
    for i in range(1, ki):
        t *= x / i
        terms.append(t)
    return math.exp(-x) * math.fsum(terms)


def lower_reg_gamma_int(k, x: float) -> float:
    """Regularized lower incomplete gamma P(k, x) = 1 - Q(k, x), exactly."""
    return 1.0 - upper_reg_gamma_int(k, x)


@lru_cache(maxsize=256)
def harmonic_sum(n: int, delta: float) -> float:
    """Generalized harmonic number H(n, delta) = sum_{f=1..n} f^-delta."""
    ni = int(n)
    if ni != n or ni < 1:
        raise ValueError(f"integer n >= 1 required, got {n!r}")
    d = float(delta)
    if d < 0.0:
        raise ValueError(f"delta >= 0 required, got {delta!r}")
    if d == 0.0:
        return float(ni)
    return math.fsum(f ** -d for f in range(1, ni + 1))
