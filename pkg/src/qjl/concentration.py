"""Concentration bounds, design-parameter formulas, and empirical checks.

Anything that behaves like a TPE parameter lambda is handled as a natural
log, because realistic values underflow double precision.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .parallel import map_trials

WILSON_CONFIDENCE = 0.99
MAX_EMPIRICAL_M = 16


def _positive_eps(eps: float):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")


class ChiSquareBound(NamedTuple):
    sharp: float
    simplified: float | None


def chi_square_tail_bound_log(n: int, eps: float) -> float:
    """Log of ``2 (exp(-eps/2) sqrt(1+eps))^n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _positive_eps(eps)
    return math.log(2.0) + n * (-eps / 2 + 0.5 * math.log1p(eps))


def chi_square_tail_bound(n: int, eps: float) -> ChiSquareBound:
    """Bound on ``P[sum of n squared Gaussians outside (1 +- eps) n]``.

    ``simplified`` (``2 exp(-eps^2 n / 8)``) is only valid, and only returned,
    for ``eps <= 1``.
    """
    sharp = math.exp(chi_square_tail_bound_log(n, eps))
    simplified = 2.0 * math.exp(-(eps**2) * n / 8) if eps <= 1 else None
    return ChiSquareBound(sharp, simplified)


def haar_projection_tail_bound(d2: int, eps: float) -> float:
    """``4 exp(-eps^2 d2 / 16)``, for any ``eps > 0``."""
    if d2 < 1:
        raise ValueError("d2 must be positive")
    _positive_eps(eps)
    return 4.0 * math.exp(-(eps**2) * d2 / 16)


def haar_projection_upper_tail_bound(d2: int, eps: float) -> float:
    """Sharper ``2 exp(-eps^2 d2 / 4)`` that holds when ``eps > 1``."""
    if not eps > 1:
        raise ValueError("the upper-tail branch needs eps > 1")
    return 2.0 * math.exp(-(eps**2) * d2 / 4)


def design_projection_tail_bound_log(d2: int, eps: float) -> float:
    if d2 < 1:
        raise ValueError("d2 must be positive")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return 6 * math.log(2.0) - (eps**2) * d2 / 1024


def design_projection_tail_bound(d2: int, eps: float) -> float:
    """``64 exp(-eps^2 d2 / 1024)`` for a unitary drawn from a suitable TPE."""
    return math.exp(design_projection_tail_bound_log(d2, eps))


def moment_bound_f_log(d1: int, m: int) -> float:
    if m < 1:
        raise ValueError("m must be at least 1")
    return math.log(4.0) + m * math.log(16 * m / d1)


def moment_bound_f(d1: int, m: int) -> float:
    """Haar bound ``4 (16 m / d1)^m`` on ``E[f^{2m}]``, ``f = |Pi U v| - sqrt(d2/d1)``."""
    return math.exp(moment_bound_f_log(d1, m))


def moment_bound_g_log(d1: int, d2: int, m: int) -> float:
    if m < 1:
        raise ValueError("m must be at least 1")
    if not d2 < d1:
        raise ValueError("need d2 < d1")
    ld1, ld2 = math.log(d1), math.log(d2)
    first = math.log(16.0) + m * (math.log(64 * m) + ld2 - 2 * ld1)
    second = math.log(16.0) + m * (math.log(64.0) + 2 * ld2 - 2 * ld1) - d2 / 4
    return float(np.logaddexp(first, second))


def moment_bound_g(d1: int, d2: int, m: int) -> float:
    """Haar bound on ``E[g^{2m}]``, ``g = |Pi U v|^2 - d2/d1``:

    ``16 (64 m d2 / d1^2)^m + 16 (64 d2^2 / d1^2)^m exp(-d2/4)``.
    """
    return math.exp(moment_bound_g_log(d1, d2, m))


def tpe_moment_gap_bound(d2: int, m: int, lambda_log: float) -> float:
    """Log of ``d2^m * lambda``: how far a TPE can move ``E[g^{2m}]`` from Haar."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return m * math.log(d2) + lambda_log


def markov_tail_bound_log(d1: int, d2: int, eps: float, m: int, lambda_log: float) -> float:
    """``(d1 / (2 eps d2))^{2m} * (Haar moment bound + TPE gap)``, in logs."""
    _positive_eps(eps)
    prefactor = 2 * m * (math.log(d1) - math.log(2 * eps * d2))
    return prefactor + float(np.logaddexp(moment_bound_g_log(d1, d2, m),
                                          tpe_moment_gap_bound(d2, m, lambda_log)))


def markov_tail_bound_expanded_log(d1: int, d2: int, eps: float, m: int, lambda_log: float) -> float:
    """The same bound after distributing the prefactor term by term."""
    _positive_eps(eps)
    terms = [
        math.log(16.0) + m * math.log(16 * m / (eps**2 * d2)),
        math.log(16.0) + m * math.log(16 / eps**2) - d2 / 4,
        m * (2 * math.log(d1) - math.log(4 * eps**2 * d2)) + lambda_log,
    ]
    return float(logsumexp(terms))


def required_lambda_log(d1: int, d2: int, eps: float, m: int) -> float:
    """Largest log-lambda for which the TPE term stays below ``exp(-eps^2 d2 / 1024)``."""
    return -m * (2 * math.log(d1) - math.log(4 * eps**2 * d2)) - eps**2 * d2 / 1024


@dataclass
class DesignParams:
    d1: int
    d2: int
    eps: float
    lambda0: float
    s_base: int
    t: int
    m: int
    lambda_target_log: float
    iterations_k: int
    k_exact: float
    k_bound: float
    k_bound_holds: bool
    log_s_bound: float
    log_s_big_o: str = "O(d2 log d1), constant unresolved"

    def to_dict(self) -> dict:
        return asdict(self)


def compute_design_params(d1: int, d2: int, eps: float, lambda0: float, s_base: int = 2) -> DesignParams:
    """Design order, TPE target, and iteration count for a JL embedding.

    ``t`` and ``m`` are rounded up and floored at 2 and 1 respectively.
    ``k`` is the number of sequential iterations of a base
    ``(d1, s_base, lambda0, t)``-TPE; ``log_s_bound = k * ln(s_base)`` is the
    resulting log-cardinality. All logs are natural.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not 1 <= d2 < d1:
        raise ValueError(f"need 1 <= d2 < d1, got d2={d2}, d1={d1}")
    if not 0 < lambda0 < 1:
        raise ValueError(f"lambda0 must lie in (0, 1), got {lambda0}")
    if s_base < 1:
        raise ValueError("s_base must be positive")
    scaled = eps**2 * d2
    t = max(2, math.ceil(scaled / 2**9))
    m = max(1, math.ceil(scaled / 2**10))
    ld1 = math.log(d1)
    lambda_log = (t / 2) * (math.log(4 * eps**2) + math.log(d2) - 2 * ld1) - t / 2
    rate = math.log(1 / lambda0)
    k_exact = (2 * m * ld1 + 2 * m * math.log(1 / eps) + scaled / 2**10) / rate
    k_bound = (d2 / 2**8) * ld1 / rate
    k = math.ceil(k_exact)
    return DesignParams(
        d1=d1, d2=d2, eps=eps, lambda0=lambda0, s_base=s_base,
        t=t, m=m, lambda_target_log=lambda_log,
        iterations_k=k, k_exact=k_exact, k_bound=k_bound,
        k_bound_holds=k_exact <= k_bound,
        log_s_bound=k * math.log(s_base),
    )


def wilson_interval(failures: int, trials: int, confidence: float = WILSON_CONFIDENCE) -> tuple[float, float]:
    z = norm.ppf(0.5 + confidence / 2)
    p = failures / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class TailReport:
    trials: int
    failures: int
    empirical_rate: float
    wilson_ci_lower: float
    wilson_ci_upper: float
    analytic_bound: float | None
    vacuous: bool
    passed: bool

    @property
    def standard_error(self) -> float:
        p = self.empirical_rate
        return math.sqrt(p * (1 - p) / self.trials)

    def to_dict(self) -> dict:
        return asdict(self)

    CSV_COLUMNS = ("trials", "failures", "empirical_rate", "wilson_ci_lower", "wilson_ci_upper",
                   "analytic_bound", "vacuous", "passed")


def tail_report(values, band: tuple[float, float], analytic_bound: float | None = None) -> TailReport:
    """Count values outside the open interval ``band`` and test the bound.

    A bound passes when the Wilson lower limit does not exceed it; bounds of
    1 or more are vacuous and pass trivially.
    """
    values = np.asarray(values, dtype=float)
    lo, hi = band
    trials = len(values)
    failures = int(np.count_nonzero(~((values > lo) & (values < hi))))
    lower, upper = wilson_interval(failures, trials)
    vacuous = analytic_bound is not None and analytic_bound >= 1
    if analytic_bound is None:
        passed = True
    else:
        passed = vacuous or lower <= analytic_bound
    return TailReport(trials, failures, failures / trials, lower, upper,
                      analytic_bound, bool(vacuous), bool(passed))


def empirical_tail(sampler: Callable, band: tuple[float, float], trials: int, master_seed: int,
                   analytic_bound: float | None = None, workers: int = 1) -> TailReport:
    """Run ``sampler`` on ``trials`` independent streams and build a :class:`TailReport`."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    values = map_trials(sampler, trials, master_seed, workers)
    return tail_report(values, band, analytic_bound)


class MomentEstimate(NamedTuple):
    mean: float
    stderr: float
    power: int
    trials: int


def moment_estimate(values, power: int) -> MomentEstimate:
    """Mean of ``x**power`` with a jackknife standard error."""
    if power < 2 or power % 2:
        raise ValueError("power must be an even integer 2m")
    if power // 2 > MAX_EMPIRICAL_M:
        raise ValueError(f"m = {power // 2} exceeds {MAX_EMPIRICAL_M}")
    x = np.asarray(values, dtype=float) ** power
    n = len(x)
    loo = (x.sum() - x) / (n - 1)
    se = math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    return MomentEstimate(float(x.mean()), se, power, n)


def empirical_moment(sampler: Callable, power: int, trials: int, master_seed: int,
                     workers: int = 1) -> MomentEstimate:
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    return moment_estimate(map_trials(sampler, trials, master_seed, workers), power)
