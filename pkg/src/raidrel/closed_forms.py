"""Analytic results for the reliability models.

Most functions here take plain numbers rather than a RaidConfig so they can
be used with any consistent time unit (the delay examples are unitless).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.special import gammaln
from scipy.stats import norm

from .solver import MomentReport

EULER_GAMMA = 0.57721566490153286061
EXACT_BINOMIAL_MAX = 60


@dataclass(frozen=True)
class BetaParams:
    alpha: int
    beta: int


def binomial(n: int, k: int) -> float:
    """C(n, k): exact integer arithmetic up to n = 60, log-gamma beyond."""
    if k < 0 or k > n:
        return 0.0
    if n <= EXACT_BINOMIAL_MAX:
        return float(math.comb(n, k))
    return math.exp(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _log_binomial(n: int, k: int) -> float:
    if n <= EXACT_BINOMIAL_MAX:
        return math.log(math.comb(n, k))
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def no_repair_pdl(n: int, m: int, lam: float, t: float) -> float:
    """P(more than M of T = N + M independent drives fail by time t).

    Summed over the upper binomial tail, k = M+1..T, so small PDL values keep
    their relative precision.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    total = n + m
    x = lam * t
    if x == 0.0:
        return 0.0
    log_p = math.log(-math.expm1(-x))     # log(1 - e^{-x})
    log_q = -x
    terms = [math.exp(_log_binomial(total, k) + k * log_p + (total - k) * log_q)
             for k in range(m + 1, total + 1)]
    return min(1.0, math.fsum(terms))


def binomial_eigenvectors(total: int):
    """Exact integer matrices S, S^-1 diagonalising the pure-death chain on
    ``total + 1`` states: ``S[k][l] = (-1)^(k-l) C(T-l, k-l)`` and
    ``S^-1[k][l] = C(T-l, k-l)``. Lists of Python ints."""
    size = total + 1
    s = [[(-1) ** (k - l) * math.comb(total - l, k - l) if k >= l else 0
          for l in range(size)] for k in range(size)]
    s_inv = [[math.comb(total - l, k - l) if k >= l else 0
              for l in range(size)] for k in range(size)]
    return s, s_inv


def no_repair_pdl_eigen(n: int, m: int, lam: float, t: float) -> float:
    """PDL from the spectral expansion of the pure-death chain:

        PDL_t = 1 - T C(T-1, M) sum_i (-1)^(M-i) C(M, i) e^{-(T-i) lam t} / (T - i)

    The alternating sum cancels badly in floating point, so it is evaluated
    exactly in rationals at the (rounded) value of ``e^{-lam t}``.
    """
    total = n + m
    if total > EXACT_BINOMIAL_MAX:
        raise OverflowError(f"T = {total} > {EXACT_BINOMIAL_MAX}: use no_repair_pdl")
    if t < 0:
        raise ValueError("t must be >= 0")
    x = Fraction(math.exp(-lam * t))
    acc = Fraction(0)
    for i in range(m + 1):
        acc += Fraction((-1) ** (m - i) * math.comb(m, i), total - i) * x ** (total - i)
    value = 1 - total * math.comb(total - 1, m) * acc
    return float(min(max(value, Fraction(0)), Fraction(1)))


def harmonic(a: int, b: int) -> Fraction:
    """Exact sum of 1/k for k = a..b."""
    return sum((Fraction(1, k) for k in range(a, b + 1)), Fraction(0))


def digamma_int(k: int) -> float:
    """psi(k) for a positive integer: -gamma + H_{k-1}."""
    if k < 1:
        raise ValueError("digamma_int needs k >= 1")
    return -EULER_GAMMA + float(harmonic(1, k - 1))


def no_repair_mttdl(n: int, m: int, lam: float) -> float:
    """(1/lam) * sum_{k=N}^{T} 1/k, i.e. (psi(T+1) - psi(N)) / lam."""
    return float(harmonic(n, n + m)) / lam


def no_repair_mttdl_approx(n: int, m: int, lam: float) -> float:
    """log(1 + M/N) / lam.

    Underestimates the harmonic sum by between 1/T and 1/N (in units of
    1/lam), so it is only accurate in relative terms when M is large;
    the ratio M/N drives the value.
    """
    return math.log1p(m / n) / lam


def beta_transform_params(n: int, m: int) -> BetaParams:
    """Law of U = 1 - exp(-lam * T_loss) for the no-repair model."""
    return BetaParams(alpha=m + 1, beta=n)


def normal_approx_pdl(n: int, m: int, lam: float, t: float) -> float:
    """Normal approximation to the surviving-drive count.

    Survivors ~ Bin(T, e^{-lam t}); data survives while survivors >= N.
    A continuity correction of 0.5 is applied.
    """
    total = n + m
    p_fail = -math.expm1(-lam * t)
    mean = total * (1.0 - p_fail)
    sd = math.sqrt(total * p_fail * (1.0 - p_fail))
    if sd == 0.0:
        return 0.0 if mean >= n else 1.0
    return float(norm.cdf((n - 0.5 - mean) / sd))


def raid5_moments(n: int, lam: float, mu: float) -> MomentReport:
    """Exact mean, second moment and variance of the time to data loss for N
    data drives, one check drive and individual repair."""
    nn = n * n + n
    m1 = ((2 * n + 1) * lam + mu) / (nn * lam ** 2)
    den = (n ** 4 + 2 * n ** 3 + n ** 2) * lam ** 4
    m2 = ((6 * n * n + 6 * n + 2) * lam ** 2 + (8 * n + 4) * mu * lam + 2 * mu ** 2) / den
    var = ((2 * n * n + 2 * n + 1) * lam ** 2 + (4 * n + 2) * mu * lam + mu ** 2) / den
    return MomentReport(m1, m2, var, (1.0, m1, m2))


def delay_naive_mttdl(n: int, lam: float, mu: float, h: float) -> float:
    """MTTDL when a repaired drive rejoins after a fixed wait ``h`` during
    which nothing can fail."""
    return ((2 * n + 1) * lam + mu) / ((n * n + n) * lam ** 2) + mu * h / (n * lam)


def pde_rebuild_mttdl(n: int, lam: float, mu: float, h: float) -> float:
    """MTTDL when a rebuild takes a fixed time ``h`` and any of the N + 1
    drives failing during the rebuild loses data."""
    if math.isinf(h):
        return pde_rebuild_mttdl_limit(n, lam, mu)
    decay = math.exp(-(n + 1) * lam * h)
    num = (2 * n + 1) * lam + (2.0 - decay) * mu
    den = (n * n + n) * lam ** 2 + (1.0 - decay) * (n + 1) * lam * mu
    return num / den


def pde_rebuild_mttdl_limit(n: int, lam: float, mu: float) -> float:
    return ((2 * n + 1) * lam + 2 * mu) / ((n + 1) * lam * (n * lam + mu))


class InsufficientCheckDrives(ValueError):
    pass


def silent_corruption_pdl(model: str, cfg) -> float:
    """PDL for losing the ability to detect and correct one silently
    corrupted word: the chosen model evaluated with N + 2 data and M - 2
    check drives."""
    from .models import model_pdl

    if cfg.m_check < 2:
        raise InsufficientCheckDrives(
            "insufficient check drives for single-error detect+correct (need M >= 2)")
    shifted = cfg.with_(n_data=cfg.n_data + 2, m_check=cfg.m_check - 2)
    return model_pdl(model, shifted)

