"""Monte Carlo simulation of the time to data loss.

The event logic below is written from the model descriptions (who can fail,
what a service visit does), not from the generator builders, so the
simulator is an independent check on them. Each step samples the total
event rate, then picks one event with a second uniform draw.

Random numbers come from splitmix64. Trial ``k`` gets its own stream keyed by
``hash(seed, k)``, so results do not depend on how trials are split across
threads. Trials run in fixed blocks and the blocks are reduced in order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import stats

from .closed_forms import beta_transform_params
from .config import ConfigError, RaidConfig
from .models import check_model

BLOCK = 65536
TTDL_CAP = 1_000_000
KS_ALPHA = 0.01

KIND = {"no-repair": 0, "individual": 1, "raid5": 1, "simultaneous": 2,
        "imperfect": 3, "sector": 4, "sector-imperfect": 5,
        "delay-naive": 6, "delay-rebuild": 7}

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TRIAL_MUL = np.uint64(0xD1B54A32D192ED03)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_TO_UNIT = 1.0 / 9007199254740992.0     # 2^-53


@numba.njit(nogil=True, cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(nogil=True, cache=True)
def _uniform(state):
    state = state + _GOLDEN
    return state, np.float64(_mix(state) >> _S11) * _TO_UNIT


@numba.njit(nogil=True, cache=True)
def _trial_key(seed, trial):
    return _mix(_mix(seed) ^ (np.uint64(trial) * _TRIAL_MUL))


@numba.njit(nogil=True, cache=True)
def _one_trial(kind, n, m, lam, mu, p, lam_s, mu_s, h, horizon, to_absorption, state):
    t_total = n + m
    t = 0.0
    i = 0          # failed drives
    j = 0          # working drives with a latent sector error
    while True:
        # rates of the events that can happen from (i, j)
        fail = 0.0      # a drive fails
        fail_s = 0.0    # a drive with a sector error fails (sector models)
        sect = 0.0      # a clean drive develops a sector error
        scrub = 0.0
        serve = 0.0     # service visit
        boundary = False
        if kind <= 3 or kind >= 6:
            fail = (t_total - i) * lam
            if kind >= 1 and i >= 1:
                serve = mu
        else:
            boundary = i + j == m + 1
            if boundary:
                fail = (t_total - i) * lam
            else:
                fail = (t_total - i - j) * lam
                fail_s = j * lam
                sect = (t_total - i - j) * lam_s
            if j >= 1:
                scrub = mu_s
            if i >= 1:
                serve = mu
        total = fail + fail_s + sect + scrub + serve
        if total <= 0.0:
            return math.inf, state
        state, u = _uniform(state)
        t += -math.log1p(-u) / total
        if not to_absorption and t > horizon:
            return math.inf, state
        state, u = _uniform(state)
        x = u * total
        if x < fail:
            i += 1
        elif x < fail + fail_s:
            i += 1
            j -= 1
        elif x < fail + fail_s + sect:
            j += 1
        elif x < fail + fail_s + sect + scrub:
            j = 0
        elif kind == 1:
            i -= 1
        elif kind == 2:
            i = 0
        elif kind == 6:
            # the repaired drive rejoins h later; nothing can fail meanwhile
            t += h
            i = 0
        elif kind == 7:
            # rebuild of length h; any of the N + 1 drives may fail during it
            state, u = _uniform(state)
            e = -math.log1p(-u) / ((n + 1) * lam) if lam > 0 else math.inf
            if e < h:
                return t + e, state
            t += h
            i = 0
        else:
            state, u = _uniform(state)
            if u < p:
                # the visit damages a working drive, chosen uniformly
                if boundary or kind == 3:
                    i += 1
                    if boundary:
                        j -= 1
                else:
                    state, u = _uniform(state)
                    i += 1
                    if u * (t_total - i + 1) >= t_total - i + 1 - j:
                        j -= 1
            else:
                i = 0
        if i >= m + 1 or (kind in (4, 5) and i == m and j >= 1):
            return t, state


@numba.njit(nogil=True, cache=True)
def _run_block(kind, params, seed, start, out, horizon, to_absorption):
    n = int(params[0])
    m = int(params[1])
    for k in range(out.size):
        state = _trial_key(seed, start + k)
        out[k], state = _one_trial(kind, n, m, params[2], params[3], params[4],
                                   params[5], params[6], params[7], horizon,
                                   to_absorption, state)


@dataclass
class SimResult:
    n_trials: int
    failures_by_horizon: int
    pdl_estimate: float
    pdl_stderr: float
    mttdl_estimate: float = float("nan")
    mttdl_stderr: float = float("nan")
    ttdl_samples: np.ndarray | None = field(default=None, repr=False)


def _params(cfg: RaidConfig, kind: int) -> np.ndarray:
    # only the imperfect models use p
    p = cfg.p if kind in (3, 5) else 0.0
    return np.array([cfg.n_data, cfg.m_check, cfg.lam, cfg.mu, p,
                     cfg.lambda_s, cfg.mu_s, cfg.h], dtype=np.float64)


def simulate(model_tag: str, cfg: RaidConfig, n_trials: int, seed: int,
             collect_ttdl: bool = False, jobs: int = 1) -> SimResult:
    """Estimate PDL at ``cfg.horizon`` from ``n_trials`` independent arrays.

    With ``collect_ttdl`` every trial runs until data loss, giving an MTTDL
    estimate and up to 10^6 stored loss times; otherwise trials stop at the
    horizon and the MTTDL fields are NaN.
    """
    check_model(model_tag, cfg)
    if int(n_trials) != n_trials or n_trials < 1:
        raise ConfigError(f"n_trials must be a positive integer, got {n_trials!r}")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    kind = KIND[model_tag]
    params = _params(cfg, kind)
    seed64 = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    horizon = cfg.horizon
    starts = list(range(0, int(n_trials), BLOCK))

    def block(start):
        out = np.empty(min(BLOCK, n_trials - start))
        _run_block(kind, params, seed64, start, out, horizon, collect_ttdl)
        hits = int(np.count_nonzero(out <= horizon))
        if not collect_ttdl:
            return hits, out.size, 0.0, 0.0, None
        mean = float(np.mean(out))
        sq = float(np.sum((out - mean) ** 2))
        keep = out[:max(0, TTDL_CAP - start)] if start < TTDL_CAP else None
        return hits, out.size, mean, sq, keep

    if jobs == 1 or len(starts) == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(block, starts))

    hits = sum(pt[0] for pt in parts)
    p_hat = hits / n_trials
    res = SimResult(n_trials, hits, p_hat, math.sqrt(p_hat * (1.0 - p_hat) / n_trials))
    if collect_ttdl:
        # combine block means and squared deviations in block order
        count, mean, sq = 0, 0.0, 0.0
        for _, c, bm, bsq, _ in parts:
            delta = bm - mean
            tot = count + c
            mean += delta * c / tot
            sq += bsq + delta * delta * count * c / tot
            count = tot
        res.mttdl_estimate = mean
        res.mttdl_stderr = math.sqrt(sq / max(count - 1, 1) / count)
        res.ttdl_samples = np.concatenate([pt[4] for pt in parts if pt[4] is not None])
    return res


def beta_ks_check(cfg: RaidConfig, n_samples: int, seed: int,
                  alpha: int | None = None):
    """KS test of ``U = 1 - exp(-lam T)`` for simulated no-repair loss times
    against Beta(M + 1, N). ``alpha`` overrides the first shape (for negative
    controls). Returns ``(statistic, reject)`` at significance 0.01."""
    if n_samples > TTDL_CAP:
        raise ConfigError(f"at most {TTDL_CAP} samples are stored")
    res = simulate("no-repair", cfg, n_samples, seed, collect_ttdl=True)
    u = -np.expm1(-cfg.lam * res.ttdl_samples)
    shape = beta_transform_params(cfg.n_data, cfg.m_check)
    a = shape.alpha if alpha is None else alpha
    test = stats.kstest(u, "beta", args=(a, shape.beta))
    return float(test.statistic), bool(test.pvalue < KS_ALPHA)
