"""Transient distributions and absorption-time moments of a CTMC.

``exp(tA) q`` is computed by uniformization: with ``Lam`` slightly above the
largest exit rate, ``P = I + A / Lam`` is column-stochastic and

    exp(tA) q = sum_k Poisson(k; Lam t) P^k q.

Every term is nonnegative, so tiny FAIL probabilities (1e-20 and below for
well-repaired arrays) keep full relative precision. For large ``Lam t`` the
series is applied to a short step ``tau = t / 2^s`` and the resulting
(nonnegative) matrix is squared ``s`` times.

Moments of the time to absorption use the transient block ``Q`` (FAIL row
and column removed): ``E[T^k] = k! * a^T (-Q)^-(k+1) q0`` where ``a`` holds
the exit rates into FAIL. This is the same quantity as the Laurent
coefficient of the resolvent ``(zI - A)^-1`` at ``z = 0``, obtained by
linear solves instead of series expansion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from .model import Generator

TAIL_TOL = 1e-13
NEG_CLAMP = 1e-12
K_MAX = 4
# largest Lam*t handled by a single series; bigger steps use squaring
_SERIES_LIMIT = 1.0
_VECTOR_LIMIT = 2000.0


@dataclass
class Trajectory:
    times: np.ndarray
    probs: np.ndarray          # shape (len(times), n_states)
    fail_index: int
    aux: dict = field(default_factory=dict)

    @property
    def pdl(self) -> np.ndarray:
        return self.probs[:, self.fail_index]

    @property
    def survival(self) -> np.ndarray:
        return 1.0 - self.pdl


@dataclass(frozen=True)
class MomentReport:
    m1: float
    m2: float
    variance: float
    moments: tuple = ()        # m0 .. m_kmax

    @property
    def mttdl(self) -> float:
        return self.m1


def uniformization_rate(a: np.ndarray) -> float:
    return 1.01 * float(np.abs(np.diag(a)).max(initial=0.0))


def _poisson_weights(x: float, extra: int):
    """Poisson(x) pmf for k = 0..K with tail mass below TAIL_TOL and at least
    ``extra`` terms beyond the mean (so long paths are not cut off)."""
    if x == 0.0:
        return np.ones(1)
    k_min = int(math.ceil(x)) + extra
    k = k_min
    while True:
        ks = np.arange(k + 1)
        logw = ks * math.log(x) - x - gammaln(ks + 1)
        w = np.exp(logw)
        # tail beyond k is bounded by a geometric series once k + 1 > x
        if w[-1] * x / (k + 1 - x) < TAIL_TOL:
            return w
        k = int(k * 1.25) + 8


def _series_apply(p: np.ndarray, v: np.ndarray, x: float, n: int) -> np.ndarray:
    w = _poisson_weights(x, n + 20)
    acc = w[0] * v
    term = v
    for wk in w[1:]:
        term = p @ term
        acc = acc + wk * term
    return acc


def transition_matrix(a: np.ndarray, t: float) -> np.ndarray:
    """``exp(t a)`` for a generator ``a`` via uniformization and squaring."""
    n = a.shape[0]
    lam = uniformization_rate(a)
    if lam == 0.0 or t == 0.0:
        return np.eye(n)
    x = lam * t
    s = max(0, int(math.ceil(math.log2(x / _SERIES_LIMIT)))) if x > _SERIES_LIMIT else 0
    tau = t / 2.0 ** s
    p = np.eye(n) + a / lam
    e = _series_apply(p, np.eye(n), lam * tau, n)
    for _ in range(s):
        e = e @ e
    return e


def propagate(a: np.ndarray, q: np.ndarray, t: float) -> np.ndarray:
    """``exp(t a) @ q`` for one step."""
    lam = uniformization_rate(a)
    if lam == 0.0 or t == 0.0:
        return q.copy()
    x = lam * t
    if x <= _VECTOR_LIMIT:
        p = np.eye(a.shape[0]) + a / lam
        return _series_apply(p, q, x, a.shape[0])
    return transition_matrix(a, t) @ q


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        raise ValueError("empty time grid")
    if np.any(~np.isfinite(times)) or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("time grid must be finite, nonnegative and ascending")
    return times


def _clamp(q: np.ndarray) -> np.ndarray:
    if np.any(q < -NEG_CLAMP):
        raise ArithmeticError(f"negative probability {q.min():.3g}; bad generator?")
    return np.maximum(q, 0.0)


def evolve(gen: Generator, times) -> Trajectory:
    """Distribution ``q(t) = exp(tA) q(0)`` at each point of an ascending grid."""
    a = gen.a
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite rate in generator")
    times = _check_times(times)
    out = np.empty((times.size, gen.size))
    q = gen.initial.copy()
    t_prev = 0.0
    cache: dict = {}
    for k, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            if uniformization_rate(a) * dt > _VECTOR_LIMIT:
                key = round(dt, 12)
                if key not in cache:
                    cache[key] = transition_matrix(a, dt)
                q = cache[key] @ q
            else:
                q = propagate(a, q, dt)
            q = _clamp(q)
        out[k] = q
        t_prev = t
    return Trajectory(times, out, gen.fail_index)


def pdl_curve(gen: Generator, times) -> list:
    """``[(t, PDL_t), ...]``: probability of being in FAIL at each time."""
    traj = evolve(gen, times)
    return list(zip(traj.times.tolist(), traj.pdl.tolist()))


def pdl_at(gen: Generator, t: float) -> float:
    return float(evolve(gen, [t]).pdl[0])


def moments_via_resolvent(gen: Generator, k_max: int = 2) -> MomentReport:
    """Raw moments ``E[T^k]``, k = 0..k_max, of the time to data loss."""
    if not 2 <= k_max <= K_MAX:
        raise ValueError(f"k_max must lie in [2, {K_MAX}]")
    neg_q = -gen.transient_block()
    exit_rates = gen.exit_rates()
    keep = [i for i in range(gen.size) if i != gen.fail_index]
    v = gen.initial[keep]
    with np.errstate(all="raise"), warnings.catch_warnings():
        # a singular block is reported below as an error
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        try:
            lu = linalg.lu_factor(neg_q, check_finite=True)
        except (linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise linalg.LinAlgError("singular transient block: FAIL unreachable?") from exc
    if np.any(np.abs(np.diag(lu[0])) == 0):
        raise linalg.LinAlgError("singular transient block: FAIL unreachable?")
    moments = []
    for k in range(k_max + 1):
        v = linalg.lu_solve(lu, v)
        moments.append(math.factorial(k) * float(exit_rates @ v))
    if not np.all(np.isfinite(moments)) or moments[0] < 0.5:
        raise linalg.LinAlgError("transient block ill-posed: absorption not certain")
    m1, m2 = moments[1], moments[2]
    return MomentReport(m1, m2, m2 - m1 * m1, tuple(moments))


def _survival_nodes(gen: Generator, q: np.ndarray, a0: float, b0: float,
                    nodes: np.ndarray, weights: np.ndarray):
    """Gauss-Legendre estimate of the integral of survival over [a0, b0],
    starting from the distribution ``q`` at ``a0``."""
    half = 0.5 * (b0 - a0)
    total = 0.0
    for x, w in zip(nodes, weights):
        qt = transition_matrix(gen.a, half * (x + 1.0)) @ q
        total += w * _survival(qt, gen.fail_index)
    return half * total


def _survival(q: np.ndarray, fail_index: int) -> float:
    # summing transient mass keeps precision once PDL is close to 1
    return math.fsum(np.delete(q, fail_index))


def mttdl_via_reliability_integral(gen: Generator, t_max: float | None = None,
                                   tol: float = 1e-10) -> float:
    """MTTDL as the integral of the survival function ``1 - PDL_t``.

    Panels grow geometrically from the fastest time scale of the chain; each
    panel is integrated with 20-point Gauss-Legendre and split adaptively
    until two levels agree to ``tol`` (relative). If ``t_max`` is None it is
    doubled until the remaining survival probability drops below ``tol``.
    """
    lam = uniformization_rate(gen.a)
    if lam == 0.0:
        raise ValueError("generator has no transitions")
    nodes, weights = np.polynomial.legendre.leggauss(20)
    fi = gen.fail_index
    if t_max is None:
        t_max = 1.0 / lam
        while _survival(transition_matrix(gen.a, t_max) @ gen.initial, fi) >= tol:
            t_max *= 2.0
            if t_max > 1e15:
                raise ArithmeticError("survival does not decay; FAIL unreachable?")
    remaining = _survival(transition_matrix(gen.a, t_max) @ gen.initial, fi)
    if remaining >= tol:
        raise ValueError(f"t_max too short: survival {remaining:.3g} remains at t_max")

    def panel(q, a0, b0, depth):
        whole = _survival_nodes(gen, q, a0, b0, nodes, weights)
        mid = 0.5 * (a0 + b0)
        left = _survival_nodes(gen, q, a0, mid, nodes, weights)
        q_mid = transition_matrix(gen.a, mid - a0) @ q
        right = _survival_nodes(gen, q_mid, mid, b0, nodes, weights)
        if depth >= 30 or abs(left + right - whole) <= tol * max(abs(left + right), 1e-300):
            return left + right
        return panel(q, a0, mid, depth + 1) + panel(q_mid, mid, b0, depth + 1)

    edges = [0.0]
    width = 1.0 / lam
    while edges[-1] < t_max:
        edges.append(min(edges[-1] + width, t_max))
        width *= 2.0
    q = gen.initial.copy()
    pieces = []
    for a0, b0 in zip(edges[:-1], edges[1:]):
        pieces.append(panel(q, a0, b0, 0))
        q = transition_matrix(gen.a, b0 - a0) @ q
    return math.fsum(pieces)
