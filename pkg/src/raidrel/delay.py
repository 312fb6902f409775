"""Delay models with one check drive.

Two mechanisms are covered:

* ``dq/dt = B q(t) + C H(t - h) q(t - h)``: a repaired drive only rejoins the
  array ``h`` later and nothing can fail meanwhile. Integrated by the method
  of steps with classical RK4 on a grid where ``h`` is a whole number of
  steps; midpoint history values come from cubic Hermite interpolation.
* A rebuild of fixed length ``h`` during which any of the ``N + 1`` drives can
  fail. The density of arrays by rebuild age is transported exactly along
  characteristics (shift by one cell per step, decay ``exp(-(N+1) lam dt)``).

The scalar equation ``y' = a y + b y(t - h)`` has characteristic numbers
``s = a + W_k(b h e^{-a h}) / h`` on the branches of the Lambert W function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .solver import Trajectory

MIN_STEPS_PER_DELAY = 10
DEFAULT_STEPS_PER_DELAY = 256
SURVIVAL_STOP = 1e-8
MAX_STEPS = 10_000_000
MASS_TOL = 1e-6
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class DelaySystem:
    b: np.ndarray
    c: np.ndarray
    h: float
    initial: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.array(self.b, dtype=float))
        c = np.atleast_2d(np.array(self.c, dtype=float))
        q0 = np.atleast_1d(np.array(self.initial, dtype=float))
        n = b.shape[0]
        if b.shape != (n, n) or c.shape != (n, n) or q0.shape != (n,):
            raise ValueError("B, C and the initial vector must agree in size")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("non-finite rate in delay system")
        if np.any(c < 0):
            raise ValueError("C must be nonnegative")
        if not self.h >= 0:
            raise ValueError("delay h must be >= 0")
        for arr in (b, c, q0):
            arr.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "initial", q0)

    @property
    def conservative(self) -> bool:
        colsum = (self.b + self.c).sum(axis=0)
        scale = max(np.abs(self.b).max(), np.abs(self.c).max(), 1e-300)
        return bool(np.all(np.abs(colsum) <= 1e-12 * scale))


def build_raid5_delay(n: int, lam: float, mu: float, h: float) -> DelaySystem:
    """States (0 failed, 1 failed, FAIL); repairs re-enter state 0 after ``h``."""
    b = [[-(n + 1) * lam, 0.0, 0.0],
         [(n + 1) * lam, -n * lam - mu, 0.0],
         [0.0, n * lam, 0.0]]
    c = [[0.0, mu, 0.0],
         [0.0, 0.0, 0.0],
         [0.0, 0.0, 0.0]]
    return DelaySystem(b, c, h, [1.0, 0.0, 0.0])


def _grid(h: float, dt: float) -> tuple[int, float]:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if h == 0:
        return 0, dt
    k = int(round(h / dt))
    if k < MIN_STEPS_PER_DELAY:
        raise ValueError(f"dt too coarse: h/dt = {h / dt:.3g} < {MIN_STEPS_PER_DELAY}")
    return k, h / k


class _DdeStepper:
    """Method of steps for ``B q + C q(t - h)``; keeps the full history."""

    def __init__(self, sys: DelaySystem, dt: float):
        self.sys = sys
        self.k, self.dt = _grid(sys.h, dt)
        self.ys = [sys.initial.copy()]
        # cumulative integral of 1^T C q(s) ds, for the in-transit mass
        self.cum = [0.0]
        self.cvec = sys.c.sum(axis=0)

    @property
    def n(self) -> int:
        return len(self.ys) - 1

    def _delayed(self, j: int, active: bool) -> np.ndarray:
        if not active or j < 0:
            return np.zeros_like(self.sys.initial)
        return self.ys[j]

    def _deriv(self, j: int, active: bool) -> np.ndarray:
        """q'(t_j) under the regime where the delay term is ``active``."""
        s = self.sys
        if self.k == 0:
            return (s.b + s.c) @ self.ys[j]
        return s.b @ self.ys[j] + s.c @ self._delayed(j - self.k, active and j >= self.k)

    def _hermite_mid(self, j: int, active: bool) -> np.ndarray:
        y0, y1 = self.ys[j], self.ys[j + 1]
        f0, f1 = self._deriv(j, active), self._deriv(j + 1, active)
        return 0.5 * (y0 + y1) + self.dt / 8.0 * (f0 - f1)

    def step(self) -> None:
        s, dt, n, k = self.sys, self.dt, self.n, self.k
        y = self.ys[-1]
        if k == 0:
            a = s.b + s.c

            def f(v, _):
                return a @ v
            d0 = dh = d1 = None
        else:
            active = n >= k
            if active:
                j = n - k
                d0, d1 = self.ys[j], self.ys[j + 1]
                dh = self._hermite_mid(j, j >= k)
            else:
                d0 = dh = d1 = np.zeros_like(y)

            def f(v, d):
                return s.b @ v + s.c @ d
        k1 = f(y, d0)
        k2 = f(y + 0.5 * dt * k1, dh)
        k3 = f(y + 0.5 * dt * k2, dh)
        k4 = f(y + dt * k3, d1)
        y_new = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y_new)):
            raise ArithmeticError(f"non-finite state at t = {(n + 1) * dt:g}")
        self.ys.append(y_new)
        # Hermite quadrature of 1^T C q over the new step
        active = k > 0 and n >= k
        g0, g1 = self.cvec @ y, self.cvec @ y_new
        gp0 = self.cvec @ self._deriv(n, active)
        gp1 = self.cvec @ self._deriv(n + 1, active)
        self.cum.append(self.cum[-1] + 0.5 * dt * (g0 + g1) + dt * dt / 12.0 * (gp0 - gp1))

    def in_transit(self, j: int) -> float:
        if self.k == 0:
            return 0.0
        return self.cum[j] - self.cum[max(j - self.k, 0)]

    def interpolate(self, t: float) -> np.ndarray:
        j = min(int(t / self.dt), self.n - 1)
        theta = (t - j * self.dt) / self.dt
        active = self.k > 0 and j >= self.k
        y0, y1 = self.ys[j], self.ys[j + 1]
        f0, f1 = self._deriv(j, active), self._deriv(j + 1, active)
        h00 = 2 * theta ** 3 - 3 * theta ** 2 + 1
        h10 = theta ** 3 - 2 * theta ** 2 + theta
        h01 = -2 * theta ** 3 + 3 * theta ** 2
        h11 = theta ** 3 - theta ** 2
        return h00 * y0 + h10 * self.dt * f0 + h01 * y1 + h11 * self.dt * f1


def dde_integrate(sys: DelaySystem, t_end: float, dt: float) -> Trajectory:
    """Solve the delay system on [0, t_end].

    ``dt`` is adjusted so that ``h`` is a whole number (>= 10) of steps.
    The trajectory holds every grid node up to ``t_end`` plus ``t_end``
    itself when it falls between nodes. ``aux["in_transit"]`` is the mass
    that has left through the delayed channel but not yet re-entered.
    """
    if not t_end >= 0:
        raise ValueError("t_end must be >= 0")
    st = _DdeStepper(sys, dt)
    n_steps = int(math.ceil(t_end / st.dt - 1e-9))
    if n_steps > MAX_STEPS:
        raise ValueError("too many steps; increase dt")
    for _ in range(n_steps):
        st.step()
    times = [j * st.dt for j in range(n_steps + 1) if j * st.dt <= t_end * (1 + 1e-12)]
    probs = [st.ys[j] for j in range(len(times))]
    transit = [st.in_transit(j) for j in range(len(times))]
    if times[-1] < t_end * (1 - 1e-12):
        times.append(t_end)
        probs.append(st.interpolate(t_end))
        # in-transit at an off-grid end point: interpolate linearly between nodes
        j = len(times) - 2
        w = (t_end - times[-2]) / st.dt
        transit.append((1 - w) * st.in_transit(j) + w * st.in_transit(j + 1))
    fail = sys.initial.size - 1
    return Trajectory(np.array(times), np.array(probs), fail,
                      aux={"in_transit": np.array(transit), "dt": st.dt})


def dde_mttdl(sys: DelaySystem, dt: float) -> float:
    """Integral of ``1 - q_FAIL`` for a conservative system, stepping until the
    survival drops below 1e-8."""
    st = _DdeStepper(sys, dt)
    fail = sys.initial.size - 1
    total = 0.0
    surv = 1.0 - st.ys[0][fail]
    while surv >= SURVIVAL_STOP:
        if st.n >= MAX_STEPS:
            raise ArithmeticError("survival did not decay within the step cap")
        st.step()
        new = 1.0 - st.ys[-1][fail]
        total += 0.5 * st.dt * (surv + new)
        surv = new
    return total


# ---------------------------------------------------------------- PDE model

class _RebuildStepper:
    def __init__(self, n, lam, mu, h, dt, decay=True):
        self.k, self.dt = _grid(h, dt)
        if self.k == 0:
            raise ValueError("the rebuild model needs h > 0")
        self.n_data, self.lam, self.mu = n, lam, mu
        self.fail_rate = (n + 1) * lam
        self.shrink = math.exp(-self.fail_rate * self.dt) if decay else 1.0
        self.half_shrink = math.sqrt(self.shrink)
        self.q = np.array([1.0, 0.0])
        self.decay_rate = self.fail_rate if decay else 0.0
        self.rho = np.zeros(self.k + 1)     # density at ages 0, dt, ..., h
        self.slope = np.zeros(self.k + 1)   # d(rho)/d(age) at the same nodes
        self.slope[0] = -mu * self._rhs(self.q, 0.0)[1]
        self.t = 0.0
        self.steps = 0

    def _rhs(self, q, out):
        n, lam, mu = self.n_data, self.lam, self.mu
        return np.array([-(n + 1) * lam * q[0] + out,
                         (n + 1) * lam * q[0] - (n * lam + mu) * q[1]])

    def step(self):
        rho, slope, dt, k = self.rho, self.slope, self.dt, self.k
        out0 = rho[k]
        # density reaching age h at mid-step sat at age h - dt/2 (cubic Hermite)
        mid = 0.5 * (rho[k - 1] + rho[k]) + dt / 8.0 * (slope[k - 1] - slope[k])
        # before t = h the oldest node predates the start: nothing exits yet
        out_h = mid * self.half_shrink if self.t >= (k - 0.5) * dt else 0.0
        out1 = rho[k - 1] * self.shrink
        q = self.q
        k1 = self._rhs(q, out0)
        k2 = self._rhs(q + 0.5 * dt * k1, out_h)
        k3 = self._rhs(q + 0.5 * dt * k2, out_h)
        k4 = self._rhs(q + dt * k3, out1)
        self.q = q + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        rho[1:] = rho[:-1] * self.shrink
        slope[1:] = slope[:-1] * self.shrink
        # boundary: rho(t, 0) = mu q1(t); the age derivative follows from the
        # transport equation rho_x = -rho_t - decay * rho
        q1_rate = self._rhs(self.q, 0.0)[1]
        rho[0] = self.mu * self.q[1]
        slope[0] = -self.mu * q1_rate - self.decay_rate * rho[0]
        self.t += dt
        self.steps += 1

    def rebuilding(self) -> float:
        # Hermite (corrected trapezoid) rule over the occupied ages only; the
        # density has a kink at the front age t while t < h
        m = min(self.steps, self.k)
        if m == 0:
            return 0.0
        rho, dt = self.rho[:m + 1], self.dt
        trap = dt * (0.5 * rho[0] + rho[1:-1].sum() + 0.5 * rho[-1])
        return float(trap + dt * dt / 12.0 * (self.slope[0] - self.slope[m]))

    def survival(self) -> float:
        return float(self.q[0] + self.q[1]) + self.rebuilding()

    def check(self):
        s = self.survival()
        if s > 1.0 + MASS_TOL or self.q.min() < -MASS_TOL or self.rho.min() < -MASS_TOL:
            raise ArithmeticError(f"mass drift at t = {self.t:g}: survival {s:.9g}")


def pde_rebuild_integrate(n: int, lam: float, mu: float, h: float,
                          t_end: float, dt: float, decay: bool = True):
    """Trajectory of (q0, q1, mass under rebuild, PDL) on [0, t_end] and the
    MTTDL, obtained by continuing past ``t_end`` until survival < 1e-8.

    ``decay=False`` drops failures during rebuild, which turns the model
    into the naive delay system (diagnostic only).
    """
    st = _RebuildStepper(n, lam, mu, h, dt, decay)
    n_steps = int(math.ceil(t_end / st.dt - 1e-9))
    rows = [(0.0, 1.0, 0.0, 0.0, 0.0)]
    mttdl = 0.0
    surv = 1.0
    steps = 0
    while True:
        if steps >= MAX_STEPS:
            raise ArithmeticError("survival did not decay within the step cap")
        st.step()
        steps += 1
        st.check()
        s_new = st.survival()
        mttdl += 0.5 * st.dt * (surv + s_new)
        surv = s_new
        if steps <= n_steps:
            rows.append((st.t, st.q[0], st.q[1], st.rebuilding(), 1.0 - s_new))
            if steps == n_steps and st.t > t_end * (1 + 1e-12):
                # off-grid end point: interpolate linearly between nodes
                w = (t_end - rows[-2][0]) / st.dt
                rows[-1] = tuple((1 - w) * a + w * b for a, b in zip(rows[-2], rows[-1]))
        if steps >= n_steps and surv < SURVIVAL_STOP:
            break
        if not decay and steps >= n_steps:
            # without decay only the DDE-equivalent trajectory is wanted
            mttdl = float("nan")
            break
    arr = np.array(rows)
    traj = Trajectory(arr[:, 0], arr[:, 1:], 3, aux={"dt": st.dt})
    return traj, mttdl


def pde_rebuild_mttdl_numeric(n, lam, mu, h, dt=None) -> float:
    if dt is None:
        dt = h / DEFAULT_STEPS_PER_DELAY
    return pde_rebuild_integrate(n, lam, mu, h, 0.0, dt)[1]


# ------------------------------------------------------------ Lambert W

_BRANCH_EPS = 1e-12


def lambertw(z: complex, k: int = 0, tol: float = 1e-15, max_iter: int = 100) -> complex:
    """Branch ``k`` of the Lambert W function by Halley iteration."""
    z = complex(z)
    if z == 0:
        if k == 0:
            return 0j
        raise ValueError("W_k(0) is -inf for k != 0")
    branch_pt = z + math.exp(-1)
    near = abs(branch_pt) < 0.3
    p = cmath.sqrt(2.0 * (math.e * z + 1.0))
    if k == 0 and near:
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif k == 0 and abs(z) <= 1.5:
        w = cmath.log(1.0 + z) if abs(1.0 + z) > 0.1 else z
    elif k == -1 and near and z.imag >= 0 and z.real < 0:
        w = -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p ** 3
    elif k == 1 and near and z.imag < 0 and z.real < 0:
        w = -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p ** 3
    else:
        l1 = cmath.log(z) + 2j * math.pi * k
        w = l1 - cmath.log(l1) if l1 != 0 else l1
    for _ in range(max_iter):
        ew = cmath.exp(w)
        f = w * ew - z
        # near the branch point the step stalls at rounding level; accept a
        # residual that is already as small as rounding allows
        if abs(f) <= 4 * _EPS * abs(z):
            return w
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        if denom == 0:
            break
        step = f / denom
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            return w
    raise ArithmeticError(f"Lambert W did not converge for z={z}, k={k}")


def branch_order(count: int):
    """0, -1, 1, -2, 2, ... (first ``count`` branch indices)."""
    out = [0]
    j = 1
    while len(out) < count:
        out.append(-j)
        if len(out) < count:
            out.append(j)
        j += 1
    return out[:count]


def lambert_characteristic_roots(a: float, b: float, n_branches: int,
                                 h: float = 1.0, residual_tol: float = 1e-10) -> list:
    """Roots of ``s - a - b exp(-s h) = 0`` on branches 0, -1, 1, -2, 2, ...

    Each root is checked against the defining equation; the residual bound
    is relative to ``max(1, |s|)``.
    """
    if n_branches < 1:
        raise ValueError("n_branches must be >= 1")
    if h <= 0:
        raise ValueError("h must be positive")
    if b == 0:
        return [complex(a)]
    z = b * h * cmath.exp(-a * h)
    if abs(z + math.exp(-1)) < _BRANCH_EPS:
        raise ValueError("double root: b h exp(-(a h - 1)) = -1")
    roots = []
    for k in branch_order(n_branches):
        s = a + lambertw(z, k) / h
        resid = abs(s - a - b * cmath.exp(-s * h))
        if resid >= residual_tol * max(1.0, abs(s)):
            raise ArithmeticError(f"root on branch {k} fails residual check ({resid:.3g})")
        roots.append(s)
    return roots


def toy_dde_exact(a: float, b: float, t) -> np.ndarray:
    """Exact solution of ``y' = a y + b H(t-1) y(t-1)``, ``y(0) = 1``:
    ``sum_k b^k (t-k)^k / k! exp(a (t-k))`` over ``k <= t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    for idx, tt in enumerate(t):
        acc = 0.0
        for k in range(int(math.floor(tt)) + 1):
            acc += b ** k * (tt - k) ** k / math.factorial(k) * math.exp(a * (tt - k))
        out[idx] = acc
    return out


def count_extrema(values, rel_tol: float = 1e-12) -> int:
    """Number of sign changes of the discrete derivative (flat steps skipped)."""
    d = np.diff(np.asarray(values, dtype=float))
    scale = np.abs(values).max() if len(values) else 1.0
    signs = np.sign(d[np.abs(d) > rel_tol * scale])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
