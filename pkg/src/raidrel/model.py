"""Generator matrices for the one-dimensional failure-count chains.

Convention used throughout the package: probability vectors are *columns*
and evolve as ``dq/dt = A @ q``. Entry ``A[j, k]`` is the rate of moving
from state ``k`` to state ``j``; every column sums to zero. Most CTMC texts
use the transposed (row) convention, so take care when comparing.

State ``i`` of a 1-D chain means ``i`` drives have failed; the last state
(``M + 1``) is the absorbing FAIL state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import RaidConfig


@dataclass(frozen=True)
class StateSpace1D:
    m_check: int
    labels: tuple = field(init=False)

    def __post_init__(self):
        labels = tuple(str(i) for i in range(self.m_check + 1)) + ("FAIL",)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.m_check + 2

    @property
    def fail_index(self) -> int:
        return self.m_check + 1

    def index(self, label) -> int:
        if label == "FAIL":
            return self.fail_index
        i = int(label)
        if not 0 <= i <= self.m_check + 1:
            raise KeyError(label)
        return i


@dataclass(frozen=True, eq=False)
class Generator:
    """A CTMC rate matrix together with its state space and start vector."""

    space: object
    a: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        q0 = np.array(self.initial, dtype=float)
        a.setflags(write=False)
        q0.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "initial", q0)

    @property
    def size(self) -> int:
        return self.a.shape[0]

    @property
    def fail_index(self) -> int:
        return self.space.fail_index

    def check(self, atol: float = 0.0) -> None:
        """Raise ValueError unless the generator invariants hold."""
        a = self.a
        n = a.shape[0]
        if a.shape != (n, n) or self.initial.shape != (n,):
            raise ValueError("generator shape mismatch")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite rate in generator")
        off = a - np.diag(np.diag(a))
        if np.any(off < 0):
            raise ValueError("negative off-diagonal rate")
        scale = np.abs(np.diag(a)).max(initial=0.0)
        colsum = a.sum(axis=0)
        if np.any(np.abs(colsum) > atol + 8 * np.finfo(float).eps * scale):
            raise ValueError(f"column sums not zero: {colsum}")
        if np.any(a[:, self.fail_index] != 0):
            raise ValueError("FAIL state is not absorbing")
        if abs(self.initial.sum() - 1.0) > 1e-12 or np.any(self.initial < 0):
            raise ValueError("initial vector is not a probability vector")

    def transient_block(self) -> np.ndarray:
        keep = [i for i in range(self.size) if i != self.fail_index]
        return self.a[np.ix_(keep, keep)]

    def exit_rates(self) -> np.ndarray:
        """Rate into FAIL from each transient state."""
        keep = [i for i in range(self.size) if i != self.fail_index]
        return self.a[self.fail_index, keep]


def from_rates(space, n: int, rates: dict) -> Generator:
    """Assemble a generator from ``{(src, dst): rate}``; parallel edges add."""
    a = np.zeros((n, n))
    for (src, dst), r in rates.items():
        if src == dst:
            raise ValueError("self loop in rate table")
        a[dst, src] += r
    for k in range(n):
        a[k, k] = -math.fsum(a[j, k] for j in range(n) if j != k)
    q0 = np.zeros(n)
    q0[0] = 1.0
    return Generator(space, a, q0)


def _chain(cfg: RaidConfig, up, down, to_zero: bool) -> Generator:
    """Birth-death style chain with failure rates ``up(i)`` and repair rates
    ``down(i)``; repairs go to ``i - 1`` or, if ``to_zero``, straight to 0."""
    space = StateSpace1D(cfg.m_check)
    rates = {}
    for i in range(cfg.m_check + 1):
        r = up(i)
        if r > 0:
            rates[(i, i + 1)] = r
        if i >= 1:
            d = down(i)
            if d > 0:
                rates[(i, 0 if to_zero else i - 1)] = d
    return from_rates(space, space.size, rates)


def build_no_repair(cfg: RaidConfig) -> Generator:
    t = cfg.total
    return _chain(cfg, lambda i: (t - i) * cfg.lam, lambda i: 0.0, False)


def build_individual_repair(cfg: RaidConfig) -> Generator:
    t = cfg.total
    return _chain(cfg, lambda i: (t - i) * cfg.lam, lambda i: cfg.mu, False)


def build_simultaneous_repair(cfg: RaidConfig) -> Generator:
    t = cfg.total
    return _chain(cfg, lambda i: (t - i) * cfg.lam, lambda i: cfg.mu, True)


def build_imperfect_repair(cfg: RaidConfig) -> Generator:
    """Simultaneous repair where each service visit, with probability ``p``,
    damages a working drive instead of repairing the failed ones."""
    t, mu, p = cfg.total, cfg.mu, cfg.p

    def up(i):
        return t * cfg.lam if i == 0 else (t - i) * cfg.lam + mu * p

    return _chain(cfg, up, lambda i: mu * (1.0 - p), True)
