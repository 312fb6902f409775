"""Two-dimensional chain for latent sector errors.

State ``(i, j)``: ``i`` failed drives and ``j`` working drives carrying a
sector error. Interior states satisfy ``i + j <= M``. Boundary states
``(i, M + 1 - i)`` for ``0 <= i <= M - 1`` stand for "``j`` *or more*" drives
with sector errors. Anything with ``i = M + 1``, or ``i = M`` and ``j >= 1``,
is collapsed into the single absorbing FAIL state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import RaidConfig
from .model import Generator, from_rates

FAIL = "FAIL"


@dataclass(frozen=True)
class SectorStateSpace:
    m_check: int
    states: tuple = field(init=False)
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m_check < 1:
            raise ValueError("the sector model needs m_check >= 1")
        m = self.m_check
        states = [(i, j) for i in range(m + 1) for j in range(m + 2 - i)
                  if not self.is_fail(i, j)]
        states.append(FAIL)
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "_lookup", {s: k for k, s in enumerate(states)})

    def is_fail(self, i: int, j: int) -> bool:
        m = self.m_check
        return i >= m + 1 or (i == m and j >= 1)

    def is_boundary(self, i: int, j: int) -> bool:
        return i + j == self.m_check + 1

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def fail_index(self) -> int:
        return len(self.states) - 1

    @property
    def labels(self) -> tuple:
        out = []
        for s in self.states:
            if s == FAIL:
                out.append(FAIL)
            else:
                i, j = s
                out.append(f"{i}{j}+" if self.is_boundary(i, j) else f"{i}{j}")
        return tuple(out)

    def index(self, state) -> int:
        if state != FAIL and self.is_fail(*state):
            return self.fail_index
        return self._lookup[state]


def enumerate_sector_states(m_check: int) -> SectorStateSpace:
    return SectorStateSpace(m_check)


def expected_state_count(m_check: int) -> int:
    return (m_check + 1) * (m_check + 2) // 2 + m_check + 1


def _build(cfg: RaidConfig, p: float) -> Generator:
    space = SectorStateSpace(cfg.m_check)
    t, lam, mu, lam_s, mu_s = cfg.total, cfg.lam, cfg.mu, cfg.lambda_s, cfg.mu_s
    rates: dict = {}

    def add(src, dst, r):
        if r <= 0:
            return
        key = (space.index(src), space.index(dst))
        rates[key] = rates.get(key, 0.0) + r

    for s in space.states[:-1]:
        i, j = s
        if space.is_boundary(i, j):
            # types 6a / 6b: any drive failure, sector error or not
            add(s, (i + 1, j - 1), (t - i) * lam + (mu * p if i >= 1 else 0.0))
            if i >= 1:
                add(s, (0, j), mu * (1.0 - p))
            add(s, (i, 0), mu_s)
            continue
        clean = t - i - j
        if i == 0:
            add(s, (1, j), clean * lam)                        # 1a
            if j >= 1:
                add(s, (1, j - 1), j * lam)                    # 5a
        else:
            add(s, (i + 1, j), clean * lam + clean / (t - i) * mu * p)   # 1b
            if j >= 1:
                add(s, (i + 1, j - 1), j * lam + j / (t - i) * mu * p)   # 5b
            add(s, (0, j), mu * (1.0 - p))                     # 2
        add(s, (i, j + 1), clean * lam_s)                      # 3
        if j >= 1:
            add(s, (i, 0), mu_s)                               # 4
    return from_rates(space, space.size, rates)


def build_sector_generator(cfg: RaidConfig) -> Generator:
    """Sector errors with perfect simultaneous repair and scrubbing."""
    return _build(cfg, 0.0)


def build_sector_imperfect_generator(cfg: RaidConfig) -> Generator:
    """Sector errors where a service visit, with probability ``p``, damages a
    working drive chosen uniformly (clean or sector-errored)."""
    return _build(cfg, cfg.p)
