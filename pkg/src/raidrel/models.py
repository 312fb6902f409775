"""Model tags shared by the CLI, the simulator and the silent-corruption map.

Markov tags map to generator builders. ``raid5`` is individual repair with
one check drive. The two delay tags (``delay-naive``, ``delay-rebuild``) are
defined for one check drive only.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import closed_forms as cf
from .config import ConfigError, RaidConfig
from .delay import (DEFAULT_STEPS_PER_DELAY, build_raid5_delay, dde_integrate,
                    dde_mttdl, pde_rebuild_integrate)
from .model import (build_imperfect_repair, build_individual_repair,
                    build_no_repair, build_simultaneous_repair)
from .sector import build_sector_generator, build_sector_imperfect_generator
from .solver import (evolve, moments_via_resolvent,
                     mttdl_via_reliability_integral)

BUILDERS = {
    "no-repair": build_no_repair,
    "individual": build_individual_repair,
    "simultaneous": build_simultaneous_repair,
    "imperfect": build_imperfect_repair,
    "sector": build_sector_generator,
    "sector-imperfect": build_sector_imperfect_generator,
    "raid5": build_individual_repair,
}
DELAY_TAGS = ("delay-naive", "delay-rebuild")
MODEL_TAGS = tuple(BUILDERS) + DELAY_TAGS
# the six Markov models that the simulator is checked against
MARKOV_MODELS = ("no-repair", "individual", "simultaneous", "imperfect",
                 "sector", "sector-imperfect")


class UnknownModel(ConfigError):
    pass


def check_model(tag: str, cfg: RaidConfig) -> None:
    if tag not in MODEL_TAGS:
        raise UnknownModel(f"unknown model {tag!r}; choose from {', '.join(MODEL_TAGS)}")
    if (tag == "raid5" or tag in DELAY_TAGS) and cfg.m_check != 1:
        raise ConfigError(f"model {tag!r} needs exactly one check drive (m = 1)")
    if tag.startswith("sector") and cfg.m_check < 1:
        raise ConfigError("the sector models need m >= 1")


def generator(tag: str, cfg: RaidConfig):
    check_model(tag, cfg)
    if tag in DELAY_TAGS:
        raise ConfigError(f"model {tag!r} has no Markov generator")
    return BUILDERS[tag](cfg)


def delay_dt(cfg: RaidConfig) -> float:
    return cfg.h / DEFAULT_STEPS_PER_DELAY


def model_trajectory(tag: str, cfg: RaidConfig, times):
    """Trajectory over ``times`` (years); delay models are integrated on their
    own grid up to ``times[-1]`` and returned as is."""
    check_model(tag, cfg)
    if tag in DELAY_TAGS and cfg.h > 0:
        t_end = float(times[-1])
        if tag == "delay-naive":
            sys = build_raid5_delay(cfg.n_data, cfg.lam, cfg.mu, cfg.h)
            return dde_integrate(sys, t_end, delay_dt(cfg))
        return pde_rebuild_integrate(cfg.n_data, cfg.lam, cfg.mu, cfg.h,
                                     t_end, delay_dt(cfg))[0]
    if tag in DELAY_TAGS:
        tag = "individual"
    return evolve(BUILDERS[tag](cfg), times)


def model_pdl(tag: str, cfg: RaidConfig, t: float | None = None) -> float:
    """PDL at ``t`` (default: the configured horizon)."""
    check_model(tag, cfg)
    t = cfg.horizon if t is None else t
    if tag == "no-repair":
        return cf.no_repair_pdl(cfg.n_data, cfg.m_check, cfg.lam, t)
    return float(model_trajectory(tag, cfg, [t]).pdl[-1])


@dataclass(frozen=True)
class MttdlRow:
    method: str        # closed-form | resolvent | integral
    mttdl: float
    variance: float    # NaN when the method gives no variance


def model_mttdl(tag: str, cfg: RaidConfig, integral: bool = False) -> list:
    """Every available MTTDL evaluation for ``tag``. The reliability integral
    is slow on stiff chains, so it is only run when asked."""
    check_model(tag, cfg)
    nan = float("nan")
    n, m, lam, mu, h = cfg.n_data, cfg.m_check, cfg.lam, cfg.mu, cfg.h
    rows = []
    if tag in DELAY_TAGS:
        if tag == "delay-naive":
            rows.append(MttdlRow("closed-form", cf.delay_naive_mttdl(n, lam, mu, h), nan))
            if integral and h > 0:
                sys = build_raid5_delay(n, lam, mu, h)
                rows.append(MttdlRow("integral", dde_mttdl(sys, delay_dt(cfg)), nan))
        else:
            rows.append(MttdlRow("closed-form", cf.pde_rebuild_mttdl(n, lam, mu, h), nan))
            if integral and h > 0:
                value = pde_rebuild_integrate(n, lam, mu, h, 0.0, delay_dt(cfg))[1]
                rows.append(MttdlRow("integral", value, nan))
        return rows
    gen = BUILDERS[tag](cfg)
    if tag == "no-repair":
        rows.append(MttdlRow("closed-form", cf.no_repair_mttdl(n, m, lam), nan))
    elif m == 1 and tag in ("individual", "simultaneous", "raid5") or (
            tag == "imperfect" and m == 1 and cfg.p == 0):
        rep = cf.raid5_moments(n, lam, mu)
        rows.append(MttdlRow("closed-form", rep.m1, rep.variance))
    rep = moments_via_resolvent(gen)
    rows.append(MttdlRow("resolvent", rep.m1, rep.variance))
    if integral:
        rows.append(MttdlRow("integral", mttdl_via_reliability_integral(gen), nan))
    return rows
