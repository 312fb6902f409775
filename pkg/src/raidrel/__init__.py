"""Reliability of RAID-like arrays with N data and M check drives.

Markov models (no repair, individual, simultaneous and imperfect repair,
latent sector errors), delay models with one check drive, closed forms,
and a Monte Carlo simulator used as an independent check.
"""

from .config import RaidConfig, load_config
from .models import MODEL_TAGS, model_mttdl, model_pdl
from .montecarlo import simulate
from .solver import evolve, moments_via_resolvent

__version__ = "0.1.0"
__all__ = ["RaidConfig", "load_config", "MODEL_TAGS", "model_pdl", "model_mttdl", "simulate",
           "evolve", "moments_via_resolvent"]
