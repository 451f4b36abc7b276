"""
Runtime settings.

Tolerances default to the values the invariants are stated with; a `.env`
file or the BWRANK_* environment variables override them.
"""

import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

ENV_PREFIX = "BWRANK_"


@dataclass(frozen=True)
class Settings:
    rank_tol: float = 1e-10
    angle_tol: float = 1e-8
    psd_clamp_tol: float = 1e-10
    tangency_tol: float = 1e-8
    orthonormal_tol: float = 1e-10
    certificate_tol: float = 1e-8
    oracle_agreement_tol: float = 1e-6
    dt: float = 1e-3
    reortho: bool = True
    seed: Optional[int] = None
    runs_dir: str = "runs"
    log_level: str = "WARNING"

    def with_overrides(self, **kwargs) -> "Settings":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or raw.strip() == "":
        return default
    return float(raw)


def env_seed() -> Optional[int]:
    """BWRANK_SEED, if set; it overrides any config file seed."""
    raw = os.getenv(ENV_PREFIX + "SEED")
    if raw is None or raw.strip() == "":
        return None
    return int(raw)


def get_settings() -> Settings:
    base = Settings()
    return Settings(
        rank_tol=_env_float("RANK_TOL", base.rank_tol),
        angle_tol=_env_float("ANGLE_TOL", base.angle_tol),
        psd_clamp_tol=base.psd_clamp_tol,
        tangency_tol=base.tangency_tol,
        orthonormal_tol=base.orthonormal_tol,
        certificate_tol=base.certificate_tol,
        oracle_agreement_tol=base.oracle_agreement_tol,
        dt=_env_float("DT", base.dt),
        reortho=base.reortho,
        seed=env_seed(),
        runs_dir=os.getenv(ENV_PREFIX + "RUNS_DIR", base.runs_dir),
        log_level=os.getenv(ENV_PREFIX + "LOG_LEVEL", base.log_level),
    )
