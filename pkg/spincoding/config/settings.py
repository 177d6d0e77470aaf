from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

from dotenv import load_dotenv

from ..utilities.errors import ConfigError

load_dotenv()

ENCODING_PHASES = ("pi", "quarter_pi")


def _get_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer.", {"value": raw}) from exc


def _get_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be a number.", {"value": raw}) from exc


@dataclass(frozen=True)
class Settings:
    log_level: str
    log_file: str
    solver_tol: float
    k_max: int
    n_max: int
    verify_batch: int
    verify_seed: int
    sweep_precision: int
    sweep_workers: int
    sweep_chunk_size: int
    encoding_phase: str


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    encoding_phase = os.getenv("SPINCODING_ENCODING_PHASE", "pi").strip() or "pi"
    if encoding_phase not in ENCODING_PHASES:
        raise ConfigError(
            "SPINCODING_ENCODING_PHASE must be one of: " + ", ".join(ENCODING_PHASES),
            {"value": encoding_phase},
        )

    solver_tol = _get_float("SPINCODING_SOLVER_TOL", 1e-9)
    if solver_tol <= 0:
        raise ConfigError("SPINCODING_SOLVER_TOL must be positive.", {"value": solver_tol})

    sweep_precision = _get_int("SPINCODING_SWEEP_PRECISION", 12)
    if not 1 <= sweep_precision <= 17:
        raise ConfigError("SPINCODING_SWEEP_PRECISION must be between 1 and 17.", {"value": sweep_precision})

    return Settings(
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        log_file=os.getenv("LOG_FILE", "").strip(),
        solver_tol=solver_tol,
        k_max=_get_int("SPINCODING_K_MAX", 32),
        n_max=_get_int("SPINCODING_N_MAX", 32),
        verify_batch=max(2, _get_int("SPINCODING_VERIFY_BATCH", 32)),
        verify_seed=_get_int("SPINCODING_VERIFY_SEED", 0),
        sweep_precision=sweep_precision,
        sweep_workers=max(1, _get_int("SPINCODING_SWEEP_WORKERS", 1)),
        sweep_chunk_size=max(1, _get_int("SPINCODING_SWEEP_CHUNK_SIZE", 1024)),
        encoding_phase=encoding_phase,
    )
