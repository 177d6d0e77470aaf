"""Flat ``key = value`` sweep configuration files.

Grammar, one entry per line; blank lines and lines starting with ``#`` are
ignored, and a ``#`` after a value starts a comment::

    quantity = chi | S_rho | validity | witness | Z
    output = results/fig1.csv          (optional; relative to the config file)
    precision = 12                     (optional, 1..17)
    fixed.<name> = <float>
    axis.<name> = <start>, <stop>, <count>[, linear | log]
    axis.<name> = <value>              (single point)

``<name>`` is one of J, beta0, dBzeff, Bz, T, gamma_e, t, theta1, phi1,
theta2, phi2. One or two ``axis.`` lines are required; the first one is the
outer loop of the grid. Keys may not repeat.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from ..schemas.sweep import SweepAxis, SweepConfig
from ..utilities.errors import ConfigError


def _parse_float(raw: str, line_no: int, key: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"Line {line_no}: '{key}' expects a number.", {"value": raw}) from exc


def _parse_axis(name: str, raw: str, line_no: int) -> Dict[str, Any]:
    parts = [part.strip() for part in raw.split(",")]
    key = f"axis.{name}"
    if len(parts) == 1:
        value = _parse_float(parts[0], line_no, key)
        return {"name": name, "start": value, "stop": value, "count": 1}
    if len(parts) not in (3, 4):
        raise ConfigError(
            f"Line {line_no}: '{key}' expects 'start, stop, count[, linear|log]'.", {"value": raw}
        )
    try:
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"Line {line_no}: axis count must be an integer.", {"value": parts[2]}) from exc
    axis: Dict[str, Any] = {
        "name": name,
        "start": _parse_float(parts[0], line_no, key),
        "stop": _parse_float(parts[1], line_no, key),
        "count": count,
    }
    if len(parts) == 4:
        axis["spacing"] = parts[3]
    return axis


def parse_sweep_config(text: str, base_dir: Optional[Path] = None) -> SweepConfig:
    seen: Dict[str, int] = {}
    fixed: Dict[str, float] = {}
    axes: List[Dict[str, Any]] = []
    payload: Dict[str, Any] = {}

    for line_no, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"Line {line_no}: expected 'key = value'.", {"line": line})
        key, value = (part.strip() for part in content.split("=", 1))
        if not key or not value:
            raise ConfigError(f"Line {line_no}: empty key or value.", {"line": line})
        if key in seen:
            raise ConfigError(f"Line {line_no}: '{key}' already set on line {seen[key]}.", {"key": key})
        seen[key] = line_no

        if key == "quantity":
            payload["quantity"] = value
        elif key == "output":
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            payload["output_path"] = path
        elif key == "precision":
            try:
                payload["precision"] = int(value)
            except ValueError as exc:
                raise ConfigError(f"Line {line_no}: precision must be an integer.", {"value": value}) from exc
        elif key.startswith("fixed."):
            fixed[key[len("fixed."):]] = _parse_float(value, line_no, key)
        elif key.startswith("axis."):
            axes.append(_parse_axis(key[len("axis."):], value, line_no))
        else:
            raise ConfigError(f"Line {line_no}: unknown key '{key}'.", {"key": key})

    if "quantity" not in payload:
        raise ConfigError("Config is missing 'quantity'.")
    if not axes:
        raise ConfigError("Config needs at least one 'axis.' entry.")

    try:
        return SweepConfig(axes=[SweepAxis(**axis) for axis in axes], fixed=fixed, **payload)
    except ValidationError as exc:
        details = [
            {"field": ".".join(str(part) for part in error["loc"]), "reason": error["msg"]}
            for error in exc.errors()
        ]
        raise ConfigError("Invalid sweep config.", {"errors": details}) from exc


def load_sweep_config(path: Path) -> SweepConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config file '{path}'.", {"error": str(exc)}) from exc
    return parse_sweep_config(text, base_dir=path.parent)
