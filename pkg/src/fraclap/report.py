"""Run configuration, result records, and file writers for the CLI."""

from __future__ import annotations

import ast
import csv
import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .battery import battery_names, battery_selection
from .errors import ConfigError

__all__ = ["RunConfig", "ReportRecord", "load_config", "fmt_float",
           "write_csv", "write_json", "write_dat"]


def fmt_float(x: Any) -> str:
    """17 significant digits: round-trip exact for doubles."""
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


@dataclass(frozen=True)
class RunConfig:
    """Validated knobs shared by every subcommand."""

    a: float = 0.0
    b: float = math.pi
    n_pts: int = 4096
    battery: str = "default"
    functions: Tuple[str, ...] = ()
    s_values: Tuple[float, ...] = (-0.75, -0.5, -0.25, 0.25, 0.5, 0.75,
                                   1.25, 2.5)
    dilate_s_values: Tuple[float, ...] = (-0.5, 0.5)
    alphas: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    sigmas: Tuple[float, ...] = (0.25, 0.5, 0.75)
    extension_functions: Tuple[str, ...] = ("sin2x", "tribump0")
    pointwise_cases: Tuple[Tuple[str, float], ...] = (
        ("sinx", 0.3), ("bump", 0.25), ("bump", 0.45), ("wallbump0", 0.6))
    hardy_sigma: float = 0.25
    hardy_fields: int = 5
    n_modes: int = 512
    xi_cells: int = 4096
    max_stages: int = 3
    field_nt: int = 320
    identity_rtol: float = 1e-3
    limit_rtol: float = 1e-3
    converge_levels: int = 3
    seed: int = 7
    jobs: int = 1
    out_dir: str = "reports"
    formats: Tuple[str, ...] = ("csv", "json")

    def validate(self) -> "RunConfig":
        if not (self.b > self.a) or not math.isfinite(self.a + self.b):
            raise ConfigError(f"invalid interval ({self.a}, {self.b})")
        if self.n_pts < 64:
            raise ConfigError("n_pts must be at least 64")
        names = self.functions or tuple(battery_selection(self.battery))
        known = set(battery_names())
        for nm in names:
            if nm not in known:
                raise ConfigError(f"unknown test function {nm!r}")
        for nm, sig in self.pointwise_cases:
            if nm not in known:
                raise ConfigError(f"unknown pointwise function {nm!r}")
            if not (0.0 < sig < 1.0):
                raise ConfigError(f"pointwise sigma {sig} out of (0, 1)")
        for sig in self.sigmas:
            if not (0.0 < sig < 1.0):
                raise ConfigError(f"sigma {sig} out of (0, 1)")
        for s in tuple(self.s_values) + tuple(self.dilate_s_values):
            if s <= -1.0:
                raise ConfigError(f"order {s} out of range (need > -1)")
        if len(self.s_values) == 0:
            raise ConfigError("empty s grid")
        if list(self.alphas) != sorted(set(self.alphas)) or \
                (self.alphas and self.alphas[0] != 1.0):
            raise ConfigError("alphas must increase starting at 1")
        if self.converge_levels < 1:
            raise ConfigError("need at least one refinement level")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        for f in self.formats:
            if f not in ("csv", "json", "both"):
                raise ConfigError(f"unknown format {f!r}")
        return self

    @property
    def selected_functions(self) -> Tuple[str, ...]:
        return self.functions or tuple(battery_selection(self.battery))

    def run_id(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


_TUPLE_FIELDS = {"functions", "s_values", "dilate_s_values", "alphas",
                 "sigmas", "extension_functions", "formats"}


def _parse_value(key: str, raw: str) -> Any:
    raw = raw.strip()
    if key == "pointwise_cases":
        cases = []
        for item in raw.split(","):
            item = item.strip()
            if not item:
                continue
            if ":" not in item:
                raise ConfigError(f"pointwise case {item!r} needs name:sigma")
            nm, sig = item.split(":", 1)
            cases.append((nm.strip(), float(sig)))
        return tuple(cases)
    try:
        val = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        if "," in raw:
            val = tuple(tok.strip() for tok in raw.split(",") if tok.strip())
        else:
            val = raw
    if key in _TUPLE_FIELDS:
        if isinstance(val, (list, tuple)):
            return tuple(val)
        return (val,)
    return val


def load_config(path: Optional[str] = None,
                overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read ``key = value`` lines (comments with #) and apply CLI overrides."""
    data: Dict[str, Any] = {}
    valid = {f.name: f for f in fields(RunConfig)}
    if path:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in valid:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            data[key] = _parse_value(key, raw)
    if overrides:
        for key, val in overrides.items():
            if val is not None:
                data[key] = val
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


@dataclass
class ReportRecord:
    """Self-describing record of one verification run."""

    run_id: str
    operation: str
    inputs: Dict[str, Any]
    outputs: Dict[str, Any]
    verdicts: Optional[Dict[str, Any]]
    error_budget: Optional[float]
    wall_time_s: float

    def to_json(self) -> Dict[str, Any]:
        return asdict(self)


class StopWatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


def write_csv(path: Path, header: Sequence[str],
              rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(v) for v in row])


def write_json(path: Path, payload: Any) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    try:
        import numpy as np
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
    except ImportError:                      # pragma: no cover
        pass
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def write_dat(path: Path, columns: Sequence[Sequence[float]],
              comment: str = "") -> None:
    """Whitespace-separated columns, ready for external plotters."""
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for row in zip(*columns):
            fh.write(" ".join(fmt_float(float(v)) for v in row) + "\n")
