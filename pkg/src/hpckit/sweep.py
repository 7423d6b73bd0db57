"""Sweep data model: knob spaces, configurations, measured rows, CSV I/O.

A sweep is the cross product of every knob's levels. Each row pairs one
configuration with the eleven monitor values measured under it and,
once derived, the five requirement values. Column order everywhere
follows the canonical monitor and requirement lists below.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import DegenerateSeriesError, IngestionError

# Canonical monitor order: (csv column name, attribute name).
MONITOR_FIELDS: tuple[tuple[str, str], ...] = (
    ("execution_time_s", "execution_time"),
    ("ipc", "ipc"),
    ("dram_power_w", "dram_power"),
    ("cpu_power_w", "cpu_power"),
    ("peak_power_w", "peak_power"),
    ("cpu_temp_c", "cpu_temperature"),
    ("mpki", "mpki"),
    ("server_mtbf_h", "server_mtbf"),
    ("system_mtbf_h", "system_mtbf"),
    ("capex", "capex"),
    ("opex", "opex"),
)
MONITOR_NAMES: tuple[str, ...] = tuple(name for name, _ in MONITOR_FIELDS)

# Canonical requirement order: (csv column name, attribute name).
REQUIREMENT_FIELDS: tuple[tuple[str, str], ...] = (
    ("performance_s", "performance"),
    ("power_w", "power"),
    ("energy_j", "energy"),
    ("availability", "availability"),
    ("cost", "cost"),
)
REQUIREMENT_NAMES: tuple[str, ...] = tuple(name for name, _ in REQUIREMENT_FIELDS)

_MONITOR_ATTR = dict(MONITOR_FIELDS)
_REQUIREMENT_ATTR = dict(REQUIREMENT_FIELDS)

# Numbers are rendered with 12 significant digits so a written file
# re-reads to the same rendered values.
_FLOAT_FMT = ".12g"


def render_value(x: float) -> str:
    """Render a numeric field the way the CSV writer does."""
    return format(float(x), _FLOAT_FMT)


@dataclass(frozen=True)
class KnobLevel:
    """One selectable setting of a knob.

    ``value`` carries the physical magnitude when the level has one
    (e.g. a frequency in GHz); purely categorical levels leave it None.
    """

    label: str
    value: float | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("knob level label must be non-empty")


@dataclass(frozen=True)
class KnobDef:
    """A named knob with at least two ordered levels and a baseline."""

    name: str
    levels: tuple[KnobLevel, ...]
    baseline: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("knob name must be non-empty")
        if len(self.levels) < 2:
            raise ValueError(f"knob {self.name!r} needs at least 2 levels")
        labels = [lv.label for lv in self.levels]
        if len(set(labels)) != len(labels):
            raise ValueError(f"knob {self.name!r} has duplicate level labels")
        if not 0 <= self.baseline < len(self.levels):
            raise ValueError(f"knob {self.name!r} baseline index out of range")
        values = [lv.value for lv in self.levels]
        with_value = [v for v in values if v is not None]
        if with_value and len(with_value) != len(values):
            raise ValueError(
                f"knob {self.name!r}: either every level has a numeric value or none does"
            )
        if with_value and any(b <= a for a, b in zip(with_value, with_value[1:])):
            raise ValueError(f"knob {self.name!r}: numeric level values must strictly increase")

    def level_index(self, label: str) -> int:
        for i, lv in enumerate(self.levels):
            if lv.label == label:
                return i
        raise KeyError(f"knob {self.name!r} has no level {label!r}")

    def numeric_value(self, index: int) -> float:
        """Numeric encoding of a level: physical value if present, else the index."""
        lv = self.levels[index]
        return float(lv.value) if lv.value is not None else float(index)


@dataclass(frozen=True)
class KnobSpace:
    """An ordered collection of knobs spanning a sweep."""

    knobs: tuple[KnobDef, ...]

    def __post_init__(self):
        if not self.knobs:
            raise ValueError("knob space must contain at least one knob")
        names = [k.name for k in self.knobs]
        if len(set(names)) != len(names):
            raise ValueError("knob names must be unique")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(k.name for k in self.knobs)

    def knob(self, name: str) -> KnobDef:
        for k in self.knobs:
            if k.name == name:
                return k
        raise KeyError(f"no knob named {name!r}")

    def knob_index(self, name: str) -> int:
        for i, k in enumerate(self.knobs):
            if k.name == name:
                return i
        raise KeyError(f"no knob named {name!r}")

    def size(self) -> int:
        n = 1
        for k in self.knobs:
            n *= len(k.levels)
        return n

    def baseline_configuration(self) -> "Configuration":
        return Configuration(tuple(k.baseline for k in self.knobs))

    def validate_configuration(self, config: "Configuration") -> None:
        if len(config.levels) != len(self.knobs):
            raise ValueError(
                f"configuration has {len(config.levels)} levels, space has {len(self.knobs)} knobs"
            )
        for knob, idx in zip(self.knobs, config.levels):
            if not 0 <= idx < len(knob.levels):
                raise ValueError(f"level index {idx} out of range for knob {knob.name!r}")

    def to_json_dict(self) -> dict:
        return {
            "knobs": [
                {
                    "name": k.name,
                    "levels": [
                        {"label": lv.label} if lv.value is None
                        else {"label": lv.label, "value": lv.value}
                        for lv in k.levels
                    ],
                    "baseline": k.baseline,
                }
                for k in self.knobs
            ]
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "KnobSpace":
        try:
            knobs = []
            for kd in data["knobs"]:
                levels = tuple(
                    KnobLevel(str(lv["label"]), float(lv["value"]) if "value" in lv else None)
                    for lv in kd["levels"]
                )
                knobs.append(KnobDef(str(kd["name"]), levels, int(kd.get("baseline", 0))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad knob space description: {exc}") from exc
        return cls(tuple(knobs))


@dataclass(frozen=True)
class Configuration:
    """One point in a knob space, stored as per-knob level indices."""

    levels: tuple[int, ...]

    def __post_init__(self):
        if any(i < 0 for i in self.levels):
            raise ValueError("level indices must be non-negative")

    def labels(self, space: KnobSpace) -> tuple[str, ...]:
        space.validate_configuration(self)
        return tuple(k.levels[i].label for k, i in zip(space.knobs, self.levels))


def enumerate_configs(space: KnobSpace) -> list[Configuration]:
    """All configurations in lexicographic order, first knob slowest-varying."""
    ranges = [range(len(k.levels)) for k in space.knobs]
    return [Configuration(tuple(p)) for p in itertools.product(*ranges)]


def enumeration_rank(space: KnobSpace, config: Configuration) -> int:
    """Position of ``config`` within ``enumerate_configs(space)``."""
    space.validate_configuration(config)
    rank = 0
    for knob, idx in zip(space.knobs, config.levels):
        rank = rank * len(knob.levels) + idx
    return rank


def encode_knob_column(space: KnobSpace, name: str, configs: list[Configuration]) -> np.ndarray:
    """Numeric series for one knob across configurations.

    Levels with a physical value use it; otherwise the level index is
    used, so binary knobs encode as 0/1.
    """
    knob = space.knob(name)
    pos = space.knob_index(name)
    return np.array([knob.numeric_value(c.levels[pos]) for c in configs], dtype=float)


def zscore(series: np.ndarray) -> np.ndarray:
    """Standardize a series with the sample (n-1) standard deviation."""
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("zscore needs a 1-d series with at least 2 values")
    sd = arr.std(ddof=1)
    if sd == 0.0:
        raise DegenerateSeriesError("series has zero variance")
    return (arr - arr.mean()) / sd


@dataclass(frozen=True)
class MonitorVector:
    """The eleven measured monitor values for one configuration."""

    execution_time: float
    ipc: float
    dram_power: float
    cpu_power: float
    peak_power: float
    cpu_temperature: float
    mpki: float
    server_mtbf: float
    system_mtbf: float
    capex: float
    opex: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"monitor {f.name} must be finite, got {v!r}")
        if self.execution_time <= 0:
            raise ValueError("execution_time must be positive")
        for name in ("dram_power", "cpu_power", "peak_power", "mpki", "capex", "opex"):
            if getattr(self, name) < 0:
                raise ValueError(f"monitor {name} must be non-negative")
        if self.peak_power < self.cpu_power:
            raise ValueError("peak_power must be at least cpu_power")
        if self.server_mtbf <= 0 or self.system_mtbf <= 0:
            raise ValueError("MTBF monitors must be positive")

    def value(self, monitor_name: str) -> float:
        return getattr(self, _MONITOR_ATTR[monitor_name])

    def as_array(self) -> np.ndarray:
        return np.array([self.value(n) for n in MONITOR_NAMES], dtype=float)


@dataclass(frozen=True)
class RequirementValues:
    """The five derived requirement values for one configuration."""

    performance: float
    power: float
    energy: float
    availability: float
    cost: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"requirement {f.name} must be finite, got {v!r}")
        if not 0.0 <= self.availability <= 1.0:
            raise ValueError("availability must lie in [0, 1]")
        for name in ("performance", "power", "energy", "cost"):
            if getattr(self, name) < 0:
                raise ValueError(f"requirement {name} must be non-negative")
        if not math.isclose(self.energy, self.performance * self.power,
                            rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError(
                "energy must equal performance times power "
                f"({self.energy!r} vs {self.performance * self.power!r})"
            )

    def value(self, requirement_name: str) -> float:
        return getattr(self, _REQUIREMENT_ATTR[requirement_name])

    def as_array(self) -> np.ndarray:
        return np.array([self.value(n) for n in REQUIREMENT_NAMES], dtype=float)


@dataclass(frozen=True)
class SweepRow:
    """One configuration with its monitors and, once derived, requirements."""

    config: Configuration
    monitors: MonitorVector
    requirements: RequirementValues | None = None


@dataclass(frozen=True)
class SweepDataset:
    """A knob space plus one row per swept configuration.

    ``metadata`` holds provenance strings (seed, parameter hash) which
    are written out as comment lines in the CSV form.
    ``requirement_spec`` optionally pins the feasibility thresholds the
    dataset was built against; ranking falls back to defaults when it
    is absent.
    """

    space: KnobSpace
    rows: tuple[SweepRow, ...]
    metadata: dict = field(default_factory=dict)
    requirement_spec: object | None = None

    def __post_init__(self):
        if not self.rows:
            raise ValueError("dataset must contain at least one row")
        seen = set()
        for row in self.rows:
            self.space.validate_configuration(row.config)
            if row.config.levels in seen:
                raise ValueError(f"duplicate configuration {row.config.levels}")
            seen.add(row.config.levels)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def is_complete(self) -> bool:
        return len(self.rows) == self.space.size()

    @property
    def is_derived(self) -> bool:
        return all(r.requirements is not None for r in self.rows)

    def configs(self) -> list[Configuration]:
        return [r.config for r in self.rows]

    def monitor_column(self, name: str) -> np.ndarray:
        if name not in _MONITOR_ATTR:
            raise KeyError(f"unknown monitor {name!r}")
        return np.array([r.monitors.value(name) for r in self.rows], dtype=float)

    def requirement_column(self, name: str) -> np.ndarray:
        if name not in _REQUIREMENT_ATTR:
            raise KeyError(f"unknown requirement {name!r}")
        if not self.is_derived:
            raise ValueError("dataset has underived rows; derive requirements first")
        return np.array([r.requirements.value(name) for r in self.rows], dtype=float)

    def knob_column(self, name: str) -> np.ndarray:
        return encode_knob_column(self.space, name, self.configs())

    def row_for(self, config: Configuration) -> SweepRow:
        for row in self.rows:
            if row.config == config:
                return row
        raise KeyError(f"no row for configuration {config.levels}")

    def with_metadata(self, **extra) -> "SweepDataset":
        md = dict(self.metadata)
        md.update(extra)
        return replace(self, metadata=md)


def export_csv(ds: SweepDataset, path_or_file) -> None:
    """Write a dataset as UTF-8 CSV with comment-line metadata.

    Knob columns carry level labels, monitor and requirement columns
    carry numbers rendered with 12 significant digits.
    """
    if hasattr(path_or_file, "write"):
        _write_csv(ds, path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            _write_csv(ds, fh)


def _write_csv(ds: SweepDataset, fh) -> None:
    for key in sorted(ds.metadata):
        fh.write(f"# {key}: {ds.metadata[key]}\n")
    writer = csv.writer(fh, lineterminator="\n")
    header = [f"knob:{n}" for n in ds.space.names]
    header += [f"mon:{n}" for n in MONITOR_NAMES]
    derived = ds.is_derived
    if derived:
        header += [f"req:{n}" for n in REQUIREMENT_NAMES]
    writer.writerow(header)
    for row in ds.rows:
        record = list(row.config.labels(ds.space))
        record += [render_value(row.monitors.value(n)) for n in MONITOR_NAMES]
        if derived:
            record += [render_value(row.requirements.value(n)) for n in REQUIREMENT_NAMES]
        writer.writerow(record)


def export_csv_string(ds: SweepDataset) -> str:
    buf = io.StringIO()
    _write_csv(ds, buf)
    return buf.getvalue()


def ingest_csv(path_or_file, space: KnobSpace) -> SweepDataset:
    """Read a sweep CSV back into a dataset, validating against ``space``.

    Raises IngestionError naming the offending row and column on any
    missing column, unknown level label, duplicate configuration or
    non-finite number.
    """
    if hasattr(path_or_file, "read"):
        return _read_csv(path_or_file, space)
    with open(path_or_file, "r", encoding="utf-8", newline="") as fh:
        return _read_csv(fh, space)


def _read_csv(fh, space: KnobSpace) -> SweepDataset:
    metadata = {}
    rows_text = []
    for line in fh:
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, val = body.partition(":")
                metadata[key.strip()] = val.strip()
            continue
        if line.strip():
            rows_text.append(line)
    if not rows_text:
        raise IngestionError("empty file: no header row")

    reader = csv.reader(rows_text)
    header = next(reader)
    col_index = {name: i for i, name in enumerate(header)}

    knob_cols = []
    for name in space.names:
        key = f"knob:{name}"
        if key not in col_index:
            raise IngestionError(f"missing column {key!r}")
        knob_cols.append(col_index[key])
    mon_cols = []
    for name in MONITOR_NAMES:
        key = f"mon:{name}"
        if key not in col_index:
            raise IngestionError(f"missing column {key!r}")
        mon_cols.append(col_index[key])
    has_reqs = all(f"req:{n}" in col_index for n in REQUIREMENT_NAMES)
    any_reqs = any(f"req:{n}" in col_index for n in REQUIREMENT_NAMES)
    if any_reqs and not has_reqs:
        missing = [n for n in REQUIREMENT_NAMES if f"req:{n}" not in col_index]
        raise IngestionError(f"partial requirement columns; missing req:{missing[0]}")
    req_cols = [col_index[f"req:{n}"] for n in REQUIREMENT_NAMES] if has_reqs else None

    rows = []
    seen = set()
    for lineno, record in enumerate(reader, start=2):
        if len(record) != len(header):
            raise IngestionError(f"row {lineno}: expected {len(header)} cells, got {len(record)}")
        levels = []
        for knob, ci in zip(space.knobs, knob_cols):
            label = record[ci]
            try:
                levels.append(knob.level_index(label))
            except KeyError:
                raise IngestionError(
                    f"row {lineno}: unknown level {label!r} for knob {knob.name!r}"
                ) from None
        config = Configuration(tuple(levels))
        if config.levels in seen:
            raise IngestionError(f"row {lineno}: duplicate configuration {config.levels}")
        seen.add(config.levels)

        mon_values = [_parse_number(record[ci], lineno, header[ci]) for ci in mon_cols]
        try:
            monitors = MonitorVector(*mon_values)
        except ValueError as exc:
            raise IngestionError(f"row {lineno}: {exc}") from exc

        requirements = None
        if req_cols is not None:
            req_values = [_parse_number(record[ci], lineno, header[ci]) for ci in req_cols]
            try:
                requirements = RequirementValues(*req_values)
            except ValueError as exc:
                raise IngestionError(f"row {lineno}: {exc}") from exc
        rows.append(SweepRow(config, monitors, requirements))

    if not rows:
        raise IngestionError("no rows in the data section")
    try:
        return SweepDataset(space, tuple(rows), metadata)
    except ValueError as exc:
        raise IngestionError(str(exc)) from exc


def _parse_number(text: str, lineno: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise IngestionError(f"row {lineno}, column {column}: not a number: {text!r}") from None
    if not np.isfinite(value):
        raise IngestionError(f"row {lineno}, column {column}: non-finite value {text!r}")
    return value


def load_knob_space(path) -> KnobSpace:
    """Load a knob space from its JSON file form."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return KnobSpace.from_json_dict(data)


def save_knob_space(space: KnobSpace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(space.to_json_dict(), fh, indent=2)
        fh.write("\n")
