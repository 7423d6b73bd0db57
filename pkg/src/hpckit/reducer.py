"""Correlation-driven reduction of requirements, monitors and knobs.

The reduction runs in three steps over a derived sweep dataset:

1. Prune mutually correlated columns. Among all pairs with |r| at or
   above the threshold, the strongest pair is resolved by removing the
   member whose summed |r| against the other live columns is smaller,
   and the scan repeats until no pair crosses the threshold. The same
   procedure runs first over requirement columns, then over monitor
   columns.
2. Map every surviving requirement to the surviving monitor with the
   largest |r|. The union of mapped monitors is the reduced monitor
   set an operator actually needs to observe.
3. Keep the knobs whose |r| against at least one monitor in the
   reduced set reaches the knob threshold; the rest are fixed at
   baseline.

Zero-variance columns cannot carry a defined correlation; they are
excluded up front with a warning and reported as removed, never
silently coerced to r = 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateSeriesError, MappingError
from .sweep import MONITOR_NAMES, REQUIREMENT_NAMES, SweepDataset, enumeration_rank

log = logging.getLogger(__name__)

DEFAULT_REQUIREMENT_THRESHOLD = 0.90
DEFAULT_KNOB_THRESHOLD = 0.40

Column = tuple[str, np.ndarray]


def pearson(x, y) -> float:
    """Pearson correlation of two equal-length series, clamped to [-1, 1].

    Raises DegenerateSeriesError when either series has zero variance;
    the coefficient is undefined there and must not be reported as 0.

    Exactly affine pairs (y = a*x + b) return exactly +1.0 or -1.0: by
    the Cauchy-Schwarz equality condition |r| = 1 holds only for linear
    dependence, so a result within 1e-12 of the bound (reachable only
    through round-off on affine data, never by non-degenerate series)
    is snapped to the bound.
    """
    ax = np.asarray(x, dtype=float)
    ay = np.asarray(y, dtype=float)
    if ax.ndim != 1 or ax.shape != ay.shape:
        raise ValueError("pearson needs two 1-d series of equal length")
    if ax.size < 2:
        raise ValueError("pearson needs at least 2 points")
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sx = math.sqrt(float(np.dot(dx, dx)))
    sy = math.sqrt(float(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSeriesError("correlation undefined for a zero-variance series")
    r = float(np.dot(dx, dy)) / (sx * sy)
    if 1.0 - abs(r) <= 1e-12:
        return math.copysign(1.0, r)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Labeled correlation table with an explicit undefined-entry mask."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    defined: np.ndarray

    @classmethod
    def build(cls, rows: Sequence[Column], cols: Sequence[Column]) -> "CorrelationMatrix":
        values = np.full((len(rows), len(cols)), np.nan)
        defined = np.zeros((len(rows), len(cols)), dtype=bool)
        for i, (_, x) in enumerate(rows):
            for j, (_, y) in enumerate(cols):
                try:
                    values[i, j] = pearson(x, y)
                    defined[i, j] = True
                except DegenerateSeriesError:
                    pass
        return cls(tuple(n for n, _ in rows), tuple(n for n, _ in cols), values, defined)

    def value(self, row: str, col: str) -> float | None:
        i = self.row_labels.index(row)
        j = self.col_labels.index(col)
        return float(self.values[i, j]) if self.defined[i, j] else None

    def to_json_dict(self) -> dict:
        return {
            "rows": list(self.row_labels),
            "cols": list(self.col_labels),
            "values": [
                [float(self.values[i, j]) if self.defined[i, j] else None
                 for j in range(len(self.col_labels))]
                for i in range(len(self.row_labels))
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CorrelationMatrix":
        rows = tuple(data["rows"])
        cols = tuple(data["cols"])
        values = np.full((len(rows), len(cols)), np.nan)
        defined = np.zeros((len(rows), len(cols)), dtype=bool)
        for i, row in enumerate(data["values"]):
            for j, cell in enumerate(row):
                if cell is not None:
                    values[i, j] = float(cell)
                    defined[i, j] = True
        return cls(rows, cols, values, defined)


@dataclass(frozen=True)
class RemovalRecord:
    """Why one column left the analysis."""

    removed: str
    reason: str  # "correlated", "zero_variance" or "unmapped"
    partner: str | None = None
    coefficient: float | None = None
    removed_sum: float | None = None
    partner_sum: float | None = None

    def describe(self) -> str:
        if self.reason == "correlated":
            return (f"{self.removed}: correlated with {self.partner} "
                    f"(r = {self.coefficient:+.4f})")
        if self.reason == "zero_variance":
            return f"{self.removed}: zero variance"
        return f"{self.removed}: not the best proxy for any requirement"


class MonitorMatch(NamedTuple):
    monitor: str
    coefficient: float


class KnobSelection(NamedTuple):
    knob: str
    monitor: str
    coefficient: float


def prune_correlated(
    columns: Sequence[Column], threshold: float
) -> tuple[list[str], list[RemovalRecord]]:
    """Iteratively remove one member of each over-threshold pair.

    Returns the kept labels in their original order and the removal
    log. Threshold comparisons use |r|. When the two members of a pair
    tie on summed correlation, the later-listed column is removed.
    """
    _check_threshold(threshold, "correlation")
    names = [n for n, _ in columns]
    if len(set(names)) != len(names):
        raise ValueError("column labels must be unique")

    removals: list[RemovalRecord] = []
    live: list[Column] = []
    for name, series in columns:
        arr = np.asarray(series, dtype=float)
        if arr.std() == 0.0:
            log.warning("column %s has zero variance; excluded from pruning", name)
            removals.append(RemovalRecord(name, "zero_variance"))
        else:
            live.append((name, arr))

    order = {name: i for i, (name, _) in enumerate(columns)}
    while len(live) >= 2:
        n = len(live)
        corr = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                corr[i, j] = corr[j, i] = pearson(live[i][1], live[j][1])
        best_pair = None
        best_abs = threshold
        for i in range(n):
            for j in range(i + 1, n):
                a = abs(corr[i, j])
                if a > best_abs or (best_pair is None and a >= threshold):
                    best_pair, best_abs = (i, j), a
        if best_pair is None:
            break
        i, j = best_pair
        # Summed |r| against every other live column decides which
        # member goes; the shared pair entry cancels out.
        sum_i = float(np.abs(corr[i]).sum() - 1.0)
        sum_j = float(np.abs(corr[j]).sum() - 1.0)
        if sum_i < sum_j:
            drop, keep = i, j
        elif sum_j < sum_i:
            drop, keep = j, i
        else:
            drop, keep = (j, i) if order[live[j][0]] > order[live[i][0]] else (i, j)
        removals.append(
            RemovalRecord(
                removed=live[drop][0],
                reason="correlated",
                partner=live[keep][0],
                coefficient=float(corr[i, j]),
                removed_sum=sum_i if drop == i else sum_j,
                partner_sum=sum_j if drop == i else sum_i,
            )
        )
        del live[drop]

    kept = [name for name, _ in live]
    return kept, removals


def map_requirements_to_monitors(
    requirements: Sequence[Column], monitors: Sequence[Column]
) -> dict[str, MonitorMatch]:
    """Pick the strongest-|r| monitor for each requirement.

    Ties go to the earlier-listed monitor. A requirement whose
    correlation is undefined against every monitor cannot be mapped
    and raises MappingError naming it.
    """
    if not monitors:
        raise ValueError("no monitors to map against")
    mapping: dict[str, MonitorMatch] = {}
    for req_name, req_series in requirements:
        best: MonitorMatch | None = None
        for mon_name, mon_series in monitors:
            try:
                r = pearson(req_series, mon_series)
            except DegenerateSeriesError:
                continue
            if best is None or abs(r) > abs(best.coefficient):
                best = MonitorMatch(mon_name, r)
        if best is None:
            raise MappingError(
                f"requirement {req_name!r} has no defined correlation with any monitor"
            )
        mapping[req_name] = best
    return mapping


def select_knobs(
    knobs: Sequence[Column], monitors: Sequence[Column], threshold: float
) -> tuple[list[KnobSelection], list[KnobSelection], CorrelationMatrix]:
    """Split knobs into selected and rejected against the monitor set.

    A knob is selected when its strongest |r| against any of the given
    monitors reaches the threshold. Returns (selected, rejected, full
    coefficient table); each entry records the knob's best monitor.
    """
    _check_threshold(threshold, "knob")
    if not monitors:
        raise ValueError("no monitors to correlate knobs against")
    table = CorrelationMatrix.build(knobs, monitors)
    selected: list[KnobSelection] = []
    rejected: list[KnobSelection] = []
    for i, (knob_name, _) in enumerate(knobs):
        best: KnobSelection | None = None
        for j, (mon_name, _) in enumerate(monitors):
            if not table.defined[i, j]:
                continue
            r = float(table.values[i, j])
            if best is None or abs(r) > abs(best.coefficient):
                best = KnobSelection(knob_name, mon_name, r)
        if best is None:
            log.warning("knob %s has no defined correlation with any monitor", knob_name)
            rejected.append(KnobSelection(knob_name, "", 0.0))
        elif abs(best.coefficient) >= threshold:
            selected.append(best)
        else:
            rejected.append(best)
    return selected, rejected, table


@dataclass(frozen=True)
class ReductionReport:
    """Everything the reduction decided and why."""

    requirement_threshold: float
    knob_threshold: float
    kept_requirements: tuple[str, ...]
    removed_requirements: tuple[RemovalRecord, ...]
    kept_monitors: tuple[str, ...]
    removed_monitors: tuple[RemovalRecord, ...]
    requirement_to_monitor: dict[str, MonitorMatch]
    selected_knobs: tuple[KnobSelection, ...]
    rejected_knobs: tuple[KnobSelection, ...]
    knob_coefficients: CorrelationMatrix

    @property
    def selected_knob_names(self) -> tuple[str, ...]:
        return tuple(k.knob for k in self.selected_knobs)

    def to_json_dict(self) -> dict:
        return {
            "thresholds": {
                "requirement": self.requirement_threshold,
                "knob": self.knob_threshold,
            },
            "kept_requirements": list(self.kept_requirements),
            "removed_requirements": [_removal_json(r) for r in self.removed_requirements],
            "kept_monitors": list(self.kept_monitors),
            "removed_monitors": [_removal_json(r) for r in self.removed_monitors],
            "requirement_to_monitor": {
                req: {"monitor": m.monitor, "coefficient": m.coefficient}
                for req, m in self.requirement_to_monitor.items()
            },
            "selected_knobs": [
                {"knob": k.knob, "monitor": k.monitor, "coefficient": k.coefficient}
                for k in self.selected_knobs
            ],
            "rejected_knobs": [
                {"knob": k.knob, "monitor": k.monitor, "coefficient": k.coefficient}
                for k in self.rejected_knobs
            ],
            "knob_coefficients": self.knob_coefficients.to_json_dict(),
        }

    def to_text(self) -> str:
        lines = ["Reduction summary", "================="]
        lines.append(f"requirement threshold: {self.requirement_threshold}")
        lines.append(f"knob threshold:        {self.knob_threshold}")
        lines.append("")
        lines.append("kept requirements: " + ", ".join(self.kept_requirements))
        for rec in self.removed_requirements:
            lines.append(f"  removed {rec.describe()}")
        lines.append("kept monitors:     " + ", ".join(self.kept_monitors))
        for rec in self.removed_monitors:
            lines.append(f"  removed {rec.describe()}")
        lines.append("")
        lines.append("requirement -> monitor")
        for req, m in self.requirement_to_monitor.items():
            lines.append(f"  {req:<14} -> {m.monitor} (r = {m.coefficient:+.4f})")
        lines.append("")
        lines.append("selected knobs")
        for k in self.selected_knobs:
            lines.append(f"  {k.knob:<16} via {k.monitor} (r = {k.coefficient:+.4f})")
        lines.append("rejected knobs")
        for k in self.rejected_knobs:
            if k.monitor:
                lines.append(f"  {k.knob:<16} best {k.monitor} (r = {k.coefficient:+.4f})")
            else:
                lines.append(f"  {k.knob:<16} no defined correlation")
        return "\n".join(lines) + "\n"

    def coefficients_csv(self) -> str:
        """Knob-by-monitor coefficient table as CSV text."""
        out = ["knob," + ",".join(self.knob_coefficients.col_labels)]
        for i, knob in enumerate(self.knob_coefficients.row_labels):
            cells = []
            for j in range(len(self.knob_coefficients.col_labels)):
                if self.knob_coefficients.defined[i, j]:
                    cells.append(format(float(self.knob_coefficients.values[i, j]), ".6f"))
                else:
                    cells.append("")
            out.append(knob + "," + ",".join(cells))
        return "\n".join(out) + "\n"

    @classmethod
    def from_json_dict(cls, data: dict) -> "ReductionReport":
        def records(items):
            return tuple(
                RemovalRecord(
                    removed=d["removed"],
                    reason=d["reason"],
                    partner=d.get("partner"),
                    coefficient=d.get("coefficient"),
                    removed_sum=d.get("removed_sum"),
                    partner_sum=d.get("partner_sum"),
                )
                for d in items
            )

        def selections(items):
            return tuple(
                KnobSelection(d["knob"], d["monitor"], d["coefficient"]) for d in items
            )

        return cls(
            requirement_threshold=data["thresholds"]["requirement"],
            knob_threshold=data["thresholds"]["knob"],
            kept_requirements=tuple(data["kept_requirements"]),
            removed_requirements=records(data["removed_requirements"]),
            kept_monitors=tuple(data["kept_monitors"]),
            removed_monitors=records(data["removed_monitors"]),
            requirement_to_monitor={
                req: MonitorMatch(d["monitor"], d["coefficient"])
                for req, d in data["requirement_to_monitor"].items()
            },
            selected_knobs=selections(data["selected_knobs"]),
            rejected_knobs=selections(data["rejected_knobs"]),
            knob_coefficients=CorrelationMatrix.from_json_dict(data["knob_coefficients"]),
        )


def _removal_json(rec: RemovalRecord) -> dict:
    return {
        "removed": rec.removed,
        "reason": rec.reason,
        "partner": rec.partner,
        "coefficient": rec.coefficient,
        "removed_sum": rec.removed_sum,
        "partner_sum": rec.partner_sum,
    }


def reduce(
    ds: SweepDataset,
    requirement_threshold: float = DEFAULT_REQUIREMENT_THRESHOLD,
    knob_threshold: float = DEFAULT_KNOB_THRESHOLD,
) -> ReductionReport:
    """Run the full three-step reduction over a derived dataset."""
    if not ds.is_derived:
        raise ValueError("dataset has underived rows; derive requirements first")
    if len(ds) < 3:
        raise ValueError("reduction needs at least 3 rows")

    # Canonicalize row order so the report is bit-identical under any
    # permutation of the input rows: summation order would otherwise
    # leak row order into the last bits of every coefficient.
    ordered = tuple(
        sorted(ds.rows, key=lambda r: enumeration_rank(ds.space, r.config))
    )
    if ordered != ds.rows:
        ds = replace(ds, rows=ordered)

    req_columns = [(n, ds.requirement_column(n)) for n in REQUIREMENT_NAMES]
    mon_columns = [(n, ds.monitor_column(n)) for n in MONITOR_NAMES]

    kept_reqs, removed_reqs = prune_correlated(req_columns, requirement_threshold)
    surviving_mons, removed_mons = prune_correlated(mon_columns, requirement_threshold)

    mapping = map_requirements_to_monitors(
        [c for c in req_columns if c[0] in kept_reqs],
        [c for c in mon_columns if c[0] in surviving_mons],
    )

    mapped = {m.monitor for m in mapping.values()}
    kept_monitors = tuple(n for n in MONITOR_NAMES if n in mapped)
    removed = list(removed_mons)
    for name in surviving_mons:
        if name not in mapped:
            removed.append(RemovalRecord(name, "unmapped"))

    knob_columns = [(n, ds.knob_column(n)) for n in ds.space.names]
    selected, rejected, table = select_knobs(
        knob_columns,
        [c for c in mon_columns if c[0] in kept_monitors],
        knob_threshold,
    )

    return ReductionReport(
        requirement_threshold=requirement_threshold,
        knob_threshold=knob_threshold,
        kept_requirements=tuple(kept_reqs),
        removed_requirements=tuple(removed_reqs),
        kept_monitors=kept_monitors,
        removed_monitors=tuple(removed),
        requirement_to_monitor=mapping,
        selected_knobs=tuple(selected),
        rejected_knobs=tuple(rejected),
        knob_coefficients=table,
    )


def _check_threshold(value: float, kind: str) -> None:
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{kind} threshold must lie in (0, 1], got {value}")
