"""Configuration ranking in the full and the reduced space.

The exhaustive route scores every feasible configuration on all five
requirement columns at once and serves as the reference answer. The
reduced route mimics what an operator would do after the correlation
reduction: sweep only the selected knobs (everything else pinned at
the baseline), watch only the kept monitors, and rank by those. The
validation step compares the two picks requirement by requirement.

Scores are averages of z-scored columns, sign-adjusted so that lower
is always better, so a configuration's score is its mean distance (in
standard deviations) from the sweep average across the columns in
play. Columns with zero spread carry no ranking information and are
dropped with a warning; the remaining columns keep equal weights.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoFeasibleConfigurationError
from .metrics import RequirementSpec
from .reducer import ReductionReport
from .sweep import (
    MONITOR_FIELDS,
    REQUIREMENT_NAMES,
    Configuration,
    SweepDataset,
    SweepRow,
    enumeration_rank,
    zscore,
)

log = logging.getLogger(__name__)

# +1 when smaller readings are preferable, -1 when larger ones are.
MONITOR_DIRECTIONS: dict[str, int] = {
    "execution_time_s": +1,
    "ipc": -1,
    "dram_power_w": +1,
    "cpu_power_w": +1,
    "peak_power_w": +1,
    "cpu_temp_c": +1,
    "mpki": +1,
    "server_mtbf_h": -1,
    "system_mtbf_h": -1,
    "capex": +1,
    "opex": +1,
}

REQUIREMENT_DIRECTIONS: dict[str, int] = {
    "performance_s": +1,
    "power_w": +1,
    "energy_j": +1,
    "availability": -1,
    "cost": +1,
}

assert set(MONITOR_DIRECTIONS) == {name for name, _ in MONITOR_FIELDS}
assert set(REQUIREMENT_DIRECTIONS) == set(REQUIREMENT_NAMES)


def is_feasible(row: SweepRow, spec: RequirementSpec) -> bool:
    """True when the row meets every threshold (inclusive)."""
    req = row.requirements
    if req is None:
        raise ValueError("row has no derived requirement values")
    return (
        req.performance <= spec.performance_max
        and req.power <= spec.power_max
        and req.energy <= spec.energy_max
        and req.availability >= spec.availability_min
    )


def threshold_violation(row: SweepRow, spec: RequirementSpec) -> float:
    """Worst relative threshold overshoot; zero when feasible."""
    req = row.requirements
    if req is None:
        raise ValueError("row has no derived requirement values")
    gaps = [
        (req.performance - spec.performance_max) / spec.performance_max,
        (req.power - spec.power_max) / spec.power_max,
        (req.energy - spec.energy_max) / spec.energy_max,
        (spec.availability_min - req.availability) / spec.availability_min,
    ]
    return max(0.0, max(gaps))


def _combined_zscores(
    columns: list[tuple[str, np.ndarray, int]],
    weights: dict[str, float] | None = None,
) -> np.ndarray:
    """Weighted sum of sign-adjusted z-scores, skipping flat columns.

    Weights default to equal shares. Flat (zero-spread) columns carry
    no ranking information; they are dropped with a warning and the
    remaining weights are renormalized to keep the total weight at 1.
    """
    live: list[tuple[np.ndarray, float]] = []
    for name, values, direction in columns:
        w = 1.0 if weights is None else float(weights.get(name, 1.0))
        if w < 0:
            raise ConfigError(f"weight for {name} must be non-negative")
        if float(np.std(values)) == 0.0:
            log.warning("column %s has zero spread; excluded from scoring", name)
            continue
        live.append((direction * zscore(values), w))
    total = sum(w for _, w in live)
    if not live or total == 0.0:
        raise ConfigError("every scoring column is flat or zero-weighted; nothing to rank on")
    return np.sum([z * (w / total) for z, w in live], axis=0)


def score_requirements(
    dataset: SweepDataset, weights: dict[str, float] | None = None
) -> np.ndarray:
    """Per-row combined requirement score, aligned with dataset.rows.

    With default weights each live requirement contributes 1/5 (0.2)
    of the score; lower scores are better.
    """
    if not dataset.is_derived:
        raise ValueError("dataset has no derived requirement values")
    if len(dataset.rows) < 2:
        raise ValueError("scoring needs at least two rows")
    columns = [
        (name, dataset.requirement_column(name), REQUIREMENT_DIRECTIONS[name])
        for name in REQUIREMENT_NAMES
    ]
    return _combined_zscores(columns, weights)


def _resolve_spec(dataset: SweepDataset, spec: RequirementSpec | None) -> RequirementSpec:
    if spec is not None:
        return spec
    if isinstance(dataset.requirement_spec, RequirementSpec):
        return dataset.requirement_spec
    return RequirementSpec()


@dataclass(frozen=True)
class RankedConfig:
    config: Configuration
    score: float
    feasible: bool
    row: SweepRow

    def to_json_dict(self, dataset: SweepDataset) -> dict:
        req = self.row.requirements
        return {
            "configuration": dict(zip(dataset.space.names, self.row.config.labels(dataset.space))),
            "score": self.score,
            "feasible": self.feasible,
            "requirements": {
                name: req.value(name) for name in REQUIREMENT_NAMES
            } if req is not None else None,
        }


def _best_row(
    dataset: SweepDataset,
    indices: list[int],
    scores: np.ndarray,
    spec: RequirementSpec,
) -> RankedConfig:
    feasible = [i for i in indices if is_feasible(dataset.rows[i], spec)]
    if not feasible:
        worst = min(indices, key=lambda i: threshold_violation(dataset.rows[i], spec))
        row = dataset.rows[worst]
        raise NoFeasibleConfigurationError(
            "no configuration meets every requirement threshold",
            least_violating=row.config,
            violation=threshold_violation(row, spec),
        )
    best = min(
        feasible,
        key=lambda i: (scores[i], enumeration_rank(dataset.space, dataset.rows[i].config)),
    )
    return RankedConfig(
        dataset.rows[best].config, float(scores[best]), True, dataset.rows[best]
    )


def oracle_best(
    dataset: SweepDataset,
    spec: RequirementSpec | None = None,
    weights: dict[str, float] | None = None,
) -> RankedConfig:
    """Best feasible configuration under the full requirement score."""
    spec = _resolve_spec(dataset, spec)
    if len(dataset.rows) == 1:
        # nothing to rank against; feasibility alone decides
        return _best_row(dataset, [0], np.zeros(1), spec)
    scores = score_requirements(dataset, weights)
    return _best_row(dataset, list(range(len(dataset.rows))), scores, spec)


def reduced_best(
    dataset: SweepDataset,
    report: ReductionReport,
    spec: RequirementSpec | None = None,
    baseline: Configuration | None = None,
) -> RankedConfig:
    """Best feasible configuration reachable through the reduced lens.

    Only rows whose unselected knobs sit at their baseline levels are
    considered, and only the kept monitors contribute to the score.
    """
    spec = _resolve_spec(dataset, spec)
    selected = set(report.selected_knob_names)
    if not selected:
        raise ConfigError("reduction selected no knobs; nothing to sweep")
    if not report.kept_monitors:
        raise ConfigError("reduction kept no monitors; nothing to rank on")
    unknown = selected - set(dataset.space.names)
    if unknown:
        raise ConfigError(f"selected knobs not in this space: {sorted(unknown)}")
    baseline = baseline or dataset.space.baseline_configuration()
    dataset.space.validate_configuration(baseline)

    pinned = [
        i for i, name in enumerate(dataset.space.names) if name not in selected
    ]
    indices = [
        i for i, row in enumerate(dataset.rows)
        if all(row.config.levels[k] == baseline.levels[k] for k in pinned)
    ]
    if len(indices) < 2:
        raise ConfigError("reduced slice has fewer than two rows; cannot rank")

    columns = []
    for name in report.kept_monitors:
        values = np.array(
            [dataset.rows[i].monitors.value(name) for i in indices], dtype=float
        )
        columns.append((name, values, MONITOR_DIRECTIONS[name]))
    slice_scores = _combined_zscores(columns)
    scores = np.full(len(dataset.rows), math.inf)
    for pos, i in enumerate(indices):
        scores[i] = slice_scores[pos]
    return _best_row(dataset, indices, scores, spec)


def _percent_difference(name: str, oracle_value: float, reduced_value: float) -> float:
    """Signed relative regret of the reduced pick; positive favors it.

    Availability is compared through unavailability so that a drop
    from 0.9999 to 0.99 registers as the hundredfold regression it is.
    A zero oracle baseline with a differing reduced value has no
    finite relative measure; it is capped at one full unit (sign
    preserved), which no simulated dataset comes close to exercising.
    """
    direction = REQUIREMENT_DIRECTIONS[name]
    if direction < 0:
        base = 1.0 - oracle_value
        other = 1.0 - reduced_value
    else:
        base = oracle_value
        other = reduced_value
    if base == 0.0:
        return 0.0 if other == 0.0 else math.copysign(1.0, base - other)
    return (base - other) / base


def _improvement_ratio(name: str, baseline_value: float, picked_value: float) -> float | None:
    """How many times better the pick is than the baseline; None if undefined."""
    if REQUIREMENT_DIRECTIONS[name] < 0:
        base = 1.0 - baseline_value
        pick = 1.0 - picked_value
    else:
        base = baseline_value
        pick = picked_value
    if pick == 0.0:
        return 1.0 if base == 0.0 else None
    return base / pick


@dataclass(frozen=True)
class ValidationResult:
    oracle: RankedConfig
    reduced: RankedConfig
    baseline_row: SweepRow
    percent_differences: dict[str, float]
    max_negative_pct: float
    oracle_improvement: dict[str, float | None]
    reduced_improvement: dict[str, float | None]

    @property
    def picks_agree(self) -> bool:
        return self.oracle.config == self.reduced.config

    def to_json_dict(self, dataset: SweepDataset) -> dict:
        return {
            "oracle": self.oracle.to_json_dict(dataset),
            "reduced": self.reduced.to_json_dict(dataset),
            "picks_agree": self.picks_agree,
            "percent_differences": self.percent_differences,
            "max_negative_pct": self.max_negative_pct,
            "oracle_improvement_vs_baseline": self.oracle_improvement,
            "reduced_improvement_vs_baseline": self.reduced_improvement,
        }

    def to_text(self, dataset: SweepDataset) -> str:
        lines = ["validation of the reduced-space pick", ""]
        names = dataset.space.names
        lines.append(
            "oracle pick:  "
            + ", ".join(f"{n}={v}" for n, v in zip(names, self.oracle.config.labels(dataset.space)))
        )
        lines.append(
            "reduced pick: "
            + ", ".join(f"{n}={v}" for n, v in zip(names, self.reduced.config.labels(dataset.space)))
        )
        lines.append(f"picks agree: {'yes' if self.picks_agree else 'no'}")
        lines.append("")
        lines.append("relative difference per requirement (positive favors reduced):")
        for name, pct in self.percent_differences.items():
            lines.append(f"  {name:15s} {pct:+.4%}")
        lines.append(f"worst regression: {self.max_negative_pct:.4%}")
        lines.append("")
        lines.append("improvement over baseline (ratio, higher is better):")
        for name in REQUIREMENT_NAMES:
            o = self.oracle_improvement[name]
            r = self.reduced_improvement[name]
            fmt = lambda v: "n/a" if v is None else f"{v:.3f}x"
            lines.append(f"  {name:15s} oracle {fmt(o):>9s}   reduced {fmt(r):>9s}")
        return "\n".join(lines)


def validate(
    dataset: SweepDataset,
    report: ReductionReport,
    spec: RequirementSpec | None = None,
    baseline: Configuration | None = None,
    weights: dict[str, float] | None = None,
) -> ValidationResult:
    """Quantify what the reduced-space search gives up, if anything."""
    spec = _resolve_spec(dataset, spec)
    baseline = baseline or dataset.space.baseline_configuration()
    try:
        baseline_row = dataset.row_for(baseline)
    except KeyError:
        raise ConfigError("baseline configuration missing from the dataset") from None
    if baseline_row.requirements is None:
        raise ConfigError("baseline row has no derived requirement values")

    oracle = oracle_best(dataset, spec, weights)
    reduced = reduced_best(dataset, report, spec, baseline)

    pct: dict[str, float] = {}
    for name in REQUIREMENT_NAMES:
        pct[name] = _percent_difference(
            name,
            oracle.row.requirements.value(name),
            reduced.row.requirements.value(name),
        )
    max_negative = max(0.0, max(-p for p in pct.values()))

    oracle_imp: dict[str, float | None] = {}
    reduced_imp: dict[str, float | None] = {}
    for name in REQUIREMENT_NAMES:
        base = baseline_row.requirements.value(name)
        oracle_imp[name] = _improvement_ratio(name, base, oracle.row.requirements.value(name))
        reduced_imp[name] = _improvement_ratio(name, base, reduced.row.requirements.value(name))

    return ValidationResult(
        oracle=oracle,
        reduced=reduced,
        baseline_row=baseline_row,
        percent_differences=pct,
        max_negative_pct=max_negative,
        oracle_improvement=oracle_imp,
        reduced_improvement=reduced_imp,
    )
