"""Command-line pipeline: simulate, ingest, derive, reduce, search, validate, report.

Each subcommand reads its inputs, runs one pipeline stage and writes
artifacts that embed a run manifest (tool version, resolved settings,
input/output paths, dataset seed and digest) so every file records how
it was produced. A JSON config file, passed via ``--config`` or the
``HPCKIT_CONFIG`` environment variable, can override any model setting;
missing sections fall back to the built-in defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone

from . import __version__
from .defaults import (
    DEFAULT_INTERVALS,
    DEFAULT_SEED,
    default_availability_model,
    default_cost_model,
    default_effects,
    default_fault_model,
    default_knob_space,
    default_requirement_spec,
    default_workload,
)
from .errors import ConfigError, HpckitError, IngestionError, NoFeasibleConfigurationError
from .metrics import AvailabilityModel, CostModel, RequirementSpec, derive_dataset
from .reducer import (
    DEFAULT_KNOB_THRESHOLD,
    DEFAULT_REQUIREMENT_THRESHOLD,
    ReductionReport,
    reduce,
)
from .search import REQUIREMENT_NAMES, is_feasible, oracle_best, score_requirements, validate
from .simulator import FaultModel, KnobEffects, LevelEffect, NoiseParams, WorkloadParams, generate_sweep
from .sweep import Configuration, KnobSpace, SweepDataset, export_csv, ingest_csv, load_knob_space

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_FEASIBLE = 2
EXIT_INGESTION = 3

_CONFIG_SECTIONS = ("space", "workload", "effects", "metrics", "analysis", "baseline")
_METRICS_KEYS = (
    "mttr_h", "required_servers", "availability_target", "max_servers",
    "server_price", "infra_price", "energy_price_per_j", "maintenance_rate",
    "performance_max_s", "power_max_w", "energy_max_j", "availability_min",
    "min_mc_iterations",
)
_ANALYSIS_KEYS = ("req_threshold", "knob_threshold", "weights")
_EFFECT_SCALARS = (
    "frequency_knob", "reference_frequency_ghz", "cpu_power_base_w",
    "cpu_power_exponent", "dram_background_w", "dram_activity_w",
    "temperature_ambient_c", "temperature_per_watt", "peak_margin_w",
    "ipc_per_core", "mpki_base", "base_fit",
)
_FAULT_KEYS = ("probability", "probability_scale", "repair_intervals")


# ---------------------------------------------------------------------------
# config handling


def _check_keys(data: dict, allowed, where: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def load_config(path: str | None) -> dict:
    """Read the JSON config; falls back to $HPCKIT_CONFIG, then to {}."""
    source = "--config"
    if path is None:
        path = os.environ.get("HPCKIT_CONFIG")
        source = "HPCKIT_CONFIG"
        if not path:
            return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file not found ({source}): {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path}: top level must be a JSON object")
    _check_keys(data, _CONFIG_SECTIONS, f"config file {path}")
    _validate_config(data)
    return data


def _validate_config(cfg: dict) -> None:
    # validate every section up front, even those the current subcommand
    # will not consume, so a broken config fails the same way everywhere
    space = build_space(cfg)
    build_workload(cfg)
    build_effects(cfg)
    build_metrics(cfg)
    build_analysis(cfg)
    build_baseline(cfg, space)


def build_space(cfg: dict) -> KnobSpace:
    section = cfg.get("space")
    if section is None:
        return default_knob_space()
    try:
        return KnobSpace.from_json_dict(section)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"config section 'space': {exc}") from exc


def build_workload(cfg: dict) -> WorkloadParams:
    section = cfg.get("workload")
    if section is None:
        return default_workload()
    return _workload_from_dict(section, "config section 'workload'")


def _workload_from_dict(section: dict, where: str) -> WorkloadParams:
    base = asdict(default_workload())
    _check_keys(section, base, where)
    base.update(section)
    try:
        return WorkloadParams(**base)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_effects(cfg: dict) -> tuple[KnobEffects, FaultModel]:
    section = cfg.get("effects")
    defaults = default_effects()
    fault = default_fault_model()
    if section is None:
        return defaults, fault
    where = "config section 'effects'"
    _check_keys(section, _EFFECT_SCALARS + ("noise", "levels", "fault"), where)

    kwargs = {name: section.get(name, getattr(defaults, name)) for name in _EFFECT_SCALARS}

    noise_dict = asdict(defaults.noise)
    noise_over = section.get("noise", {})
    _check_keys(noise_over, noise_dict, f"{where}.noise")
    noise_dict.update(noise_over)
    kwargs["noise"] = NoiseParams(**noise_dict)

    levels = {k: dict(v) for k, v in defaults.levels.items()}
    for knob, table in section.get("levels", {}).items():
        new_table = levels.setdefault(knob, {})
        for label, fields in table.items():
            _check_keys(fields, asdict(LevelEffect()), f"{where}.levels[{knob}][{label}]")
            try:
                new_table[label] = LevelEffect(**fields)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{where}.levels[{knob}][{label}]: {exc}") from exc

    kwargs["levels"] = levels
    try:
        effects = KnobEffects(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc

    fault_over = section.get("fault", {})
    _check_keys(fault_over, _FAULT_KEYS, f"{where}.fault")
    fault_dict = asdict(fault)
    fault_dict.update(fault_over)
    try:
        fault = FaultModel(**fault_dict)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.fault: {exc}") from exc
    return effects, fault


def build_metrics(cfg: dict) -> tuple[AvailabilityModel, CostModel, RequirementSpec]:
    section = cfg.get("metrics", {})
    _check_keys(section, _METRICS_KEYS, "config section 'metrics'")
    am = default_availability_model()
    cm = default_cost_model()
    spec = default_requirement_spec()
    try:
        am = AvailabilityModel(
            server_mttr=section.get("mttr_h", am.server_mttr),
            required_servers=section.get("required_servers", am.required_servers),
            availability_target=section.get("availability_target", am.availability_target),
            max_servers=section.get("max_servers", am.max_servers),
        )
        cm = CostModel(
            server_price=section.get("server_price", cm.server_price),
            infrastructure_price=section.get("infra_price", cm.infrastructure_price),
            energy_price=section.get("energy_price_per_j", cm.energy_price),
            maintenance_rate=section.get("maintenance_rate", cm.maintenance_rate),
        )
        spec = RequirementSpec(
            performance_max=section.get("performance_max_s", spec.performance_max),
            power_max=section.get("power_max_w", spec.power_max),
            energy_max=section.get("energy_max_j", spec.energy_max),
            availability_min=section.get("availability_min", spec.availability_min),
            min_mc_iterations=section.get("min_mc_iterations", spec.min_mc_iterations),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config section 'metrics': {exc}") from exc
    return am, cm, spec


def build_analysis(cfg: dict) -> tuple[float, float, dict[str, float] | None]:
    section = cfg.get("analysis", {})
    _check_keys(section, _ANALYSIS_KEYS, "config section 'analysis'")
    req_threshold = section.get("req_threshold", DEFAULT_REQUIREMENT_THRESHOLD)
    knob_threshold = section.get("knob_threshold", DEFAULT_KNOB_THRESHOLD)
    weights = section.get("weights")
    if weights is not None:
        _check_keys(weights, REQUIREMENT_NAMES, "config section 'analysis'.weights")
        weights = {name: float(v) for name, v in weights.items()}
    return float(req_threshold), float(knob_threshold), weights


def build_baseline(cfg: dict, space: KnobSpace) -> Configuration | None:
    section = cfg.get("baseline")
    if section is None:
        return None
    _check_keys(section, space.names, "config section 'baseline'")
    levels = []
    for name in space.names:
        knob = space.knob(name)
        label = section.get(name, knob.levels[knob.baseline].label)
        try:
            levels.append(knob.level_index(label))
        except KeyError:
            raise ConfigError(
                f"config section 'baseline': unknown level {label!r} for knob {name!r}"
            ) from None
    return Configuration(tuple(levels))


# ---------------------------------------------------------------------------
# run manifest


def _effects_json(effects: KnobEffects, fault: FaultModel) -> dict:
    return {
        **{name: getattr(effects, name) for name in _EFFECT_SCALARS},
        "noise": asdict(effects.noise),
        "levels": {
            knob: {label: asdict(eff) for label, eff in sorted(table.items())}
            for knob, table in sorted(effects.levels.items())
        },
        "fault": asdict(fault),
    }


def _metrics_json(am: AvailabilityModel, cm: CostModel, spec: RequirementSpec) -> dict:
    return {
        "mttr_h": am.server_mttr,
        "required_servers": am.required_servers,
        "availability_target": am.availability_target,
        "max_servers": am.max_servers,
        "server_price": cm.server_price,
        "infra_price": cm.infrastructure_price,
        "energy_price_per_j": cm.energy_price,
        "maintenance_rate": cm.maintenance_rate,
        "performance_max_s": spec.performance_max,
        "power_max_w": spec.power_max,
        "energy_max_j": spec.energy_max,
        "availability_min": spec.availability_min,
        "min_mc_iterations": spec.min_mc_iterations,
    }


def make_manifest(
    args,
    subcommand: str,
    config: dict,
    inputs: dict,
    outputs: dict,
    dataset_seed: int | None = None,
    dataset_digest: str | None = None,
) -> dict:
    manifest = {
        "subcommand": subcommand,
        "tool_version": __version__,
        "dataset_seed": dataset_seed,
        "dataset_digest": dataset_digest,
        "inputs": inputs,
        "outputs": outputs,
        "config": config,
    }
    if not args.deterministic:
        manifest["timestamp"] = datetime.now(timezone.utc).isoformat()
    return manifest


def _manifest_comment(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def _file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")


def _write_text(path: str, manifest: dict, body: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# manifest: {_manifest_comment(manifest)}\n\n")
        fh.write(body)
        if not body.endswith("\n"):
            fh.write("\n")


# ---------------------------------------------------------------------------
# shared loading


def _require_file(path: str, flag: str) -> str:
    if not os.path.exists(path):
        raise ConfigError(f"{flag}: file not found: {path}")
    return path


def _resolve_space(args, cfg: dict) -> KnobSpace:
    space_path = getattr(args, "space", None)
    if space_path:
        _require_file(space_path, "--space")
        try:
            return load_knob_space(space_path)
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--space {space_path}: {exc}") from exc
    return build_space(cfg)


def _load_dataset(args, cfg: dict) -> tuple[SweepDataset, KnobSpace, str, int | None]:
    path = _require_file(args.dataset, "--dataset")
    space = _resolve_space(args, cfg)
    try:
        ds = ingest_csv(path, space)
    except IngestionError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    digest = _file_digest(path)
    seed = None
    raw_seed = ds.metadata.get("seed", "")
    if raw_seed.lstrip("-").isdigit():
        seed = int(raw_seed)
    return ds, space, digest, seed


def _require_derived(ds: SweepDataset, path: str) -> None:
    if not ds.is_derived:
        raise ConfigError(
            f"{path}: dataset has no derived requirement columns; run 'hpckit derive' first"
        )


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, cfg: dict) -> int:
    space = _resolve_space(args, cfg)
    if args.params:
        _require_file(args.params, "--params")
        try:
            with open(args.params, "r", encoding="utf-8") as fh:
                params_data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--params {args.params}: invalid JSON: {exc}") from exc
        params = _workload_from_dict(params_data, f"--params {args.params}")
    else:
        params = build_workload(cfg)
    effects, fault = build_effects(cfg)

    try:
        ds = generate_sweep(space, params, effects, fault,
                            seed=args.seed, n_intervals=args.intervals)
    except ValueError as exc:
        raise ConfigError(f"--intervals/--seed: {exc}") from exc

    resolved = {
        "space": space.to_json_dict(),
        "workload": asdict(params),
        "effects": _effects_json(effects, fault),
    }
    manifest = make_manifest(
        args, "simulate", resolved,
        inputs={k: v for k, v in (("space", args.space), ("params", args.params)) if v},
        outputs={"out": args.out},
        dataset_seed=args.seed,
        dataset_digest=ds.metadata.get("parameters"),
    )
    ds.metadata["manifest"] = _manifest_comment(manifest)
    export_csv(ds, args.out)
    print(f"wrote {args.out}: {len(ds)} rows, seed {args.seed}, "
          f"interval success {ds.metadata['interval_success_fraction']}")
    return EXIT_OK


def cmd_ingest(args, cfg: dict) -> int:
    ds, space, digest, seed = _load_dataset(args, cfg)
    state = "derived" if ds.is_derived else "underived"
    print(f"{args.dataset}: {len(ds)} rows, {len(space.names)} knobs, {state}, "
          f"digest {digest}")
    if args.out:
        resolved = {"space": space.to_json_dict()}
        manifest = make_manifest(
            args, "ingest", resolved,
            inputs={"dataset": args.dataset},
            outputs={"out": args.out},
            dataset_seed=seed,
            dataset_digest=digest,
        )
        ds.metadata["manifest"] = _manifest_comment(manifest)
        export_csv(ds, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_derive(args, cfg: dict) -> int:
    ds, space, digest, seed = _load_dataset(args, cfg)
    am, cm, spec = build_metrics(cfg)
    derived = derive_dataset(ds, am, cm, spec)
    resolved = {
        "space": space.to_json_dict(),
        "metrics": _metrics_json(am, cm, spec),
    }
    manifest = make_manifest(
        args, "derive", resolved,
        inputs={"dataset": args.dataset},
        outputs={"out": args.out},
        dataset_seed=seed,
        dataset_digest=digest,
    )
    derived.metadata["manifest"] = _manifest_comment(manifest)
    export_csv(derived, args.out)
    print(f"wrote {args.out}: {len(derived)} rows with requirement columns")
    return EXIT_OK


def cmd_reduce(args, cfg: dict) -> int:
    ds, space, digest, seed = _load_dataset(args, cfg)
    _require_derived(ds, args.dataset)
    req_threshold, knob_threshold, _ = build_analysis(cfg)
    if args.req_threshold is not None:
        req_threshold = args.req_threshold
    if args.knob_threshold is not None:
        knob_threshold = args.knob_threshold
    try:
        report = reduce(ds, req_threshold, knob_threshold)
    except ValueError as exc:
        raise ConfigError(f"--req-threshold/--knob-threshold: {exc}") from exc

    resolved = {
        "space": space.to_json_dict(),
        "analysis": {"req_threshold": req_threshold, "knob_threshold": knob_threshold},
    }
    manifest = make_manifest(
        args, "reduce", resolved,
        inputs={"dataset": args.dataset},
        outputs={"out": args.out, "coefficients": args.coefficients},
        dataset_seed=seed,
        dataset_digest=digest,
    )
    _write_json(args.out, {"manifest": manifest, **report.to_json_dict()})
    with open(args.coefficients, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# manifest: {_manifest_comment(manifest)}\n")
        fh.write(report.coefficients_csv())
    print(f"wrote {args.out} and {args.coefficients}: "
          f"kept {len(report.kept_monitors)} monitors, "
          f"selected knobs {', '.join(report.selected_knob_names)}")
    return EXIT_OK


def _leaderboard_rows(ds: SweepDataset, spec: RequirementSpec,
                      weights: dict[str, float] | None, top: int) -> list[dict]:
    scores = score_requirements(ds, weights)
    order = sorted(range(len(ds.rows)), key=lambda i: (scores[i], i))
    entries = []
    for rank, i in enumerate((j for j in order if is_feasible(ds.rows[j], spec)), start=1):
        row = ds.rows[i]
        entries.append({
            "rank": rank,
            "configuration": dict(zip(ds.space.names, row.config.labels(ds.space))),
            "score": float(scores[i]),
            "requirements": {n: row.requirements.value(n) for n in REQUIREMENT_NAMES},
        })
        if rank >= top:
            break
    return entries


def _leaderboard_text(entries: list[dict], feasible: int, total: int) -> str:
    lines = [f"top {len(entries)} feasible configurations "
             f"({feasible} feasible of {total} swept), lower score is better", ""]
    for e in entries:
        config = " ".join(f"{k}={v}" for k, v in e["configuration"].items())
        req = e["requirements"]
        lines.append(
            f"{e['rank']:>3}. score {e['score']:+8.4f}  {config}"
        )
        lines.append(
            f"     t={req['performance_s']:.1f}s  P={req['power_w']:.2f}W  "
            f"E={req['energy_j']:.0f}J  A={req['availability']:.5f}  "
            f"C={req['cost']:.1f}"
        )
    return "\n".join(lines) + "\n"


def cmd_search(args, cfg: dict) -> int:
    ds, space, digest, seed = _load_dataset(args, cfg)
    _require_derived(ds, args.dataset)
    am, cm, spec = build_metrics(cfg)
    _, _, weights = build_analysis(cfg)
    try:
        best = oracle_best(ds, spec, weights)
    except NoFeasibleConfigurationError as exc:
        raise NoFeasibleConfigurationError(
            f"{args.dataset}: {exc}", exc.least_violating, exc.violation
        ) from exc
    feasible = sum(1 for row in ds.rows if is_feasible(row, spec))
    entries = _leaderboard_rows(ds, spec, weights, args.top)

    resolved = {
        "space": space.to_json_dict(),
        "metrics": _metrics_json(am, cm, spec),
        "analysis": {"weights": weights},
    }
    manifest = make_manifest(
        args, "search", resolved,
        inputs={"dataset": args.dataset},
        outputs={"out": args.out, "leaderboard": args.leaderboard},
        dataset_seed=seed,
        dataset_digest=digest,
    )
    payload = {
        "manifest": manifest,
        "total_rows": len(ds),
        "feasible_rows": feasible,
        "best": best.to_json_dict(ds),
        "leaderboard": entries,
    }
    _write_json(args.out, payload)
    _write_text(args.leaderboard, manifest, _leaderboard_text(entries, feasible, len(ds)))
    config_str = " ".join(f"{k}={v}" for k, v in
                          zip(space.names, best.config.labels(space)))
    print(f"wrote {args.out} and {args.leaderboard}: best {config_str} "
          f"(score {best.score:+.4f})")
    return EXIT_OK


def cmd_validate(args, cfg: dict) -> int:
    ds, space, digest, seed = _load_dataset(args, cfg)
    _require_derived(ds, args.dataset)
    _require_file(args.reduction, "--reduction")
    try:
        with open(args.reduction, "r", encoding="utf-8") as fh:
            reduction_data = json.load(fh)
        report = ReductionReport.from_json_dict(reduction_data)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"--reduction {args.reduction}: not a reduction artifact: {exc}") from exc

    am, cm, spec = build_metrics(cfg)
    _, _, weights = build_analysis(cfg)
    baseline = build_baseline(cfg, space)
    try:
        result = validate(ds, report, spec, baseline, weights)
    except NoFeasibleConfigurationError as exc:
        raise NoFeasibleConfigurationError(
            f"{args.dataset}: {exc}", exc.least_violating, exc.violation
        ) from exc

    resolved = {
        "space": space.to_json_dict(),
        "metrics": _metrics_json(am, cm, spec),
        "analysis": {"weights": weights},
        "baseline": dict(zip(space.names,
                             (baseline or space.baseline_configuration()).labels(space))),
    }
    manifest = make_manifest(
        args, "validate", resolved,
        inputs={"dataset": args.dataset, "reduction": args.reduction},
        outputs={"out": args.out, "table": args.table},
        dataset_seed=seed,
        dataset_digest=digest,
    )
    _write_json(args.out, {"manifest": manifest, **result.to_json_dict(ds)})
    _write_text(args.table, manifest, result.to_text(ds))
    print(f"wrote {args.out} and {args.table}: picks "
          f"{'agree' if result.picks_agree else 'differ'}, "
          f"worst regression {result.max_negative_pct:.4%}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _read_artifact(path: str, flag: str) -> dict:
    _require_file(path, flag)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{flag} {path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{flag} {path}: expected a JSON object")
    return data


def _sweep_summary(path: str) -> list[str]:
    _require_file(path, "--sweep")
    metadata = {}
    rows = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                key, _, val = body.partition(":")
                metadata[key.strip()] = val.strip()
            elif line.strip():
                rows += 1
    rows = max(0, rows - 1)  # header line
    lines = [f"  file: {path}", f"  rows: {rows}"]
    for key in ("seed", "parameters", "mc_iterations", "n_intervals",
                "interval_success_fraction"):
        if key in metadata:
            lines.append(f"  {key.replace('_', ' ')}: {metadata[key]}")
    return lines


def _report_reduction(data: dict) -> list[str]:
    lines = []
    thresholds = data.get("thresholds", {})
    lines.append(f"  thresholds: requirement {thresholds.get('requirement')}, "
                 f"knob {thresholds.get('knob')}")
    lines.append("  kept requirements: " + ", ".join(data.get("kept_requirements", [])))
    lines.append("  kept monitors:     " + ", ".join(data.get("kept_monitors", [])))
    for rec in data.get("removed_monitors", []):
        if rec.get("reason") == "correlated":
            lines.append(f"    removed {rec['removed']} "
                         f"(r = {rec['coefficient']:+.4f} with {rec['partner']})")
        else:
            lines.append(f"    removed {rec['removed']} ({rec['reason']})")
    lines.append("  requirement -> monitor:")
    for req, m in data.get("requirement_to_monitor", {}).items():
        lines.append(f"    {req:<14} -> {m['monitor']} (r = {m['coefficient']:+.4f})")
    selected = ", ".join(k["knob"] for k in data.get("selected_knobs", []))
    rejected = ", ".join(k["knob"] for k in data.get("rejected_knobs", []))
    lines.append(f"  selected knobs: {selected}")
    lines.append(f"  rejected knobs: {rejected}")
    return lines


def _report_search(data: dict) -> list[str]:
    lines = [f"  feasible rows: {data.get('feasible_rows')} of {data.get('total_rows')}"]
    best = data.get("best", {})
    config = " ".join(f"{k}={v}" for k, v in best.get("configuration", {}).items())
    lines.append(f"  best configuration: {config}")
    score = best.get("score")
    lines.append(f"  best score: {score:+.4f}" if isinstance(score, float)
                 else f"  best score: {score}")
    lines.append("  leaderboard:")
    for e in data.get("leaderboard", []):
        config = " ".join(f"{k}={v}" for k, v in e["configuration"].items())
        lines.append(f"    {e['rank']:>3}. {e['score']:+8.4f}  {config}")
    return lines


def _report_validation(data: dict) -> list[str]:
    lines = []
    oracle = data.get("oracle", {}).get("configuration", {})
    reduced = data.get("reduced", {}).get("configuration", {})
    lines.append("  oracle pick:  " + " ".join(f"{k}={v}" for k, v in oracle.items()))
    lines.append("  reduced pick: " + " ".join(f"{k}={v}" for k, v in reduced.items()))
    lines.append(f"  picks agree: {'yes' if data.get('picks_agree') else 'no'}")
    lines.append("  relative difference per requirement (positive favors reduced):")
    for name, pct in data.get("percent_differences", {}).items():
        lines.append(f"    {name:<15} {pct:+.4%}")
    lines.append(f"  worst regression: {data.get('max_negative_pct', 0.0):.4%}")
    lines.append("  improvement over baseline (ratio, higher is better):")
    oracle_imp = data.get("oracle_improvement_vs_baseline", {})
    reduced_imp = data.get("reduced_improvement_vs_baseline", {})
    for name in oracle_imp:
        fmt = lambda v: "n/a" if v is None else f"{v:.3f}x"
        lines.append(f"    {name:<15} oracle {fmt(oracle_imp[name]):>9s}   "
                     f"reduced {fmt(reduced_imp.get(name)):>9s}")
    return lines


def cmd_report(args, cfg: dict) -> int:
    if not any((args.sweep, args.reduction, args.search, args.validation)):
        raise ConfigError(
            "report needs at least one artifact "
            "(--sweep, --reduction, --search or --validation)"
        )
    sections = []
    if args.sweep:
        sections.append(("dataset", _sweep_summary(args.sweep)))
    if args.reduction:
        sections.append(
            ("reduction", _report_reduction(_read_artifact(args.reduction, "--reduction")))
        )
    if args.search:
        sections.append(
            ("search", _report_search(_read_artifact(args.search, "--search")))
        )
    if args.validation:
        sections.append(
            ("validation", _report_validation(_read_artifact(args.validation, "--validation")))
        )

    body_lines = ["hpckit pipeline report", "======================"]
    for title, lines in sections:
        body_lines.append("")
        body_lines.append(title)
        body_lines.append("-" * len(title))
        body_lines.extend(lines)
    body = "\n".join(body_lines) + "\n"

    inputs = {k: v for k, v in (("sweep", args.sweep), ("reduction", args.reduction),
                                ("search", args.search), ("validation", args.validation)) if v}
    manifest = make_manifest(args, "report", {}, inputs=inputs, outputs={"out": args.out})
    _write_text(args.out, manifest, body)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _add_dataset_arg(sub) -> None:
    sub.add_argument("--dataset", required=True, help="sweep CSV to read")
    sub.add_argument("--space", help="knob-space JSON file (default: config or built-in space)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hpckit",
        description="Reduce an HPC configuration space by correlating monitors, "
                    "requirements and tuning knobs, then validate the reduced search.",
    )
    parser.add_argument("--config", help="JSON config file (fallback: $HPCKIT_CONFIG)")
    parser.add_argument("--deterministic", action="store_true",
                        help="omit timestamps so identical runs produce identical bytes")
    parser.add_argument("--version", action="version", version=f"hpckit {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sim = subs.add_parser("simulate", help="generate a synthetic sweep dataset")
    sim.add_argument("--space", help="knob-space JSON file")
    sim.add_argument("--params", help="workload parameters JSON file")
    sim.add_argument("--seed", type=int, default=DEFAULT_SEED, help="simulator seed")
    sim.add_argument("--intervals", type=int, default=DEFAULT_INTERVALS,
                     help="measurement intervals per configuration (>= 5)")
    sim.add_argument("--out", default="sweep.csv", help="output CSV path")
    sim.set_defaults(handler=cmd_simulate)

    ing = subs.add_parser("ingest", help="validate a sweep CSV and summarize it")
    _add_dataset_arg(ing)
    ing.add_argument("--out", help="optional normalized re-export path")
    ing.set_defaults(handler=cmd_ingest)

    der = subs.add_parser("derive", help="fill requirement columns from monitors")
    _add_dataset_arg(der)
    der.add_argument("--out", default="derived.csv", help="output CSV path")
    der.set_defaults(handler=cmd_derive)

    red = subs.add_parser("reduce", help="run the correlation-based reduction")
    _add_dataset_arg(red)
    red.add_argument("--req-threshold", type=float, default=None,
                     help="requirement/monitor pruning threshold (default 0.90)")
    red.add_argument("--knob-threshold", type=float, default=None,
                     help="knob selection threshold (default 0.40)")
    red.add_argument("--out", default="reduction.json", help="reduction JSON path")
    red.add_argument("--coefficients", default="coefficients.csv",
                     help="knob-by-monitor coefficient CSV path")
    red.set_defaults(handler=cmd_reduce)

    sea = subs.add_parser("search", help="rank configurations by the requirement score")
    _add_dataset_arg(sea)
    sea.add_argument("--top", type=int, default=10, help="leaderboard length")
    sea.add_argument("--out", default="search.json", help="search JSON path")
    sea.add_argument("--leaderboard", default="leaderboard.txt",
                     help="plain-text leaderboard path")
    sea.set_defaults(handler=cmd_search)

    val = subs.add_parser("validate", help="compare the reduced-space pick to the oracle")
    _add_dataset_arg(val)
    val.add_argument("--reduction", required=True, help="reduction JSON artifact")
    val.add_argument("--out", default="validation.json", help="validation JSON path")
    val.add_argument("--table", default="improvement.txt",
                     help="plain-text improvement table path")
    val.set_defaults(handler=cmd_validate)

    rep = subs.add_parser("report", help="render a summary from earlier artifacts")
    rep.add_argument("--sweep", help="sweep CSV from simulate/derive")
    rep.add_argument("--reduction", help="reduction JSON from reduce")
    rep.add_argument("--search", help="search JSON from search")
    rep.add_argument("--validation", help="validation JSON from validate")
    rep.add_argument("--out", default="report.txt", help="report text path")
    rep.set_defaults(handler=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        return args.handler(args, cfg)
    except IngestionError as exc:
        print(f"hpckit: ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except NoFeasibleConfigurationError as exc:
        print(f"hpckit: {exc}", file=sys.stderr)
        return EXIT_NO_FEASIBLE
    except (ConfigError, OSError) as exc:
        print(f"hpckit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HpckitError as exc:
        print(f"hpckit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
