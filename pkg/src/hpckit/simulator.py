"""Synthetic cluster sweep generator.

Models a small server pool running a fixed Monte Carlo workload in
repeated deadline-bounded intervals. Knob settings move the response
surfaces (iteration throughput, power draw, temperature, miss rate,
failure rate) through per-level multipliers; measurement noise and
fault injection come from a seeded generator so a given seed always
reproduces the same dataset bit for bit.

Per interval, each up server can fail. A failure mid-interval
reassigns the remaining work to the surviving servers, stretching the
finish time, and keeps the failed server down for a configurable
number of repair intervals. Interval outcomes are classified into the
no-fault case, a fault absorbed within the deadline, a deadline miss
with the full pool up, and a deadline miss while a server is offline.
Only the last two count against interval availability. The reported
execution time is the trimmed mean (min and max dropped) of the
fault-free interval times.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .sweep import (
    Configuration,
    KnobSpace,
    MonitorVector,
    SweepDataset,
    SweepRow,
    enumerate_configs,
    enumeration_rank,
)


MC_ITERATIONS_FLOOR = 10_000  # accuracy floor below which results are untrusted


@dataclass(frozen=True)
class WorkloadParams:
    """Fixed properties of the simulated Monte Carlo batch."""

    mc_iterations: int = 20_000
    deadline_s: float = 600.0
    servers: int = 2                 # server pool running the batch
    cores_per_server: int = 16       # two CPUs with eight cores each
    base_seconds: float = 1.85       # seconds per iteration per core at 1 GHz
    result_processing_s: float = 20.0

    def __post_init__(self):
        if self.mc_iterations < MC_ITERATIONS_FLOOR:
            raise ValueError(
                f"mc_iterations must be at least {MC_ITERATIONS_FLOOR} "
                "(the workload's accuracy floor)"
            )
        for name in ("deadline_s", "base_seconds", "result_processing_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.servers < 1 or self.cores_per_server < 1:
            raise ValueError("servers and cores_per_server must be positive")


@dataclass(frozen=True)
class LevelEffect:
    """How one knob level shifts the response surfaces.

    All factors are multiplicative with neutral value 1.0 except the
    two additive watt terms. ``cores`` scales the usable core count
    (0.5 models core sparing that idles half the cores).
    """

    throughput: float = 1.0
    frequency: float = 1.0
    cores: float = 1.0
    cpu_power: float = 1.0
    dram_activity: float = 1.0
    dram_background_w: float = 0.0
    temperature: float = 1.0
    mpki: float = 1.0
    fit: float = 1.0
    peak_surcharge_w: float = 0.0


NEUTRAL_EFFECT = LevelEffect()


@dataclass(frozen=True)
class NoiseParams:
    """Relative (or absolute, where noted) measurement noise levels."""

    time: float = 0.008
    cpu_power: float = 0.005
    dram_power: float = 0.008
    peak_margin: float = 0.10
    temperature_c: float = 2.0   # absolute, degrees
    ipc: float = 0.01
    mpki: float = 0.30
    fit: float = 0.10

    def __post_init__(self):
        for f in ("time", "cpu_power", "dram_power", "peak_margin",
                  "temperature_c", "ipc", "mpki", "fit"):
            if getattr(self, f) < 0:
                raise ValueError(f"noise level {f} must be non-negative")


@dataclass(frozen=True)
class KnobEffects:
    """Response-surface model: scalars plus per-knob level factors.

    The default magnitudes are synthetic calibration constants shaped
    to resemble a compute-bound Monte Carlo batch on small two-socket
    servers; they are not measurements.
    """

    frequency_knob: str = "DVFS"
    reference_frequency_ghz: float = 2.6
    cpu_power_base_w: float = 63.5
    cpu_power_exponent: float = 1.5
    dram_background_w: float = 4.5
    dram_activity_w: float = 6.5
    temperature_ambient_c: float = 28.0
    temperature_per_watt: float = 0.35
    peak_margin_w: float = 1.5
    ipc_per_core: float = 1.08
    mpki_base: float = 0.013
    base_fit: float = 300_000.0      # server failures per 1e9 hours
    noise: NoiseParams = field(default_factory=NoiseParams)
    levels: dict = field(default_factory=dict)  # knob name -> level label -> LevelEffect

    def __post_init__(self):
        for name in ("reference_frequency_ghz", "cpu_power_base_w", "ipc_per_core",
                     "mpki_base", "base_fit", "temperature_per_watt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for knob_name, table in self.levels.items():
            for label, eff in table.items():
                if not isinstance(eff, LevelEffect):
                    raise ValueError(
                        f"effect for {knob_name}/{label} must be a LevelEffect"
                    )
                if eff.cores <= 0 or eff.throughput <= 0 or eff.frequency <= 0:
                    raise ValueError(
                        f"effect for {knob_name}/{label} must keep rates positive"
                    )
                if eff.dram_background_w < 0 or eff.peak_surcharge_w < 0:
                    raise ValueError(
                        f"effect for {knob_name}/{label}: additive watt terms "
                        "must be non-negative"
                    )

    def level_effect(self, knob_name: str, label: str) -> LevelEffect:
        return self.levels.get(knob_name, {}).get(label, NEUTRAL_EFFECT)


@dataclass(frozen=True)
class CombinedEffect:
    """Product of all level effects for one configuration."""

    frequency_ghz: float
    usable_cores: float
    throughput: float
    cpu_power: float
    dram_activity: float
    dram_background_w: float
    temperature: float
    mpki: float
    fit: float
    peak_surcharge_w: float


def combine_effects(space: KnobSpace, config: Configuration, effects: KnobEffects) -> CombinedEffect:
    space.validate_configuration(config)
    frequency = effects.reference_frequency_ghz
    freq_mult = 1.0
    cores_mult = 1.0
    throughput = 1.0
    cpu_power = 1.0
    dram_act = 1.0
    dram_bg = 0.0
    temp = 1.0
    mpki = 1.0
    fit = 1.0
    surcharge = 0.0
    for knob, idx in zip(space.knobs, config.levels):
        level = knob.levels[idx]
        if knob.name == effects.frequency_knob and level.value is not None:
            frequency = float(level.value)
        eff = effects.level_effect(knob.name, level.label)
        freq_mult *= eff.frequency
        cores_mult *= eff.cores
        throughput *= eff.throughput
        cpu_power *= eff.cpu_power
        dram_act *= eff.dram_activity
        dram_bg += eff.dram_background_w
        temp *= eff.temperature
        mpki *= eff.mpki
        fit *= eff.fit
        surcharge += eff.peak_surcharge_w
    return CombinedEffect(
        frequency_ghz=frequency * freq_mult,
        usable_cores=space_cores(space, config, effects),
        throughput=throughput,
        cpu_power=cpu_power,
        dram_activity=dram_act,
        dram_background_w=dram_bg,
        temperature=temp,
        mpki=mpki,
        fit=fit,
        peak_surcharge_w=surcharge,
    )


def space_cores(space: KnobSpace, config: Configuration, effects: KnobEffects) -> float:
    mult = 1.0
    for knob, idx in zip(space.knobs, config.levels):
        mult *= effects.level_effect(knob.name, knob.levels[idx].label).cores
    return mult


def interval_time(
    space: KnobSpace,
    config: Configuration,
    params: WorkloadParams,
    effects: KnobEffects,
    servers_up: int,
) -> float:
    """Noise-free seconds for one interval with ``servers_up`` servers."""
    if servers_up < 1:
        raise ValueError("servers_up must be at least 1")
    eff = combine_effects(space, config, effects)
    cores = params.cores_per_server * eff.usable_cores
    rate = servers_up * cores * eff.frequency_ghz * eff.throughput
    return params.mc_iterations * params.base_seconds / rate + params.result_processing_s


class FaultCase(enum.Enum):
    NO_FAULT = "no_fault"
    CASE1 = "fault_within_deadline"
    CASE2 = "deadline_miss_full_servers"
    CASE3 = "deadline_miss_server_offline"


def classify_fault_outcome(
    delay_applied: float,
    finish_time: float,
    deadline: float,
    servers_remaining: int,
    servers_required: int,
) -> FaultCase:
    """Classify one interval; ``delay_applied`` > 0 marks a fault.

    A fault-free interval is never an availability event, even when it
    overruns the deadline: chronic slowness belongs to the performance
    requirement, not the availability ledger. A faulty interval that
    still meets the deadline is absorbed; past the deadline, the case
    depends on whether the full pool is still standing.
    """
    if deadline <= 0:
        raise ValueError("deadline must be positive")
    if delay_applied <= 0:
        return FaultCase.NO_FAULT
    if finish_time <= deadline:
        return FaultCase.CASE1
    if servers_remaining >= servers_required:
        return FaultCase.CASE2
    return FaultCase.CASE3


@dataclass(frozen=True)
class FaultModel:
    """Per-interval fault injection.

    With ``probability`` unset, the per-server failure probability is
    derived from the configuration's FIT rate over a nominal interval.
    A failed server stays down for ``repair_intervals`` subsequent
    intervals; zero means in-place recovery within the same interval.
    """

    probability: float | None = None
    probability_scale: float = 1.0
    repair_intervals: int = 2

    def __post_init__(self):
        if self.probability is not None and not 0.0 <= self.probability < 1.0:
            raise ValueError("probability must lie in [0, 1)")
        if self.probability_scale < 0:
            raise ValueError("probability_scale must be non-negative")
        if self.repair_intervals < 0:
            raise ValueError("repair_intervals must be non-negative")

    def per_interval_probability(self, fit: float, interval_hours: float) -> float:
        if self.probability is not None:
            return self.probability
        return min(0.5, fit * 1e-9 * interval_hours * self.probability_scale)


@dataclass(frozen=True)
class IntervalRecord:
    duration: float
    outcome: FaultCase
    servers_up: int


@dataclass(frozen=True)
class SimulationResult:
    monitors: MonitorVector
    intervals: tuple[IntervalRecord, ...]

    @property
    def success_fraction(self) -> float:
        bad = sum(
            1 for r in self.intervals
            if r.outcome in (FaultCase.CASE2, FaultCase.CASE3)
        )
        return (len(self.intervals) - bad) / len(self.intervals)


def trimmed_mean(values) -> float:
    """Mean after dropping the single smallest and largest value."""
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise ValueError("trimmed_mean needs at least one value")
    if len(ordered) >= 3:
        ordered = ordered[1:-1]
    if ordered[0] == ordered[-1]:
        # the mean of identical values is that value; sum()/len() would
        # round it through 3*t/3 and lose bit-exactness
        return ordered[0]
    return sum(ordered) / len(ordered)


DEFAULT_INTERVALS = 7


def simulate_config_detailed(
    space: KnobSpace,
    config: Configuration,
    params: WorkloadParams,
    effects: KnobEffects,
    fault_model: FaultModel,
    n_intervals: int = DEFAULT_INTERVALS,
    seed: int = 0,
) -> SimulationResult:
    """Measure one configuration, returning monitors and interval log."""
    if n_intervals < 5:
        raise ValueError("n_intervals must be at least 5 for a trimmed mean")
    space.validate_configuration(config)
    rank = enumeration_rank(space, config)
    rng = np.random.default_rng([int(seed), rank])
    eff = combine_effects(space, config, effects)
    noise = effects.noise

    n = n_intervals

    def rel_noise(sigma: float, count: int = 1) -> np.ndarray:
        return np.clip(rng.normal(1.0, sigma, count), 0.05, None)

    cpu_noise = rel_noise(noise.cpu_power, n)
    dram_noise = rel_noise(noise.dram_power, n)
    peak_noise = rel_noise(noise.peak_margin, n)
    temp_noise = rng.normal(0.0, noise.temperature_c, n)
    ipc_noise = rel_noise(noise.ipc, n)
    mpki_noise = rel_noise(noise.mpki, n)
    fit_noise = float(rel_noise(noise.fit)[0])
    time_noise = rel_noise(noise.time, n)

    fit = effects.base_fit * eff.fit * fit_noise
    nominal = interval_time(space, config, params, effects, params.servers)
    p_fail = fault_model.per_interval_probability(fit, nominal / 3600.0)

    down = [0] * params.servers
    records: list[IntervalRecord] = []
    fault_free_times: list[float] = []
    for i in range(n):
        servers_up = sum(1 for d in down if d == 0)
        down = [max(0, d - 1) for d in down]
        if servers_up == 0:
            # Whole pool offline: the interval is lost outright.
            records.append(
                IntervalRecord(2.0 * params.deadline_s, FaultCase.CASE3, 0)
            )
            continue
        t0 = interval_time(space, config, params, effects, servers_up) * float(time_noise[i])
        failures = 0
        for s in range(params.servers):
            if down[s] == 0 and rng.random() < p_fail:
                failures += 1
                down[s] = fault_model.repair_intervals
        if failures == 0:
            records.append(IntervalRecord(t0, FaultCase.NO_FAULT, servers_up))
            fault_free_times.append(t0)
            continue
        survivors = servers_up - failures
        done = float(rng.random())
        if survivors == 0:
            finish = max(2.0 * params.deadline_s, 2.0 * t0)
        else:
            # Work done before the failure stands; the rest is
            # reassigned across the surviving servers.
            finish = done * t0 + (1.0 - done) * t0 * servers_up / survivors
        remaining = sum(1 for d in down if d == 0)
        outcome = classify_fault_outcome(
            finish - t0, finish, params.deadline_s, remaining, params.servers
        )
        records.append(IntervalRecord(finish, outcome, servers_up))

    if fault_free_times:
        execution_time = trimmed_mean(fault_free_times)
    else:
        execution_time = nominal

    f_ratio = eff.frequency_ghz / effects.reference_frequency_ghz
    cpu_draws = (
        effects.cpu_power_base_w
        * f_ratio**effects.cpu_power_exponent
        * eff.cpu_power
        * cpu_noise
    )
    dram_draws = (
        effects.dram_background_w
        + eff.dram_background_w
        + effects.dram_activity_w * f_ratio * eff.dram_activity
    ) * dram_noise
    peak_draws = (
        cpu_draws + dram_draws + effects.peak_margin_w * peak_noise + eff.peak_surcharge_w
    )
    temp_draws = (
        effects.temperature_ambient_c
        + effects.temperature_per_watt * cpu_draws * eff.temperature
        + temp_noise
    )
    cores = params.cores_per_server * eff.usable_cores
    ipc_draws = effects.ipc_per_core * cores * eff.throughput * ipc_noise
    mpki_draws = effects.mpki_base * eff.mpki * mpki_noise

    server_mtbf = 1e9 / fit
    monitors = MonitorVector(
        execution_time=execution_time,
        ipc=trimmed_mean(ipc_draws),
        dram_power=trimmed_mean(dram_draws),
        cpu_power=trimmed_mean(cpu_draws),
        peak_power=trimmed_mean(peak_draws),
        cpu_temperature=trimmed_mean(temp_draws),
        mpki=trimmed_mean(mpki_draws),
        server_mtbf=server_mtbf,
        system_mtbf=server_mtbf,  # provisional; provisioning divides it later
        capex=0.0,                # filled by requirement derivation
        opex=0.0,
    )
    return SimulationResult(monitors, tuple(records))


def simulate_config(
    space: KnobSpace,
    config: Configuration,
    params: WorkloadParams,
    effects: KnobEffects,
    fault_model: FaultModel,
    n_intervals: int = DEFAULT_INTERVALS,
    seed: int = 0,
) -> MonitorVector:
    return simulate_config_detailed(
        space, config, params, effects, fault_model, n_intervals, seed
    ).monitors


def parameters_digest(
    space: KnobSpace,
    params: WorkloadParams,
    effects: KnobEffects,
    fault_model: FaultModel,
) -> str:
    """Stable hash of everything that shapes the sweep besides the seed."""
    payload = {
        "space": space.to_json_dict(),
        "workload": asdict(params),
        "effects": asdict(effects),
        "fault_model": asdict(fault_model),
    }
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def generate_sweep(
    space: KnobSpace,
    params: WorkloadParams,
    effects: KnobEffects,
    fault_model: FaultModel,
    seed: int,
    n_intervals: int = DEFAULT_INTERVALS,
) -> SweepDataset:
    """Simulate every configuration in the space once.

    Rows come out in enumeration order with requirement values left
    underived; metadata records the seed, the parameter digest and the
    aggregate interval success fraction.
    """
    rows = []
    good = 0
    total = 0
    for config in enumerate_configs(space):
        result = simulate_config_detailed(
            space, config, params, effects, fault_model, n_intervals, seed
        )
        rows.append(SweepRow(config, result.monitors))
        bad = sum(
            1 for r in result.intervals
            if r.outcome in (FaultCase.CASE2, FaultCase.CASE3)
        )
        good += len(result.intervals) - bad
        total += len(result.intervals)
    metadata = {
        "seed": str(seed),
        "parameters": parameters_digest(space, params, effects, fault_model),
        "mc_iterations": str(params.mc_iterations),
        "n_intervals": str(n_intervals),
        "interval_success_fraction": format(good / total, ".6f"),
    }
    return SweepDataset(space, tuple(rows), metadata)
