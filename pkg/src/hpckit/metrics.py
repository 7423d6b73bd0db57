"""Requirement derivation: performance, power, energy, availability, cost.

Four of the five requirements are simple combinations of measured
monitors. Availability folds in an over-provisioning step: a server
count S is grown until the probability that at least N of S servers
are up meets the target, and capex/opex then price that S. The derived
capex and opex are written back into the monitor vector so the cost
monitors reflect the provisioned system rather than placeholders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .errors import UnreachableTargetError
from .sweep import MonitorVector, RequirementValues, SweepDataset, SweepRow

BILLION_HOURS = 1e9  # FIT rates count failures per billion device hours


@dataclass(frozen=True)
class AvailabilityModel:
    """Repair time and provisioning policy for the availability requirement."""

    server_mttr: float = 24.0          # hours to restore a failed server
    required_servers: int = 2          # N servers that must be up
    availability_target: float = 0.99  # minimum acceptable system availability
    max_servers: int = 16              # provisioning cap for the search

    def __post_init__(self):
        if self.server_mttr <= 0:
            raise ValueError("server_mttr must be positive")
        if self.required_servers < 1:
            raise ValueError("required_servers must be at least 1")
        if not 0.0 < self.availability_target < 1.0:
            raise ValueError("availability_target must lie in (0, 1)")
        if self.max_servers < self.required_servers:
            raise ValueError("max_servers must be at least required_servers")


@dataclass(frozen=True)
class CostModel:
    """Unit prices for capex and opex."""

    server_price: float = 2000.0       # per server, currency
    infrastructure_price: float = 500.0  # per server share of racks/cooling
    energy_price: float = 1e-6         # currency per joule
    maintenance_rate: float = 0.01     # yearly fraction of capex

    def __post_init__(self):
        for name in ("server_price", "infrastructure_price", "energy_price", "maintenance_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class RequirementSpec:
    """Thresholds for the feasibility filter.

    Performance, power and energy are upper bounds; availability is a
    lower bound; cost has no threshold and is only minimized. The
    Monte Carlo iteration count is a fixed workload accuracy floor,
    checked once per dataset rather than per configuration.
    """

    performance_max: float = 600.0     # seconds
    power_max: float = 81.0            # watts
    energy_max: float = 48600.0        # joules
    availability_min: float = 0.99
    min_mc_iterations: int = 10_000

    def __post_init__(self):
        for name in ("performance_max", "power_max", "energy_max"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive and finite")
        if not 0.0 < self.availability_min < 1.0:
            raise ValueError("availability_min must lie in (0, 1)")
        if self.min_mc_iterations < 1:
            raise ValueError("min_mc_iterations must be positive")


class CostBreakdown(NamedTuple):
    capex: float
    opex: float
    total: float


def derive_power(cpu_power: float, dram_power: float) -> float:
    """Total input power: CPU plus DRAM."""
    if cpu_power < 0 or dram_power < 0:
        raise ValueError("power readings must be non-negative")
    return cpu_power + dram_power


def derive_energy(performance: float, power: float) -> float:
    """Energy to solution: run time times input power."""
    if performance < 0 or power < 0:
        raise ValueError("performance and power must be non-negative")
    return performance * power


def fit_to_mtbf(fit: float) -> float:
    """Convert a FIT rate (failures per 1e9 hours) to MTBF in hours."""
    if fit <= 0:
        raise ValueError("FIT rate must be positive")
    return BILLION_HOURS / fit


def server_availability(mtbf: float, mttr: float) -> float:
    """Steady-state availability of one server: MTBF / (MTBF + MTTR)."""
    if mtbf <= 0 or mttr <= 0:
        raise ValueError("mtbf and mttr must be positive")
    return mtbf / (mtbf + mttr)


def system_availability(servers: int, required: int, a: float) -> float:
    """Probability that at least ``required`` of ``servers`` are up.

    Servers fail independently, each up with probability ``a``.
    """
    if servers < 1 or required < 1 or required > servers:
        raise ValueError("need 1 <= required <= servers")
    if not 0.0 <= a <= 1.0:
        raise ValueError("per-server availability must lie in [0, 1]")
    total = 0.0
    for k in range(required, servers + 1):
        total += math.comb(servers, k) * a**k * (1.0 - a) ** (servers - k)
    return min(total, 1.0)


def min_servers(required: int, a: float, target: float, cap: int = 16) -> int:
    """Smallest server count meeting the availability target.

    Scans S from ``required`` to ``cap`` and returns the first S with
    system_availability(S, required, a) >= target. Raises
    UnreachableTargetError carrying the best achievable availability
    when even the cap falls short.
    """
    if cap < required:
        raise ValueError("cap must be at least required")
    best = 0.0
    for servers in range(required, cap + 1):
        avail = system_availability(servers, required, a)
        if avail >= target:
            return servers
        best = max(best, avail)
    raise UnreachableTargetError(
        f"no server count up to {cap} reaches availability {target}", best
    )


def derive_cost(servers: int, energy: float, model: CostModel) -> CostBreakdown:
    """Price a provisioned system.

    Capex buys the servers and their infrastructure share; opex charges
    the energy of one run on every provisioned server plus maintenance
    as a fraction of capex.
    """
    if servers < 1:
        raise ValueError("servers must be at least 1")
    if energy < 0:
        raise ValueError("energy must be non-negative")
    capex = servers * (model.server_price + model.infrastructure_price)
    opex = energy * model.energy_price * servers + model.maintenance_rate * capex
    return CostBreakdown(capex, opex, capex + opex)


def derive_requirements(
    monitors: MonitorVector,
    avail_model: AvailabilityModel,
    cost_model: CostModel,
) -> tuple[RequirementValues, MonitorVector]:
    """Derive the five requirements from one monitor vector.

    Returns the requirement values together with an updated monitor
    vector whose system_mtbf, capex and opex reflect the provisioned
    server count (system_mtbf uses a series model: server MTBF divided
    by the number of provisioned servers).
    """
    performance = monitors.execution_time
    power = derive_power(monitors.cpu_power, monitors.dram_power)
    energy = derive_energy(performance, power)

    a = server_availability(monitors.server_mtbf, avail_model.server_mttr)
    servers = min_servers(
        avail_model.required_servers,
        a,
        avail_model.availability_target,
        avail_model.max_servers,
    )
    availability = system_availability(servers, avail_model.required_servers, a)
    cost = derive_cost(servers, energy, cost_model)

    requirements = RequirementValues(
        performance=performance,
        power=power,
        energy=energy,
        availability=availability,
        cost=cost.total,
    )
    updated = replace(
        monitors,
        system_mtbf=monitors.server_mtbf / servers,
        capex=cost.capex,
        opex=cost.opex,
    )
    return requirements, updated


def derive_dataset(
    ds: SweepDataset,
    avail_model: AvailabilityModel,
    cost_model: CostModel,
    spec: RequirementSpec | None = None,
) -> SweepDataset:
    """Fill requirement values (and derived monitors) for every row.

    When ``spec`` is given it is attached to the returned dataset so that
    downstream feasibility filtering uses the same thresholds.
    """
    rows = []
    for row in ds.rows:
        requirements, monitors = derive_requirements(row.monitors, avail_model, cost_model)
        rows.append(SweepRow(row.config, monitors, requirements))
    if spec is not None:
        return replace(ds, rows=tuple(rows), requirement_spec=spec)
    return replace(ds, rows=tuple(rows))
