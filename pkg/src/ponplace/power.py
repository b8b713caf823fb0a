"""Energy arithmetic: per-bit link costs, per-layer traffic power, workload
processing power and the weighted total objective.

All functions are pure over immutable inputs.  Traffic powers are computed
raw (unscaled); the networking scaling factor ``A`` is applied only in the
total objective and in the per-bit routing costs, where relay, coordinator,
ONU and OLT endpoints are weighted by ``A`` and object/gateway endpoints
are not.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .topology import LayerKind, Link, Medium, NetworkInstance


class ModelError(ValueError):
    """Parameter/instance mismatch or undefined energy role."""


class CapacityError(ValueError):
    """A cloudlet's total normalized workload exceeds 1."""


@dataclass(frozen=True)
class EnergyParams:
    """Per-bit energies (J/bit) and the wireless amplifier coefficient."""

    e_ot: float = 50e-9       # object transmit
    e_rt: float = 50e-9       # relay transmit
    e_rr: float = 50e-9       # relay receive
    e_ct: float = 50e-9       # coordinator transmit
    e_cr: float = 50e-9       # coordinator receive
    e_gr: float = 60e-6       # gateway receive
    e_gt: float = 15e-9       # gateway transmit
    e_u: float = 7.5e-9       # ONU (both directions)
    e_l: float = 225.6e-12    # OLT receive
    epsilon: float = 255e-12  # amplifier, J/(bit*m^2), wireless links only
    scaling_a: float = 5.0    # networking scaling factor


#: CPU counts per candidate layer.
DEFAULT_CPU_COUNTS = {
    LayerKind.RELAY: 1,
    LayerKind.COORDINATOR: 2,
    LayerKind.GATEWAY: 4,
    LayerKind.ONU: 4,
    LayerKind.OLT: 10,
}

DEFAULT_CPU_POWER_W = 4.64
#: Scenario 3 equips the OLT with a less efficient CPU.
INEFFICIENT_OLT_CPU_POWER_W = 9.28


@dataclass(frozen=True)
class ProcessingParams:
    """Per-layer CPU power and counts; max power is their product."""

    cpu_power_w: dict[LayerKind, float] = field(
        default_factory=lambda: {k: DEFAULT_CPU_POWER_W for k in DEFAULT_CPU_COUNTS})
    cpus: dict[LayerKind, int] = field(
        default_factory=lambda: dict(DEFAULT_CPU_COUNTS))

    def max_power(self, layer: LayerKind) -> float:
        if layer not in self.cpus:
            raise ModelError(f"layer {layer} cannot host a cloudlet")
        return self.cpu_power_w[layer] * self.cpus[layer]


#: Normalized workload of VM type t (1-based) per hosting layer, as fractions
#: of that layer's full CPU complement.  Type t uses t times the type-1 row.
_BASE_WORKLOAD_ROW = {
    LayerKind.RELAY: 0.1,
    LayerKind.COORDINATOR: 0.05,
    LayerKind.GATEWAY: 0.025,
    LayerKind.ONU: 0.025,
    LayerKind.OLT: 0.01,
}


@dataclass(frozen=True)
class WorkloadTable:
    """Map (vm_type, layer) -> normalized workload fraction in [0, 1]."""

    w: dict[tuple[int, LayerKind], float]
    vm_types: int

    @classmethod
    def heterogeneous(cls, vm_types: int = 4) -> "WorkloadTable":
        """Type t takes t/10 of a relay CPU, scaled down the layers."""
        if vm_types > 4:
            raise ModelError("default workload table defines 4 VM types")
        w = {(v, layer): (v + 1) * frac
             for v in range(vm_types)
             for layer, frac in _BASE_WORKLOAD_ROW.items()}
        return cls(w=w, vm_types=vm_types)

    @classmethod
    def homogeneous(cls, vm_types: int = 4) -> "WorkloadTable":
        """Every type carries the heaviest (type-4) demand."""
        w = {(v, layer): 4 * frac
             for v in range(vm_types)
             for layer, frac in _BASE_WORKLOAD_ROW.items()}
        return cls(w=w, vm_types=vm_types)

    def workload(self, vm_type: int, layer: LayerKind) -> float:
        try:
            return self.w[(vm_type, layer)]
        except KeyError:
            raise ModelError(f"no workload for type {vm_type} at {layer}") from None


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set for one evaluation cell."""

    energy: EnergyParams
    processing: ProcessingParams
    workloads: WorkloadTable
    demand_bps: float = 5000.0
    reduction_pct: float = 0.5   # fraction of volume removed by processing
    capacity_enforced: bool = True
    scenario: int = 1

    @property
    def remaining_fraction(self) -> float:
        """Fraction of a cloudlet's inflow that continues to the OLT."""
        return 1.0 - self.reduction_pct

    @classmethod
    def for_scenario(cls, scenario: int, reduction_pct: float,
                     vm_types: int = 4, **overrides) -> "ModelParams":
        """Scenario 1: heterogeneous VM CPU demands.  Scenario 2: all types
        at the heaviest demand.  Scenario 3: as 2, with an inefficient OLT
        CPU (9.28 W)."""
        if scenario not in (1, 2, 3):
            raise ModelError(f"unknown scenario {scenario}")
        if not 0.0 <= reduction_pct < 1.0:
            raise ModelError("reduction_pct must lie in [0, 1)")
        if scenario == 1:
            workloads = WorkloadTable.heterogeneous(vm_types)
        else:
            workloads = WorkloadTable.homogeneous(vm_types)
        processing = ProcessingParams()
        if scenario == 3:
            cpu_power = dict(processing.cpu_power_w)
            cpu_power[LayerKind.OLT] = INEFFICIENT_OLT_CPU_POWER_W
            processing = replace(processing, cpu_power_w=cpu_power)
        return cls(energy=EnergyParams(), processing=processing,
                   workloads=workloads, reduction_pct=reduction_pct,
                   scenario=scenario, **overrides)


_TX_ATTR = {
    LayerKind.OBJECT: "e_ot",
    LayerKind.RELAY: "e_rt",
    LayerKind.COORDINATOR: "e_ct",
    LayerKind.GATEWAY: "e_gt",
    LayerKind.ONU: "e_u",
}

_RX_ATTR = {
    LayerKind.RELAY: "e_rr",
    LayerKind.COORDINATOR: "e_cr",
    LayerKind.GATEWAY: "e_gr",
    LayerKind.ONU: "e_u",
    LayerKind.OLT: "e_l",
}

#: Layers whose traffic power the objective scales by A.
SCALED_LAYERS = (LayerKind.RELAY, LayerKind.COORDINATOR,
                 LayerKind.ONU, LayerKind.OLT)


def tx_energy(layer: LayerKind, energy: EnergyParams) -> float:
    try:
        return getattr(energy, _TX_ATTR[layer])
    except KeyError:
        raise ModelError(f"layer {layer} has no transmit role") from None


def rx_energy(layer: LayerKind, energy: EnergyParams) -> float:
    try:
        return getattr(energy, _RX_ATTR[layer])
    except KeyError:
        raise ModelError(f"layer {layer} has no receive role") from None


def a_weight(layer: LayerKind, energy: EnergyParams) -> float:
    return energy.scaling_a if layer in SCALED_LAYERS else 1.0


def link_cost_per_bit(link: Link, params: ModelParams) -> float:
    """Objective cost (J/bit) of pushing one bit across ``link``: the
    A-weighted transmit energy at the source (amplifier term included on
    wireless links) plus the A-weighted receive energy at the destination."""
    e = params.energy
    tx = tx_energy(link.src_layer, e)
    if link.medium is Medium.WIRELESS:
        tx += e.epsilon * link.distance_m ** 2
    rx = rx_energy(link.dst_layer, e)
    return a_weight(link.src_layer, e) * tx + a_weight(link.dst_layer, e) * rx


def traffic_power(flows, instance: NetworkInstance,
                  params: ModelParams) -> dict[LayerKind, float]:
    """Raw (unscaled) per-layer traffic power in watts.

    Each node is charged its transmit energy (plus the amplifier term on
    wireless links) for outgoing bits and its receive energy for incoming
    bits.  Objects only transmit; the OLT only receives.
    """
    e = params.energy
    power = {k: 0.0 for k in LayerKind}
    seen = set(flows.upt) | set(flows.pt)
    for pair in seen:
        link = instance.link_by_pair.get(pair)
        if link is None:
            raise ModelError(f"flow on non-existent link {pair}")
        rate = flows.upt.get(pair, 0.0) + flows.pt.get(pair, 0.0)
        tx = tx_energy(link.src_layer, e)
        if link.medium is Medium.WIRELESS:
            tx += e.epsilon * link.distance_m ** 2
        power[link.src_layer] += rate * tx
        power[link.dst_layer] += rate * rx_energy(link.dst_layer, e)
    return power


def processing_power(solution, params: ModelParams) -> dict[LayerKind, float]:
    """Per-layer processing power: each hosting cloudlet contributes its
    total normalized workload times the layer's max CPU power."""
    power = {k: 0.0 for k in LayerKind}
    for (c, layer), tw in solution.workload_by_node_layer():
        if params.capacity_enforced and tw > 1.0 + 1e-9:
            raise CapacityError(f"cloudlet at node {c} has workload {tw:.3f} > 1")
        power[layer] += tw * params.processing.max_power(layer)
    return power


@dataclass(frozen=True)
class PowerReport:
    """Per-layer processing and traffic power plus the weighted total."""

    processing_w: dict[LayerKind, float]
    traffic_w_raw: dict[LayerKind, float]
    scaling_a: float
    total_w: float

    def traffic_w_scaled(self) -> dict[LayerKind, float]:
        return {k: v * (self.scaling_a if k in SCALED_LAYERS else 1.0)
                for k, v in self.traffic_w_raw.items()}

    def recomputed_total(self) -> float:
        return (sum(self.processing_w.values())
                + sum(self.traffic_w_scaled().values()))

    def rows(self, scenario: int, reduction_pct: float) -> list[dict]:
        """CSV rows: scenario, reduction_pct, layer, processing_w,
        traffic_w_raw, traffic_w_scaled, total_w."""
        scaled = self.traffic_w_scaled()
        return [{
            "scenario": scenario,
            "reduction_pct": reduction_pct,
            "layer": k.value,
            "processing_w": self.processing_w[k],
            "traffic_w_raw": self.traffic_w_raw[k],
            "traffic_w_scaled": scaled[k],
            "total_w": self.total_w,
        } for k in LayerKind]


def total_objective(solution, flows, instance: NetworkInstance,
                    params: ModelParams) -> PowerReport:
    """Combine processing and traffic power into the minimized total:
    all processing, plus object and gateway traffic raw, plus A times the
    relay/coordinator/ONU/OLT traffic."""
    proc = processing_power(solution, params)
    traffic = traffic_power(flows, instance, params)
    a = params.energy.scaling_a
    total = sum(proc.values())
    for layer, watts in traffic.items():
        total += watts * (a if layer in SCALED_LAYERS else 1.0)
    return PowerReport(processing_w=proc, traffic_w_raw=traffic,
                       scaling_a=a, total_w=total)
