"""Placement solutions and link-level flow assignments shared by the exact
engine, the heuristic and the validator."""

from __future__ import annotations

from dataclasses import dataclass, field

from .power import ModelParams
from .topology import LayerKind, NetworkInstance


@dataclass(frozen=True)
class PlacementSolution:
    """Which VM types sit at which candidate nodes, plus the resulting
    cloudlet workloads and per-object traffic shares."""

    #: (candidate node id, vm type) pairs with a placed instance.
    placed: frozenset[tuple[int, int]]
    #: candidate node id -> total normalized workload.
    workload: dict[int, float]
    #: object id -> [(serving candidate, share in bps)], summing to demand.
    assignment: dict[int, list[tuple[int, float]]]
    #: candidate node id -> hosting layer (for power accounting).
    layers: dict[int, LayerKind]

    @classmethod
    def from_assignment(cls, instance: NetworkInstance, params: ModelParams,
                        served: dict[int, int]) -> "PlacementSolution":
        """Build from a single-instance assignment ``object -> candidate``;
        the placed set and workloads follow from the objects' VM requests."""
        placed = frozenset((c, instance.vm_request[o]) for o, c in served.items())
        workload: dict[int, float] = {}
        layers: dict[int, LayerKind] = {}
        for c, v in placed:
            layer = instance.layer(c)
            layers[c] = layer
            workload[c] = workload.get(c, 0.0) + params.workloads.workload(v, layer)
        assignment = {o: [(c, params.demand_bps)] for o, c in served.items()}
        return cls(placed=placed, workload=workload,
                   assignment=assignment, layers=layers)

    def cloudlet_open(self) -> set[int]:
        return {c for c, _ in self.placed}

    def workload_by_node_layer(self):
        for c, tw in sorted(self.workload.items()):
            yield (c, self.layers[c]), tw

    def vm_count(self) -> int:
        return len(self.placed)

    def placed_layers(self) -> list[LayerKind]:
        return [self.layers[c] for c, _ in self.placed]


@dataclass
class FlowAssignment:
    """Per-link bit rates realizing all demands, with the per-commodity
    decompositions needed for flow-conservation checks."""

    #: directed link (src, dst) -> unprocessed bps.
    upt: dict[tuple[int, int], float] = field(default_factory=dict)
    #: directed link (src, dst) -> processed bps.
    pt: dict[tuple[int, int], float] = field(default_factory=dict)
    #: (object, cloudlet) -> {link -> bps} for the unprocessed commodity.
    upt_commodity: dict[tuple[int, int], dict[tuple[int, int], float]] = field(default_factory=dict)
    #: cloudlet -> {link -> bps} for its processed commodity to the OLT.
    pt_commodity: dict[int, dict[tuple[int, int], float]] = field(default_factory=dict)
    #: cloudlet -> processed rate handed to the OLT.
    pt_cl: dict[int, float] = field(default_factory=dict)

    def add_unprocessed(self, o: int, c: int, path, rate: float) -> None:
        com = self.upt_commodity.setdefault((o, c), {})
        for a, b in zip(path, path[1:]):
            com[(a, b)] = com.get((a, b), 0.0) + rate
            self.upt[(a, b)] = self.upt.get((a, b), 0.0) + rate

    def add_processed(self, c: int, path, rate: float) -> None:
        self.pt_cl[c] = self.pt_cl.get(c, 0.0) + rate
        com = self.pt_commodity.setdefault(c, {})
        for a, b in zip(path, path[1:]):
            com[(a, b)] = com.get((a, b), 0.0) + rate
            self.pt[(a, b)] = self.pt.get((a, b), 0.0) + rate


def build_flows(instance: NetworkInstance, params: ModelParams,
                solution: PlacementSolution,
                path_unprocessed, path_processed) -> FlowAssignment:
    """Route every assigned share: unprocessed object -> cloudlet along
    ``path_unprocessed(o, c)``, then the reduced fraction cloudlet -> OLT
    along ``path_processed(c)`` (skipped for an OLT-hosted cloudlet, whose
    processed path has zero length)."""
    flows = FlowAssignment()
    olt = instance.olt_id
    inflow: dict[int, float] = {}
    for o in sorted(solution.assignment):
        for c, rate in solution.assignment[o]:
            if rate <= 0.0:
                continue
            flows.add_unprocessed(o, c, path_unprocessed(o, c), rate)
            inflow[c] = inflow.get(c, 0.0) + rate
    f = params.remaining_fraction
    for c in sorted(inflow):
        if c == olt:
            continue
        flows.add_processed(c, path_processed(c), f * inflow[c])
    return flows
