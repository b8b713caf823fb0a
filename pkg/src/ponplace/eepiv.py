"""Greedy capacity-checked VM placement with min-hop routing.

Candidates are scanned bottom-up (relays first, network by network, the OLT
last) and each VM type is hosted at the first candidate with spare workload
capacity whose network does not already see an instance of that type.  The
OLT counts as belonging to every network.  Demands are then routed per
commodity on minimum-hop paths and the total power computed with the same
weighting as the exact engine, so both objectives are commensurable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .power import ModelParams, PowerReport, SCALED_LAYERS, total_objective
from .routing import min_hop_path
from .solution import FlowAssignment, PlacementSolution, build_flows
from .topology import (LayerKind, NetworkInstance, OLT_NETWORK_ID,
                       candidate_nodes)


@dataclass(frozen=True)
class HeuristicResult:
    solution: PlacementSolution
    flows: FlowAssignment
    report: PowerReport
    served_count: int


def _candidate_order(instance: NetworkInstance, order: str) -> list[int]:
    layer_rank = {LayerKind.RELAY: 0, LayerKind.COORDINATOR: 1,
                  LayerKind.GATEWAY: 2, LayerKind.ONU: 3}
    cand = candidate_nodes(instance)
    olt = instance.olt_id
    below = sorted((c for c in cand if c != olt),
                   key=lambda c: (instance.network_of(c),
                                  layer_rank[instance.layer(c)], c))
    if order == "bottom_up":
        return below + [olt]
    if order == "top_down":
        return [olt] + below[::-1]
    raise ValueError(f"unknown candidate order {order!r}")


def run_eepiv(instance: NetworkInstance, params: ModelParams, *,
              literal_total: bool = False,
              candidate_order: str = "bottom_up") -> HeuristicResult:
    """Run the greedy placement and routing pass.

    Objects whose type finds no host (capacity exhaustion) are left
    unserved and excluded from ``served_count``; with the default
    parameters every object is served.

    ``literal_total`` switches the reported total to the reduced audit
    formula that omits OLT processing power and the traffic scaling
    factor; the per-layer components are unchanged.
    """
    vm_types = params.workloads.vm_types
    networks = sorted({n.network_id for n in instance.nodes
                       if n.network_id != OLT_NETWORK_ID})
    demanded = {(net, v): False for net in networks for v in range(vm_types)}
    for o in instance.objects():
        demanded[(instance.network_of(o), instance.vm_request[o])] = True

    # host[(network, type)] -> candidate node serving that network's type.
    host: dict[tuple[int, int], int] = {}
    workload: dict[int, float] = {}
    for c in _candidate_order(instance, candidate_order):
        c_net = instance.network_of(c)
        c_layer = instance.layer(c)
        nets = networks if c_net == OLT_NETWORK_ID else [c_net]
        for v in range(vm_types):
            wanting = [net for net in nets
                       if demanded[(net, v)] and (net, v) not in host]
            if not wanting:
                continue
            w = params.workloads.workload(v, c_layer)
            if workload.get(c, 0.0) + w > 1.0 + 1e-12:
                continue
            workload[c] = workload.get(c, 0.0) + w
            for net in wanting:
                host[(net, v)] = c

    served: dict[int, int] = {}
    for o in instance.objects():
        c = host.get((instance.network_of(o), instance.vm_request[o]))
        if c is not None:
            served[o] = c

    solution = PlacementSolution.from_assignment(instance, params, served)
    cn = set(candidate_nodes(instance))
    olt = instance.olt_id
    flows = build_flows(
        instance, params, solution,
        path_unprocessed=lambda o, c: min_hop_path(instance, params, o, c)[2],
        path_processed=lambda c: min_hop_path(instance, params, c, olt,
                                              allowed=cn)[2])
    report = total_objective(solution, flows, instance, params)
    if literal_total:
        total = sum(w for layer, w in report.processing_w.items()
                    if layer is not LayerKind.OLT)
        total += sum(report.traffic_w_raw.values())
        report = PowerReport(processing_w=report.processing_w,
                             traffic_w_raw=report.traffic_w_raw,
                             scaling_a=report.scaling_a, total_w=total)
    return HeuristicResult(solution=solution, flows=flows, report=report,
                           served_count=len(served))
