import dataclasses
import random

import pytest

import ponplace as pp
from ponplace.milp import (InfeasibleError, ResourceBudgetError, SearchLimits,
                           solve_exact, validate_solution)
from ponplace.power import ModelParams
from ponplace.topology import LayerKind, RelayLayout

from oracle import brute_force_optimum, corpus_case, joint_brute_force_optimum


def test_minimal_chain_places_at_relay(minimal_chain):
    params = ModelParams.for_scenario(1, 0.5, vm_types=1)
    sol, flows, report = solve_exact(minimal_chain, params)
    relay = minimal_chain.nodes_by_layer[LayerKind.RELAY][0].id
    assert sol.placed == {(relay, 0)}
    assert validate_solution(sol, flows, minimal_chain, params).ok


def test_matches_oracle_on_random_cases():
    rng = random.Random(2024)
    for _ in range(8):
        inst, params = corpus_case(rng)
        _, _, report = solve_exact(inst, params)
        assert report.total_w == pytest.approx(
            brute_force_optimum(inst, params), rel=1e-9)


def test_low_traffic_consolidates_at_olt():
    # duplicated per-network copies cost more than one shared instance
    cfg = pp.TopologyConfig(networks=2, objects_per_network=2,
                            relays_per_network=1, vm_types=1)
    inst = pp.build_instance(cfg)
    params = ModelParams.for_scenario(2, 0.1, vm_types=1)
    sol, _, _ = solve_exact(inst, params)
    assert sol.placed == {(inst.olt_id, 0)}


def test_zero_energy_reduces_to_processing():
    cfg = pp.TopologyConfig(networks=2, objects_per_network=4,
                            relays_per_network=1, vm_types=2)
    inst = pp.build_instance(cfg)
    params = ModelParams.for_scenario(1, 0.5, vm_types=2)
    zeroed = dataclasses.replace(
        params, energy=dataclasses.replace(
            params.energy, e_ot=0, e_rt=0, e_rr=0, e_ct=0, e_cr=0, e_gr=0,
            e_gt=0, e_u=0, e_l=0, epsilon=0))
    _, _, report = solve_exact(inst, zeroed)
    expected = sum(params.workloads.workload(v, LayerKind.OLT)
                   * params.processing.max_power(LayerKind.OLT)
                   for v in (0, 1))  # one shared instance per type
    assert report.total_w == pytest.approx(expected, rel=1e-12)


def test_capacity_binding_matches_joint_oracle():
    # huge demand pulls every type toward the relay; its cap forces a split
    cfg = pp.TopologyConfig(networks=1, objects_per_network=3,
                            relays_per_network=1, vm_types=3)
    inst = pp.build_instance(cfg)
    params = ModelParams.for_scenario(2, 0.5, vm_types=3, demand_bps=1e6)
    sol, flows, report = solve_exact(inst, params)
    assert validate_solution(sol, flows, inst, params).ok
    assert max(sol.workload.values()) <= 1.0 + 1e-9
    assert report.total_w == pytest.approx(
        joint_brute_force_optimum(inst, params), rel=1e-9)


def test_capacity_toggle_never_hurts():
    cfg = pp.TopologyConfig(networks=1, objects_per_network=3,
                            relays_per_network=1, vm_types=3)
    inst = pp.build_instance(cfg)
    params = ModelParams.for_scenario(2, 0.5, vm_types=3, demand_bps=1e6)
    _, _, capped = solve_exact(inst, params)
    relaxed = dataclasses.replace(params, capacity_enforced=False)
    _, _, free = solve_exact(inst, relaxed)
    assert free.total_w <= capped.total_w + 1e-12


def test_budget_guard_on_full_scale(paper_instance):
    params = ModelParams.for_scenario(1, 0.5)
    with pytest.raises(ResourceBudgetError):
        solve_exact(paper_instance, params)


def test_expansion_budget():
    cfg = pp.TopologyConfig(networks=1, objects_per_network=3,
                            relays_per_network=1, vm_types=3)
    inst = pp.build_instance(cfg)
    params = ModelParams.for_scenario(2, 0.5, vm_types=3, demand_bps=1e6)
    with pytest.raises(ResourceBudgetError):
        solve_exact(inst, params, SearchLimits(max_expansions=1))


def test_unknown_vm_type_rejected(minimal_chain):
    params = ModelParams.for_scenario(1, 0.5, vm_types=1)
    bad = pp.NetworkInstance(minimal_chain.config, list(minimal_chain.nodes),
                             list(minimal_chain.links),
                             {o: 5 for o in minimal_chain.objects()})
    with pytest.raises(InfeasibleError):
        solve_exact(bad, params)


def test_deterministic():
    cfg = pp.TopologyConfig(networks=2, objects_per_network=5,
                            relays_per_network=2, relay_layout=RelayLayout.LINE,
                            vm_types=2, rng_seed=11)
    inst = pp.build_instance(cfg)
    params = ModelParams.for_scenario(3, 0.3, vm_types=2)
    a = solve_exact(inst, params)
    b = solve_exact(inst, params)
    assert a[0].placed == b[0].placed
    assert a[2].total_w == b[2].total_w


def test_empty_network_costs_nothing():
    inst = pp.build_instance(pp.minimal_chain_config(objects_per_network=0))
    params = ModelParams.for_scenario(1, 0.5, vm_types=1)
    sol, flows, report = solve_exact(inst, params)
    assert sol.placed == frozenset()
    assert report.total_w == 0.0
