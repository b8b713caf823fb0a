import dataclasses
import math

import pytest

import ponplace as pp
from ponplace.topology import (ConfigError, LayerKind, Medium, OLT_NETWORK_ID,
                               RelayLayout, RequestAssignment)

ALLOWED_LAYER_PAIRS = {
    (LayerKind.OBJECT, LayerKind.RELAY),
    (LayerKind.RELAY, LayerKind.RELAY),
    (LayerKind.RELAY, LayerKind.COORDINATOR),
    (LayerKind.COORDINATOR, LayerKind.GATEWAY),
    (LayerKind.GATEWAY, LayerKind.ONU),
    (LayerKind.ONU, LayerKind.OLT),
}


def test_default_instance_node_count(paper_instance):
    # 2 networks x (50 objects + 25 relays + coordinator + gateway + ONU) + OLT
    assert len(paper_instance.nodes) == 157
    assert len(paper_instance.nodes_by_layer[LayerKind.OLT]) == 1
    for layer, per_net in [(LayerKind.ONU, 1), (LayerKind.GATEWAY, 1),
                           (LayerKind.COORDINATOR, 1)]:
        assert len(paper_instance.nodes_by_layer[layer]) == 2 * per_net


def test_default_candidate_count(paper_instance):
    assert len(pp.candidate_nodes(paper_instance)) == 57


def test_relay_grid_coordinates(paper_instance):
    xs = sorted({round(n.x, 9) for n in
                 paper_instance.nodes_by_layer[LayerKind.RELAY]})
    assert xs == [3.0, 9.0, 15.0, 21.0, 27.0]


def test_minimal_chain_unique_path(minimal_chain):
    inst = minimal_chain
    obj = inst.objects()[0]
    assert len(inst.out_links[obj]) == 1
    assert inst.out_links[obj][0].medium is Medium.WIRELESS
    # follow the only links all the way to the OLT
    hops = []
    node = obj
    while inst.out_links[node]:
        assert len(inst.out_links[node]) == 1
        node = inst.out_links[node][0].dst
        hops.append(inst.layer(node))
    assert hops == [LayerKind.RELAY, LayerKind.COORDINATOR,
                    LayerKind.GATEWAY, LayerKind.ONU, LayerKind.OLT]


def test_minimal_chain_candidates(minimal_chain):
    assert len(pp.candidate_nodes(minimal_chain)) == 5


def test_round_robin_request_balance(paper_instance):
    for net in (0, 1):
        counts = [0] * 4
        for o in paper_instance.objects():
            if paper_instance.network_of(o) == net:
                counts[paper_instance.vm_request[o]] += 1
        assert sorted(counts) == [12, 12, 13, 13]


def test_seeded_uniform_requests_in_range():
    cfg = pp.TopologyConfig(request_assignment=RequestAssignment.SEEDED_UNIFORM)
    inst = pp.build_instance(cfg)
    assert all(0 <= v < 4 for v in inst.vm_request.values())


def test_determinism():
    cfg = pp.TopologyConfig(rng_seed=123)
    a = pp.build_instance(cfg)
    b = pp.build_instance(cfg)
    assert a.nodes == b.nodes
    assert a.links == b.links
    assert a.vm_request == b.vm_request


def test_different_seed_moves_objects():
    a = pp.build_instance(pp.TopologyConfig(rng_seed=1))
    b = pp.build_instance(pp.TopologyConfig(rng_seed=2))
    assert a.nodes != b.nodes


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_layer_discipline_and_isolation(seed):
    inst = pp.build_instance(pp.TopologyConfig(rng_seed=seed))
    for ln in inst.links:
        assert (ln.src_layer, ln.dst_layer) in ALLOWED_LAYER_PAIRS
        if inst.network_of(ln.dst) != OLT_NETWORK_ID:
            assert inst.network_of(ln.src) == inst.network_of(ln.dst)


def test_wireless_distances_bounded(paper_instance):
    side = paper_instance.config.area_side_m
    for ln in paper_instance.links:
        if ln.medium is Medium.WIRELESS:
            if ln.src_layer is LayerKind.COORDINATOR:
                assert ln.distance_m == 100.0
            else:
                assert ln.distance_m <= side * math.sqrt(2) + 1e-9


def test_objects_within_area(paper_instance):
    side = paper_instance.config.area_side_m
    for n in paper_instance.nodes_by_layer[LayerKind.OBJECT]:
        assert 0.0 <= n.x <= side and 0.0 <= n.y <= side


def test_zero_relays_excludes_layer():
    cfg = pp.TopologyConfig(networks=1, objects_per_network=0,
                            relays_per_network=0)
    inst = pp.build_instance(cfg)
    layers = {inst.layer(c) for c in pp.candidate_nodes(inst)}
    assert LayerKind.RELAY not in layers
    assert len(pp.candidate_nodes(inst)) == 4


def test_config_errors():
    with pytest.raises(ConfigError):
        pp.build_instance(pp.TopologyConfig(networks=0))
    with pytest.raises(ConfigError):
        pp.build_instance(pp.TopologyConfig(relays_per_network=3))  # not square
    with pytest.raises(ConfigError):
        pp.build_instance(pp.TopologyConfig(objects_per_network=5,
                                            relays_per_network=0))
    with pytest.raises(ConfigError):
        pp.build_instance(pp.TopologyConfig(vm_types=0))


def test_line_layout_accepts_any_count():
    cfg = pp.TopologyConfig(relays_per_network=3,
                            relay_layout=RelayLayout.LINE)
    inst = pp.build_instance(cfg)
    assert len(inst.nodes_by_layer[LayerKind.RELAY]) == 6


def test_csv_export(tmp_path, minimal_chain):
    pp.topology.write_csv(minimal_chain, tmp_path)
    nodes = (tmp_path / "nodes.csv").read_text().splitlines()
    edges = (tmp_path / "edges.csv").read_text().splitlines()
    assert nodes[0] == "id,layer,network,x,y,vm_request"
    assert len(nodes) == 1 + len(minimal_chain.nodes)
    assert edges[0] == "src,dst,medium,distance_m"
    assert len(edges) == 1 + len(minimal_chain.links)


def test_olt_shared_by_both_networks(paper_instance):
    olt = paper_instance.olt_id
    sources = {paper_instance.network_of(ln.src)
               for ln in paper_instance.in_links[olt]}
    assert sources == {0, 1}
