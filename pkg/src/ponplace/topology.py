"""Layered IoT-over-PON network instances.

Builds the concrete graph one experiment runs on: IoT objects, relays, a
coordinator and a gateway per IoT network, one ONU per network and a single
OLT shared by all networks.  Adjacency is directed and uplink-only; objects
never receive traffic and the OLT never transmits.
"""

from __future__ import annotations

import csv
import enum
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path


class ConfigError(ValueError):
    """Inconsistent or unsupported topology configuration."""


class LayerKind(enum.Enum):
    OBJECT = "object"
    RELAY = "relay"
    COORDINATOR = "coordinator"
    GATEWAY = "gateway"
    ONU = "onu"
    OLT = "olt"


#: Layers eligible to host a cloudlet (everything except the object layer).
CANDIDATE_LAYERS = (
    LayerKind.RELAY,
    LayerKind.COORDINATOR,
    LayerKind.GATEWAY,
    LayerKind.ONU,
    LayerKind.OLT,
)


class Medium(enum.Enum):
    WIRELESS = "wireless"
    ETHERNET = "ethernet"
    FIBER = "fiber"


class RequestAssignment(enum.Enum):
    ROUND_ROBIN = "round_robin"
    SEEDED_UNIFORM = "seeded_uniform"


class RelayLayout(enum.Enum):
    #: Uniform square grid; relay count must be a perfect square.
    GRID = "grid"
    #: Evenly spaced along the horizontal mid-line; any count.  Used by
    #: small test instances whose relay count is not a perfect square.
    LINE = "line"


#: network_id of the OLT, which belongs to no IoT network.
OLT_NETWORK_ID = -1


@dataclass(frozen=True)
class Node:
    id: int
    layer: LayerKind
    network_id: int
    x: float
    y: float


@dataclass(frozen=True)
class Link:
    """Directed link.  The amplifier term applies only to WIRELESS links."""

    src: int
    dst: int
    src_layer: LayerKind
    dst_layer: LayerKind
    medium: Medium
    distance_m: float


@dataclass(frozen=True)
class TopologyConfig:
    """Generation parameters.  Defaults reproduce the evaluated setup:
    2 IoT networks of 50 objects / 25 relays / 1 coordinator / 1 gateway /
    1 ONU in a 30 m square with 6 m relay spacing, plus a single OLT."""

    networks: int = 2
    objects_per_network: int = 50
    relays_per_network: int = 25
    area_side_m: float = 30.0
    relay_spacing_m: float = 6.0
    gateway_coordinator_distance_m: float = 100.0
    rng_seed: int = 7
    vm_types: int = 4
    request_assignment: RequestAssignment = RequestAssignment.ROUND_ROBIN
    relay_layout: RelayLayout = RelayLayout.GRID
    #: Override for the coordinator position; defaults to the area center.
    coordinator_xy: tuple[float, float] | None = None


class NetworkInstance:
    """Immutable node/link graph plus per-object VM requests.

    Exposes adjacency indices (``out_links`` / ``in_links``), per-layer node
    lists and a ``(src, dst) -> Link`` lookup.  Instances are safe to share
    read-only across concurrent solver runs.
    """

    def __init__(self, config: TopologyConfig, nodes: list[Node],
                 links: list[Link], vm_request: dict[int, int]):
        self.config = config
        self.nodes = tuple(nodes)
        self.links = tuple(links)
        self.vm_request = dict(vm_request)
        self.link_by_pair = {(ln.src, ln.dst): ln for ln in links}
        self.out_links: dict[int, list[Link]] = {n.id: [] for n in nodes}
        self.in_links: dict[int, list[Link]] = {n.id: [] for n in nodes}
        for ln in links:
            self.out_links[ln.src].append(ln)
            self.in_links[ln.dst].append(ln)
        self.nodes_by_layer: dict[LayerKind, list[Node]] = {k: [] for k in LayerKind}
        for n in nodes:
            self.nodes_by_layer[n.layer].append(n)

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def layer(self, node_id: int) -> LayerKind:
        return self.nodes[node_id].layer

    def network_of(self, node_id: int) -> int:
        return self.nodes[node_id].network_id

    @property
    def olt_id(self) -> int:
        return self.nodes_by_layer[LayerKind.OLT][0].id

    def objects(self) -> list[int]:
        return [n.id for n in self.nodes_by_layer[LayerKind.OBJECT]]

    def network_node_ids(self, network_id: int) -> list[int]:
        """All nodes of one IoT network plus the OLT."""
        return [n.id for n in self.nodes
                if n.network_id in (network_id, OLT_NETWORK_ID)]

    def visible_candidates(self, object_id: int) -> list[int]:
        """Candidates that may serve this object: own network plus the OLT."""
        net = self.network_of(object_id)
        return [c for c in candidate_nodes(self)
                if self.network_of(c) in (net, OLT_NETWORK_ID)]


def _relay_positions(config: TopologyConfig) -> list[tuple[float, float]]:
    k = config.relays_per_network
    side = config.area_side_m
    if config.relay_layout is RelayLayout.GRID:
        n = math.isqrt(k)
        if n * n != k:
            raise ConfigError(
                f"grid layout needs a perfect-square relay count, got {k}")
        offset = (side - (n - 1) * config.relay_spacing_m) / 2.0
        if offset < 0:
            raise ConfigError("relay grid does not fit in the area")
        return [(offset + i * config.relay_spacing_m,
                 offset + j * config.relay_spacing_m)
                for j in range(n) for i in range(n)]
    # LINE: evenly spaced on the horizontal mid-line.
    return [((i + 0.5) * side / k, side / 2.0) for i in range(k)]


def _validate_config(config: TopologyConfig) -> None:
    if config.networks < 1:
        raise ConfigError("need at least one IoT network")
    if config.objects_per_network < 0 or config.relays_per_network < 0:
        raise ConfigError("node counts must be nonnegative")
    if config.vm_types < 1:
        raise ConfigError("need at least one VM type")
    if config.area_side_m <= 0:
        raise ConfigError("area side must be positive")
    if config.objects_per_network > 0 and config.relays_per_network == 0:
        raise ConfigError("objects cannot reach the OLT without relays")


def build_instance(config: TopologyConfig) -> NetworkInstance:
    """Generate a deterministic instance from ``config``.

    Objects are placed uniformly at random (seeded) in the square area,
    relays per the configured layout, the coordinator at the area center
    (unless overridden).  Gateway/ONU/OLT carry no physical position: their
    link distances do not enter any cost term and are stored as 0.
    """
    _validate_config(config)
    relay_xy = _relay_positions(config) if config.relays_per_network else []
    rng = random.Random(config.rng_seed)
    coord_xy = config.coordinator_xy or (config.area_side_m / 2.0,
                                         config.area_side_m / 2.0)

    nodes: list[Node] = []
    links: list[Link] = []
    vm_request: dict[int, int] = {}
    onu_ids: list[int] = []

    def add_node(layer, network_id, x=math.nan, y=math.nan) -> int:
        nid = len(nodes)
        nodes.append(Node(nid, layer, network_id, x, y))
        return nid

    def add_link(a: int, b: int, medium: Medium, dist: float) -> None:
        links.append(Link(a, b, nodes[a].layer, nodes[b].layer, medium, dist))

    for net in range(config.networks):
        obj_ids = []
        for _ in range(config.objects_per_network):
            x = rng.uniform(0.0, config.area_side_m)
            y = rng.uniform(0.0, config.area_side_m)
            obj_ids.append(add_node(LayerKind.OBJECT, net, x, y))
        relay_ids = [add_node(LayerKind.RELAY, net, x, y) for x, y in relay_xy]
        coord = add_node(LayerKind.COORDINATOR, net, *coord_xy)
        gateway = add_node(LayerKind.GATEWAY, net)
        onu = add_node(LayerKind.ONU, net)
        onu_ids.append(onu)

        for o in obj_ids:
            for r in relay_ids:
                add_link(o, r, Medium.WIRELESS, _dist(nodes[o], nodes[r]))
        for r1 in relay_ids:
            for r2 in relay_ids:
                if r1 != r2:
                    add_link(r1, r2, Medium.WIRELESS, _dist(nodes[r1], nodes[r2]))
            add_link(r1, coord, Medium.WIRELESS, _dist(nodes[r1], nodes[coord]))
        add_link(coord, gateway, Medium.WIRELESS,
                 config.gateway_coordinator_distance_m)
        add_link(gateway, onu, Medium.ETHERNET, 0.0)

        for i, o in enumerate(obj_ids):
            if config.request_assignment is RequestAssignment.ROUND_ROBIN:
                vm_request[o] = i % config.vm_types
            else:
                vm_request[o] = rng.randrange(config.vm_types)

    olt = add_node(LayerKind.OLT, OLT_NETWORK_ID)
    for onu in onu_ids:
        add_link(onu, olt, Medium.FIBER, 0.0)

    return NetworkInstance(config, nodes, links, vm_request)


def _dist(a: Node, b: Node) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def candidate_nodes(instance: NetworkInstance) -> list[int]:
    """All non-object node ids, ascending (CN = relays, coordinators,
    gateways, ONUs, OLT)."""
    return [n.id for n in instance.nodes if n.layer is not LayerKind.OBJECT]


def minimal_chain_config(**overrides) -> TopologyConfig:
    """1 network, 1 object, 1 relay, 1 VM type: the smallest instance with a
    unique object -> relay -> coordinator -> gateway -> ONU -> OLT path."""
    base = TopologyConfig(networks=1, objects_per_network=1,
                          relays_per_network=1, vm_types=1)
    return replace(base, **overrides)


def write_csv(instance: NetworkInstance, out_dir: str | Path) -> None:
    """Export the instance as ``nodes.csv`` / ``edges.csv`` in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "layer", "network", "x", "y", "vm_request"])
        for n in instance.nodes:
            w.writerow([n.id, n.layer.value, n.network_id,
                        "" if math.isnan(n.x) else f"{n.x:.6f}",
                        "" if math.isnan(n.y) else f"{n.y:.6f}",
                        instance.vm_request.get(n.id, "")])
    with open(out / "edges.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src", "dst", "medium", "distance_m"])
        for ln in instance.links:
            w.writerow([ln.src, ln.dst, ln.medium.value, f"{ln.distance_m:.6f}"])
