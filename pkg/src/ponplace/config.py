"""JSON config files: a ``topology`` section mapping to TopologyConfig
fields and a ``model`` section selecting scenario, reduction and flags."""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

from .power import ModelParams
from .topology import (ConfigError, RelayLayout, RequestAssignment,
                       TopologyConfig)

_ENUM_FIELDS = {
    "request_assignment": RequestAssignment,
    "relay_layout": RelayLayout,
}


def load_config(path: str | Path) -> tuple[TopologyConfig, ModelParams]:
    data = json.loads(Path(path).read_text())
    topo_data = dict(data.get("topology", {}))
    known = {f.name for f in fields(TopologyConfig)}
    unknown = set(topo_data) - known
    if unknown:
        raise ConfigError(f"unknown topology keys {sorted(unknown)}")
    for key, enum_cls in _ENUM_FIELDS.items():
        if key in topo_data:
            topo_data[key] = enum_cls(topo_data[key])
    if "coordinator_xy" in topo_data and topo_data["coordinator_xy"] is not None:
        topo_data["coordinator_xy"] = tuple(topo_data["coordinator_xy"])
    topology = TopologyConfig(**topo_data)

    model_data = dict(data.get("model", {}))
    scenario = model_data.pop("scenario", 1)
    reduction = model_data.pop("reduction_pct", 0.5)
    params = ModelParams.for_scenario(scenario, reduction,
                                      vm_types=topology.vm_types,
                                      **model_data)
    return topology, params
