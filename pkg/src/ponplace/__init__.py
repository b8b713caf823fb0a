"""Energy-aware VM and cloudlet placement for IoT networks over a PON."""

from .eepiv import HeuristicResult, run_eepiv
from .experiments import (SweepError, SweepResult, SweepSpec, run_sweep,
                          savings_summary, write_placements_csv,
                          write_savings_csv, write_sweep_csv)
from .milp import (InfeasibleError, ResourceBudgetError, SearchLimits,
                   build_model, emit_lp, emit_mps, solve_exact,
                   validate_solution)
from .power import (CapacityError, EnergyParams, ModelError, ModelParams,
                    PowerReport, ProcessingParams, WorkloadTable,
                    link_cost_per_bit, processing_power, total_objective,
                    traffic_power)
from .solution import FlowAssignment, PlacementSolution
from .topology import (ConfigError, LayerKind, Link, Medium, NetworkInstance,
                       Node, RelayLayout, RequestAssignment, TopologyConfig,
                       build_instance, candidate_nodes, minimal_chain_config)

__version__ = "0.1.0"

__all__ = [
    "build_instance", "candidate_nodes", "minimal_chain_config",
    "TopologyConfig", "NetworkInstance", "Node", "Link", "LayerKind",
    "Medium", "RequestAssignment", "RelayLayout", "ConfigError",
    "EnergyParams", "ProcessingParams", "WorkloadTable", "ModelParams",
    "PowerReport", "ModelError", "CapacityError",
    "link_cost_per_bit", "traffic_power", "processing_power",
    "total_objective",
    "PlacementSolution", "FlowAssignment",
    "build_model", "emit_lp", "emit_mps", "solve_exact", "validate_solution",
    "SearchLimits", "ResourceBudgetError", "InfeasibleError",
    "run_eepiv", "HeuristicResult",
    "SweepSpec", "SweepResult", "SweepError", "run_sweep", "savings_summary",
    "write_sweep_csv", "write_placements_csv", "write_savings_csv",
    "__version__",
]
