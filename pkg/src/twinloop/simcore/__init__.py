from .topology import BaseStation, BackhaulLink, NetworkTopology, UserEquipment, build_topology
from .mobility import MobilityParams, gauss_markov_step, step_mobility
from .scenarios import ScenarioEvent, ScenarioSpec, load_catalog, load_scenario_file, scenario_by_id
from .world import DeviceInstruction, EnforcementError, TelemetryFrame, TelemetryRecord, World
from .sla import session_sla_status

__all__ = [
    "BaseStation",
    "BackhaulLink",
    "NetworkTopology",
    "UserEquipment",
    "build_topology",
    "MobilityParams",
    "gauss_markov_step",
    "step_mobility",
    "ScenarioEvent",
    "ScenarioSpec",
    "load_catalog",
    "load_scenario_file",
    "scenario_by_id",
    "DeviceInstruction",
    "EnforcementError",
    "TelemetryFrame",
    "TelemetryRecord",
    "World",
    "session_sla_status",
]
