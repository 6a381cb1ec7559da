//! Static plant description: waypoint graph, stations, part types, AGVs.

mod config;
mod graph;

pub use config::{
    validate_config, Agv, AgvSpec, EdgeSpec, NodeSpec, NoiseSpec, PartType, PartTypeSpec, Plant,
    PlantConfig, Station, StationKind, StationSpec, UnitKind, UnitSlot, Violation,
};
pub use graph::{drive_duration, DistanceTable, Edge, Node, PathResult, WaypointGraph};
