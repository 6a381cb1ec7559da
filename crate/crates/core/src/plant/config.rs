//! Plant configuration file format, validation, and the resolved [`Plant`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::graph::{DistanceTable, Edge, Node, WaypointGraph};
use crate::error::{Error, Result};

const WEIGHT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub bidirectional: bool,
    /// Meters. Computed from the endpoint coordinates when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationKind {
    Source,
    Sink,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSpec {
    pub id: String,
    pub kind: StationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_node: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_node: Option<String>,
    pub buffer_capacity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processing_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartTypeSpec {
    pub id: String,
    /// Machine station ids in visiting order; source and sink are implicit.
    pub route: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgvSpec {
    pub id: String,
    pub speed_mps: f64,
    pub start_node: String,
}

/// Half-widths of the multiplicative `U[1-δ, 1+δ]` jitter applied to each
/// sampled duration. All zero means no noise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub drive: f64,
    pub transfer: f64,
    pub processing: f64,
    pub source_clock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub stations: Vec<StationSpec>,
    pub part_types: Vec<PartTypeSpec>,
    pub agvs: Vec<AgvSpec>,
    pub transfer_time_s: f64,
    pub source_clock_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

impl PlantConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn with_source_clock(mut self, seconds: f64) -> Self {
        self.source_clock_s = seconds;
        self
    }

    /// Resizes the fleet. Extra vehicles copy the listed ones round-robin
    /// (speed and start node) under fresh ids.
    pub fn with_agv_count(mut self, n: usize) -> Self {
        if self.agvs.is_empty() || n == self.agvs.len() {
            return self;
        }
        if n < self.agvs.len() {
            self.agvs.truncate(n);
            return self;
        }
        let template = self.agvs.clone();
        let taken: HashSet<String> = template.iter().map(|a| a.id.clone()).collect();
        let mut k = 0;
        while self.agvs.len() < n {
            let base = &template[self.agvs.len() % template.len()];
            let id = loop {
                k += 1;
                let candidate = format!("V{k}");
                if !taken.contains(&candidate) {
                    break candidate;
                }
            };
            self.agvs.push(AgvSpec {
                id,
                speed_mps: base.speed_mps,
                start_node: base.start_node.clone(),
            });
        }
        self
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// One reason a config cannot be simulated.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateNode(String),
    DuplicateStation(String),
    DuplicatePartType(String),
    DuplicateAgv(String),
    UnknownNode {
        owner: String,
        node: String,
    },
    EdgeWeightMismatch {
        from: String,
        to: String,
        weight: f64,
        euclidean: f64,
    },
    NonPositiveEdgeWeight {
        from: String,
        to: String,
    },
    SourceCount(usize),
    SinkCount(usize),
    MissingBufferNode {
        station: String,
        buffer: &'static str,
    },
    UnexpectedBufferNode {
        station: String,
        buffer: &'static str,
    },
    NodeSharedByBuffers(String),
    NonPositiveCapacity(String),
    NonPositiveProcessingTime(String),
    NoPartTypes,
    NoAgvs,
    EmptyRoute(String),
    UnknownRouteStation {
        part_type: String,
        station: String,
    },
    RouteStationNotMachine {
        part_type: String,
        station: String,
    },
    UnreachableLeg {
        part_type: String,
        from: String,
        to: String,
    },
    AgvCannotReachSource(String),
    NonPositiveSpeed(String),
    NegativeDuration(&'static str),
    NoiseOutOfRange(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateNode(id) => write!(f, "duplicate node id `{id}`"),
            DuplicateStation(id) => write!(f, "duplicate station id `{id}`"),
            DuplicatePartType(id) => write!(f, "duplicate part type id `{id}`"),
            DuplicateAgv(id) => write!(f, "duplicate AGV id `{id}`"),
            UnknownNode { owner, node } => write!(f, "{owner} references unknown node `{node}`"),
            EdgeWeightMismatch {
                from,
                to,
                weight,
                euclidean,
            } => write!(
                f,
                "edge {from}->{to} weight {weight} differs from euclidean distance {euclidean}"
            ),
            NonPositiveEdgeWeight { from, to } => {
                write!(
                    f,
                    "edge {from}->{to} has nonpositive weight between distinct points"
                )
            }
            SourceCount(n) => write!(f, "expected exactly one source, found {n}"),
            SinkCount(n) => write!(f, "expected exactly one sink, found {n}"),
            MissingBufferNode { station, buffer } => {
                write!(f, "station `{station}` has no {buffer} buffer node")
            }
            UnexpectedBufferNode { station, buffer } => {
                write!(f, "station `{station}` cannot have an {buffer} buffer node")
            }
            NodeSharedByBuffers(node) => write!(f, "node `{node}` shared by two buffers"),
            NonPositiveCapacity(s) => write!(f, "station `{s}` has nonpositive buffer capacity"),
            NonPositiveProcessingTime(s) => {
                write!(f, "machine `{s}` needs a positive processing time")
            }
            NoPartTypes => write!(f, "no part types defined"),
            NoAgvs => write!(f, "no AGVs defined"),
            EmptyRoute(t) => write!(f, "part type `{t}` has an empty route"),
            UnknownRouteStation { part_type, station } => {
                write!(
                    f,
                    "part type `{part_type}` routes through unknown station `{station}`"
                )
            }
            RouteStationNotMachine { part_type, station } => {
                write!(
                    f,
                    "part type `{part_type}` routes through non-machine `{station}`"
                )
            }
            UnreachableLeg {
                part_type,
                from,
                to,
            } => write!(
                f,
                "part type `{part_type}`: station `{to}` unreachable from `{from}`"
            ),
            AgvCannotReachSource(id) => write!(f, "AGV `{id}` cannot reach the source"),
            NonPositiveSpeed(id) => write!(f, "AGV `{id}` needs a positive speed"),
            NegativeDuration(field) => write!(f, "{field} must be a finite nonnegative duration"),
            NoiseOutOfRange(field) => write!(f, "noise.{field} must lie in [0, 1)"),
        }
    }
}

/// Collects every invariant violation in `config`; empty means simulatable.
pub fn validate_config(config: &PlantConfig) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut node_index = HashMap::new();
    for (i, n) in config.nodes.iter().enumerate() {
        if node_index.insert(n.id.as_str(), i).is_some() {
            out.push(Violation::DuplicateNode(n.id.clone()));
        }
    }
    let check_node = |owner: String, node: &str, out: &mut Vec<Violation>| -> bool {
        if node_index.contains_key(node) {
            true
        } else {
            out.push(Violation::UnknownNode {
                owner,
                node: node.to_string(),
            });
            false
        }
    };

    for e in &config.edges {
        let a = check_node(format!("edge {}->{}", e.from, e.to), &e.from, &mut out);
        let b = check_node(format!("edge {}->{}", e.from, e.to), &e.to, &mut out);
        if !(a && b) {
            continue;
        }
        let na = &config.nodes[node_index[e.from.as_str()]];
        let nb = &config.nodes[node_index[e.to.as_str()]];
        let euclidean = (na.x - nb.x).hypot(na.y - nb.y);
        if let Some(w) = e.weight {
            if (w - euclidean).abs() > WEIGHT_REL_TOL * euclidean.max(f64::MIN_POSITIVE) {
                out.push(Violation::EdgeWeightMismatch {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    weight: w,
                    euclidean,
                });
            }
        }
        if euclidean > 0.0 && e.weight.is_some_and(|w| w <= 0.0) {
            out.push(Violation::NonPositiveEdgeWeight {
                from: e.from.clone(),
                to: e.to.clone(),
            });
        }
    }

    let mut station_ids = HashSet::new();
    let mut buffer_owner: HashMap<&str, ()> = HashMap::new();
    let (mut sources, mut sinks) = (0, 0);
    for s in &config.stations {
        if !station_ids.insert(s.id.as_str()) {
            out.push(Violation::DuplicateStation(s.id.clone()));
        }
        let (needs_in, needs_out) = match s.kind {
            StationKind::Source => {
                sources += 1;
                (false, true)
            }
            StationKind::Sink => {
                sinks += 1;
                (true, false)
            }
            StationKind::Machine => (true, true),
        };
        for (node, needed, buffer) in [
            (&s.input_node, needs_in, "input"),
            (&s.output_node, needs_out, "output"),
        ] {
            match (node, needed) {
                (None, true) => out.push(Violation::MissingBufferNode {
                    station: s.id.clone(),
                    buffer,
                }),
                (Some(_), false) => out.push(Violation::UnexpectedBufferNode {
                    station: s.id.clone(),
                    buffer,
                }),
                (Some(n), true) => {
                    if check_node(format!("station `{}`", s.id), n, &mut out)
                        && buffer_owner.insert(n.as_str(), ()).is_some()
                    {
                        out.push(Violation::NodeSharedByBuffers(n.clone()));
                    }
                }
                (None, false) => {}
            }
        }
        if s.buffer_capacity == 0 {
            out.push(Violation::NonPositiveCapacity(s.id.clone()));
        }
        if s.kind == StationKind::Machine
            && !s
                .processing_time_s
                .is_some_and(|p| p > 0.0 && p.is_finite())
        {
            out.push(Violation::NonPositiveProcessingTime(s.id.clone()));
        }
    }
    if sources != 1 {
        out.push(Violation::SourceCount(sources));
    }
    if sinks != 1 {
        out.push(Violation::SinkCount(sinks));
    }

    if config.part_types.is_empty() {
        out.push(Violation::NoPartTypes);
    }
    let mut type_ids = HashSet::new();
    for t in &config.part_types {
        if !type_ids.insert(t.id.as_str()) {
            out.push(Violation::DuplicatePartType(t.id.clone()));
        }
        if t.route.is_empty() {
            out.push(Violation::EmptyRoute(t.id.clone()));
        }
        for sid in &t.route {
            match config.stations.iter().find(|s| &s.id == sid) {
                None => out.push(Violation::UnknownRouteStation {
                    part_type: t.id.clone(),
                    station: sid.clone(),
                }),
                Some(s) if s.kind != StationKind::Machine => {
                    out.push(Violation::RouteStationNotMachine {
                        part_type: t.id.clone(),
                        station: sid.clone(),
                    })
                }
                Some(_) => {}
            }
        }
    }

    if config.agvs.is_empty() {
        out.push(Violation::NoAgvs);
    }
    let mut agv_ids = HashSet::new();
    for a in &config.agvs {
        if !agv_ids.insert(a.id.as_str()) {
            out.push(Violation::DuplicateAgv(a.id.clone()));
        }
        if !(a.speed_mps > 0.0 && a.speed_mps.is_finite()) {
            out.push(Violation::NonPositiveSpeed(a.id.clone()));
        }
        check_node(format!("AGV `{}`", a.id), &a.start_node, &mut out);
    }

    for (field, value) in [
        ("transfer_time_s", config.transfer_time_s),
        ("source_clock_s", config.source_clock_s),
    ] {
        if !(value >= 0.0 && value.is_finite()) {
            out.push(Violation::NegativeDuration(field));
        }
    }
    if let Some(noise) = &config.noise {
        for (field, v) in [
            ("drive", noise.drive),
            ("transfer", noise.transfer),
            ("processing", noise.processing),
            ("source_clock", noise.source_clock),
        ] {
            if !(0.0..1.0).contains(&v) {
                out.push(Violation::NoiseOutOfRange(field));
            }
        }
    }

    // Reachability needs a structurally sound config.
    if out.is_empty() {
        check_reachability(config, &mut out);
    }
    out
}

fn check_reachability(config: &PlantConfig, out: &mut Vec<Violation>) {
    let graph = build_graph(config).expect("nodes and edges validated");
    let node = |id: &str| graph.node_index(id).expect("node validated");
    let station = |id: &str| config.stations.iter().find(|s| s.id == id).unwrap();
    let source = config
        .stations
        .iter()
        .find(|s| s.kind == StationKind::Source)
        .unwrap();
    let sink = config
        .stations
        .iter()
        .find(|s| s.kind == StationKind::Sink)
        .unwrap();

    let mut reach_cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut reachable = |from: usize, to: usize| {
        reach_cache
            .entry(from)
            .or_insert_with(|| graph.distances_from(from))[to]
            .is_finite()
    };

    for t in &config.part_types {
        let mut legs: Vec<&StationSpec> = vec![source];
        legs.extend(t.route.iter().map(|s| station(s)));
        legs.push(sink);
        for pair in legs.windows(2) {
            let from = node(pair[0].output_node.as_deref().unwrap());
            let to = node(pair[1].input_node.as_deref().unwrap());
            if !reachable(from, to) {
                out.push(Violation::UnreachableLeg {
                    part_type: t.id.clone(),
                    from: pair[0].id.clone(),
                    to: pair[1].id.clone(),
                });
            }
        }
    }
    let source_out = node(source.output_node.as_deref().unwrap());
    for a in &config.agvs {
        if !reachable(node(&a.start_node), source_out) {
            out.push(Violation::AgvCannotReachSource(a.id.clone()));
        }
    }
}

fn build_graph(config: &PlantConfig) -> Result<WaypointGraph> {
    let nodes: Vec<Node> = config
        .nodes
        .iter()
        .map(|n| Node::new(n.id.clone(), n.x, n.y))
        .collect();
    let by_id: HashMap<&str, &Node> = nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    let mut edges = Vec::with_capacity(config.edges.len());
    for e in &config.edges {
        let a = by_id
            .get(e.from.as_str())
            .ok_or_else(|| Error::UnknownNode(e.from.clone()))?;
        let b = by_id
            .get(e.to.as_str())
            .ok_or_else(|| Error::UnknownNode(e.to.clone()))?;
        edges.push(Edge {
            from: e.from.clone(),
            to: e.to.clone(),
            directed: !e.bidirectional,
            weight: e.weight.unwrap_or_else(|| a.distance_to(b)),
        });
    }
    WaypointGraph::new(nodes, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    InputBuffer,
    Production,
    OutputBuffer,
}

/// A station unit as laid out in the observation and in [`SimState`](crate::sim::SimState).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitSlot {
    pub station: usize,
    pub kind: UnitKind,
    pub capacity: usize,
}

#[derive(Debug, Clone)]
pub struct Station {
    pub id: String,
    pub kind: StationKind,
    pub input_node: Option<usize>,
    pub output_node: Option<usize>,
    pub capacity: usize,
    pub processing_time: f64,
    pub input_unit: Option<usize>,
    pub production_unit: Option<usize>,
    pub output_unit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PartType {
    pub id: String,
    pub route: Vec<usize>,
}

impl PartType {
    /// Drives plus processing steps from source to sink.
    pub fn total_actions(&self) -> usize {
        2 * self.route.len() + 1
    }
}

#[derive(Debug, Clone)]
pub struct Agv {
    pub id: String,
    pub speed: f64,
    pub start_node: usize,
}

/// A validated plant with index-resolved references and cached distances.
#[derive(Debug, Clone)]
pub struct Plant {
    config: PlantConfig,
    graph: WaypointGraph,
    distances: DistanceTable,
    stations: Vec<Station>,
    units: Vec<UnitSlot>,
    part_types: Vec<PartType>,
    agvs: Vec<Agv>,
    source: usize,
    sink: usize,
    pickup_stations: Vec<usize>,
    buffer_nodes: Vec<usize>,
}

impl Plant {
    pub fn new(config: PlantConfig) -> Result<Self> {
        let violations = validate_config(&config);
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        let graph = build_graph(&config)?;
        let distances = graph.all_pairs();
        let node = |id: &Option<String>| id.as_deref().map(|n| graph.node_index(n).unwrap());

        let mut stations = Vec::with_capacity(config.stations.len());
        let mut units = Vec::new();
        for (i, s) in config.stations.iter().enumerate() {
            let mut add = |kind, capacity| {
                units.push(UnitSlot {
                    station: i,
                    kind,
                    capacity,
                });
                Some(units.len() - 1)
            };
            let (input_unit, production_unit, output_unit) = match s.kind {
                StationKind::Source => (None, None, add(UnitKind::OutputBuffer, s.buffer_capacity)),
                StationKind::Sink => (add(UnitKind::InputBuffer, s.buffer_capacity), None, None),
                StationKind::Machine => (
                    add(UnitKind::InputBuffer, s.buffer_capacity),
                    add(UnitKind::Production, 1),
                    add(UnitKind::OutputBuffer, s.buffer_capacity),
                ),
            };
            stations.push(Station {
                id: s.id.clone(),
                kind: s.kind,
                input_node: node(&s.input_node),
                output_node: node(&s.output_node),
                capacity: s.buffer_capacity,
                processing_time: s.processing_time_s.unwrap_or(0.0),
                input_unit,
                production_unit,
                output_unit,
            });
        }
        let station_index = |id: &str| stations.iter().position(|s| s.id == id).unwrap();
        let part_types = config
            .part_types
            .iter()
            .map(|t| PartType {
                id: t.id.clone(),
                route: t.route.iter().map(|s| station_index(s)).collect(),
            })
            .collect();
        let agvs = config
            .agvs
            .iter()
            .map(|a| Agv {
                id: a.id.clone(),
                speed: a.speed_mps,
                start_node: graph.node_index(&a.start_node).unwrap(),
            })
            .collect();
        let source = stations
            .iter()
            .position(|s| s.kind == StationKind::Source)
            .unwrap();
        let sink = stations
            .iter()
            .position(|s| s.kind == StationKind::Sink)
            .unwrap();
        let pickup_stations = stations
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind != StationKind::Sink)
            .map(|(i, _)| i)
            .collect();
        let mut buffer_nodes: Vec<usize> = stations
            .iter()
            .flat_map(|s| [s.input_node, s.output_node])
            .flatten()
            .collect();
        buffer_nodes.sort_unstable();

        Ok(Self {
            config,
            graph,
            distances,
            stations,
            units,
            part_types,
            agvs,
            source,
            sink,
            pickup_stations,
            buffer_nodes,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(PlantConfig::from_json(text)?)
    }

    pub fn config(&self) -> &PlantConfig {
        &self.config
    }

    pub fn graph(&self) -> &WaypointGraph {
        &self.graph
    }

    pub fn distance(&self, from: usize, to: usize) -> f64 {
        self.distances.get(from, to)
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn station(&self, i: usize) -> &Station {
        &self.stations[i]
    }

    pub fn units(&self) -> &[UnitSlot] {
        &self.units
    }

    pub fn part_types(&self) -> &[PartType] {
        &self.part_types
    }

    pub fn agvs(&self) -> &[Agv] {
        &self.agvs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Stations an AGV can pick up from (source and machines), in config order.
    pub fn pickup_stations(&self) -> &[usize] {
        &self.pickup_stations
    }

    /// Nodes attached to a buffer, in node order.
    pub fn buffer_nodes(&self) -> &[usize] {
        &self.buffer_nodes
    }

    pub fn transfer_time(&self) -> f64 {
        self.config.transfer_time_s
    }

    pub fn source_clock(&self) -> f64 {
        self.config.source_clock_s
    }

    pub fn noise(&self) -> NoiseSpec {
        self.config.noise.unwrap_or_default()
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.graph.nodes()[i].id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PlantConfig {
        PlantConfig::from_json(
            r#"{
            "nodes": [{"id":"S","x":0,"y":0},{"id":"I","x":4,"y":0},{"id":"O","x":4,"y":3},{"id":"K","x":0,"y":3}],
            "edges": [{"from":"S","to":"I"},{"from":"I","to":"O"},{"from":"O","to":"K"},{"from":"K","to":"S"}],
            "stations": [
                {"id":"source","kind":"source","output_node":"S","buffer_capacity":2},
                {"id":"M1","kind":"machine","input_node":"I","output_node":"O","buffer_capacity":2,"processing_time_s":10},
                {"id":"sink","kind":"sink","input_node":"K","buffer_capacity":2}
            ],
            "part_types": [{"id":"A","route":["M1"]}],
            "agvs": [{"id":"V1","speed_mps":1.0,"start_node":"S"}],
            "transfer_time_s": 2,
            "source_clock_s": 30
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn valid_config_has_no_violations() {
        assert_eq!(validate_config(&small()), vec![]);
    }

    #[test]
    fn shared_buffer_node_is_reported() {
        let mut c = small();
        c.stations[2].input_node = Some("O".into());
        let v = validate_config(&c);
        assert!(
            v.contains(&Violation::NodeSharedByBuffers("O".into())),
            "{v:?}"
        );
        assert!(v
            .iter()
            .any(|v| v.to_string() == "node `O` shared by two buffers"));
    }

    #[test]
    fn unreachable_route_station_is_reported() {
        let mut c = small();
        // Only the sink loop remains; M1's input cannot be reached from the source.
        c.edges = vec![
            EdgeSpec {
                from: "O".into(),
                to: "K".into(),
                bidirectional: true,
                weight: None,
            },
            EdgeSpec {
                from: "K".into(),
                to: "S".into(),
                bidirectional: true,
                weight: None,
            },
        ];
        let graph = build_graph(&c).unwrap();
        assert!(graph.shortest_path("S", "I").is_err());
        let v = validate_config(&c);
        assert!(v
            .iter()
            .any(|v| matches!(v, Violation::UnreachableLeg { to, .. } if to == "M1")));
    }

    #[test]
    fn structural_violations() {
        let mut c = small();
        c.stations[1].buffer_capacity = 0;
        c.stations[1].processing_time_s = None;
        c.stations.remove(2);
        c.agvs[0].speed_mps = 0.0;
        let v = validate_config(&c);
        assert!(v.contains(&Violation::NonPositiveCapacity("M1".into())));
        assert!(v.contains(&Violation::NonPositiveProcessingTime("M1".into())));
        assert!(v.contains(&Violation::SinkCount(0)));
        assert!(v.contains(&Violation::NonPositiveSpeed("V1".into())));
    }

    #[test]
    fn wrong_explicit_weight_is_reported() {
        let mut c = small();
        c.edges[0].weight = Some(4.5);
        assert!(matches!(
            validate_config(&c)[..],
            [Violation::EdgeWeightMismatch { .. }]
        ));
        c.edges[0].weight = Some(4.0);
        assert!(validate_config(&c).is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut json: serde_json::Value = serde_json::from_str(&small().to_json()).unwrap();
        json["extra"] = serde_json::json!(1);
        assert!(PlantConfig::from_json(&json.to_string()).is_err());
    }

    #[test]
    fn edges_default_to_bidirectional() {
        let plant = Plant::new(small()).unwrap();
        let s = plant.graph().node_index("S").unwrap();
        let i = plant.graph().node_index("I").unwrap();
        assert_eq!(plant.distance(s, i), 4.0);
        assert_eq!(plant.distance(i, s), 4.0);
    }

    #[test]
    fn resolved_layout() {
        let plant = Plant::new(small()).unwrap();
        assert_eq!(plant.units().len(), 5);
        assert_eq!(plant.pickup_stations(), &[0, 1]);
        assert_eq!(plant.buffer_nodes().len(), 4);
        assert_eq!(plant.part_types()[0].total_actions(), 3);
    }

    #[test]
    fn agv_count_resize() {
        let c = small().with_agv_count(3);
        assert_eq!(c.agvs.len(), 3);
        assert!(validate_config(&c).is_empty());
        assert_eq!(c.clone().with_agv_count(1).agvs.len(), 1);
    }
}
