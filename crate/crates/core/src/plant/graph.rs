//! Waypoint graph: plant locations joined by weighted, possibly one-way paths.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing path lengths for ties.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            id: id.into(),
            x,
            y,
        }
    }

    pub fn distance_to(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A path between two nodes. A non-directed edge can be driven both ways.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub directed: bool,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub distance: f64,
    pub nodes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct WaypointGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    out: Vec<Vec<(usize, f64)>>,
    inc: Vec<Vec<(usize, f64)>>,
}

impl WaypointGraph {
    /// Builds the graph. Fails on duplicate node ids or dangling edge endpoints.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::InvalidConfig(vec![super::Violation::DuplicateNode(
                    node.id.clone(),
                )]));
            }
        }
        let mut out = vec![Vec::new(); nodes.len()];
        let mut inc = vec![Vec::new(); nodes.len()];
        for edge in &edges {
            let a = *index
                .get(&edge.from)
                .ok_or_else(|| Error::UnknownNode(edge.from.clone()))?;
            let b = *index
                .get(&edge.to)
                .ok_or_else(|| Error::UnknownNode(edge.to.clone()))?;
            out[a].push((b, edge.weight));
            inc[b].push((a, edge.weight));
            if !edge.directed {
                out[b].push((a, edge.weight));
                inc[a].push((b, edge.weight));
            }
        }
        Ok(Self {
            nodes,
            edges,
            index,
            out,
            inc,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Outgoing `(neighbor, weight)` pairs of node `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    /// Shortest distances from `source` to every node (`INFINITY` if unreachable).
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        dijkstra(&self.out, source)
    }

    /// Shortest distances from every node to `target`.
    pub fn distances_to(&self, target: usize) -> Vec<f64> {
        dijkstra(&self.inc, target)
    }

    /// Minimum-length directed path. Among equal-length paths the one with the
    /// lexicographically smallest node-id sequence is returned.
    pub fn shortest_path(&self, from: &str, to: &str) -> Result<PathResult> {
        let a = self
            .node_index(from)
            .ok_or_else(|| Error::UnknownNode(from.to_string()))?;
        let b = self
            .node_index(to)
            .ok_or_else(|| Error::UnknownNode(to.to_string()))?;
        let to_target = self.distances_to(b);
        if !to_target[a].is_finite() {
            return Err(Error::Unreachable {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        let nodes = self
            .walk_path(a, b, &to_target)
            .into_iter()
            .map(|i| self.nodes[i].id.clone())
            .collect();
        Ok(PathResult {
            distance: to_target[a],
            nodes,
        })
    }

    /// All-pairs distance table, computed once per plant.
    pub fn all_pairs(&self) -> DistanceTable {
        let n = self.len();
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            dist.extend(self.distances_from(i));
        }
        DistanceTable { n, dist }
    }

    fn walk_path(&self, from: usize, to: usize, to_target: &[f64]) -> Vec<usize> {
        let mut path = vec![from];
        let mut visited = vec![false; self.len()];
        visited[from] = true;
        let mut current = from;
        while current != to {
            let remaining = to_target[current];
            let tol = TIE_EPS * remaining.max(1.0);
            let next = self.out[current]
                .iter()
                .filter(|&&(v, w)| !visited[v] && (w + to_target[v] - remaining).abs() <= tol)
                .map(|&(v, _)| v)
                .min_by(|&u, &v| self.nodes[u].id.cmp(&self.nodes[v].id))
                .expect("a tight edge exists on every shortest path");
            visited[next] = true;
            path.push(next);
            current = next;
        }
        path
    }
}

/// Dense `n × n` matrix of shortest distances.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<f64>,
}

impl DistanceTable {
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.dist[from * self.n + to]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Seconds to cover `distance` meters at `speed` m/s.
pub fn drive_duration(distance: f64, speed: f64) -> Result<f64> {
    if speed <= 0.0 || speed.is_nan() {
        return Err(Error::NonPositiveSpeed(speed));
    }
    Ok(distance / speed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapItem { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, w) in &adj[node] {
            let candidate = d + w;
            if candidate < dist[next] {
                dist[next] = candidate;
                heap.push(HeapItem {
                    dist: candidate,
                    node: next,
                });
            }
        }
    }
    dist
}
