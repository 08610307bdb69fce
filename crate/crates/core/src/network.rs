//! Skyway network: rooftop nodes joined by directed flight segments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::wind::WindCondition;

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";

/// Neighbours each node is joined to by the synthetic generator.
pub const DEFAULT_NEIGHBORS: usize = 3;

/// Target mean nearest-neighbour spacing of generated networks, in meters.
const TARGET_SPACING_M: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkywayNode {
    pub id: u64,
    pub x: f64,
    pub y: f64,
}

/// A directed flight corridor. Each segment is one candidate service.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkywaySegment {
    pub id: u64,
    pub src: u64,
    pub dst: u64,
    pub length_m: f64,
    pub wind: Option<WindCondition>,
}

/// Validated network. Nodes and segments are kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct SkywayNetwork {
    nodes: Vec<SkywayNode>,
    segments: Vec<SkywaySegment>,
}

impl SkywayNetwork {
    pub fn new(mut nodes: Vec<SkywayNode>, mut segments: Vec<SkywaySegment>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        segments.sort_by_key(|s| s.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Validation(format!(
                    "duplicate node id {}",
                    pair[0].id
                )));
            }
        }
        if let Some(n) = nodes.iter().find(|n| !n.x.is_finite() || !n.y.is_finite()) {
            return Err(Error::Validation(format!(
                "node {} has non-finite coordinates",
                n.id
            )));
        }
        for pair in segments.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Validation(format!(
                    "duplicate edge id {}",
                    pair[0].id
                )));
            }
        }
        for s in &segments {
            for end in [s.src, s.dst] {
                if nodes.binary_search_by_key(&end, |n| n.id).is_err() {
                    return Err(Error::Validation(format!(
                        "edge {} references node {end}, which is not in the node set",
                        s.id
                    )));
                }
            }
            if s.src == s.dst {
                return Err(Error::Validation(format!(
                    "edge {} is a self-loop on node {}",
                    s.id, s.src
                )));
            }
            if !(s.length_m.is_finite() && s.length_m > 0.0) {
                return Err(Error::Validation(format!(
                    "edge {} has non-positive length {}",
                    s.id, s.length_m
                )));
            }
        }
        Ok(Self { nodes, segments })
    }

    pub fn nodes(&self) -> &[SkywayNode] {
        &self.nodes
    }

    pub fn segments(&self) -> &[SkywaySegment] {
        &self.segments
    }

    pub fn node(&self, id: u64) -> Option<&SkywayNode> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    /// Returns a copy of the network with wind attached to the listed segments.
    /// Segments absent from `wind` keep their current condition.
    pub fn with_wind(&self, wind: &BTreeMap<u64, WindCondition>) -> Result<Self> {
        let mut segments = self.segments.clone();
        let mut seen = 0;
        for s in &mut segments {
            if let Some(w) = wind.get(&s.id) {
                s.wind = Some(*w);
                seen += 1;
            }
        }
        if seen != wind.len() {
            let unknown = wind
                .keys()
                .find(|&&id| self.segments.binary_search_by_key(&id, |s| s.id).is_err())
                .copied()
                .unwrap_or_default();
            return Err(Error::Validation(format!(
                "wind given for unknown edge {unknown}"
            )));
        }
        Ok(Self {
            nodes: self.nodes.clone(),
            segments,
        })
    }

    /// Number of weakly connected components.
    pub fn component_count(&self) -> usize {
        let index: HashMap<u64, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id, i))
            .collect();
        let mut uf = UnionFind::new(self.nodes.len());
        for s in &self.segments {
            uf.union(index[&s.src], index[&s.dst]);
        }
        (0..self.nodes.len()).filter(|&i| uf.find(i) == i).count()
    }

    /// Renders the nodes and edges CSV files. Output is a pure function of the
    /// network content.
    pub fn to_csv(&self) -> (String, String) {
        let mut nodes = String::from("node_id,x_m,y_m\n");
        for n in &self.nodes {
            let _ = writeln!(nodes, "{},{:.6},{:.6}", n.id, n.x, n.y);
        }
        let mut edges = String::from("edge_id,src,dst,length_m\n");
        for s in &self.segments {
            let _ = writeln!(edges, "{},{},{},{:.6}", s.id, s.src, s.dst, s.length_m);
        }
        (nodes, edges)
    }
}

#[derive(Deserialize)]
struct NodeRow {
    node_id: u64,
    x_m: f64,
    y_m: f64,
}

#[derive(Deserialize)]
struct EdgeRow {
    edge_id: u64,
    src: u64,
    dst: u64,
    length_m: Option<f64>,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

/// Reads a network from a nodes CSV and an edges CSV. Edges with an empty
/// `length_m` get the Euclidean distance between their endpoints.
pub fn load_network(nodes_path: &Path, edges_path: &Path) -> Result<SkywayNetwork> {
    let nodes: Vec<SkywayNode> = read_rows::<NodeRow>(nodes_path)?
        .into_iter()
        .map(|r| SkywayNode {
            id: r.node_id,
            x: r.x_m,
            y: r.y_m,
        })
        .collect();
    let coords: HashMap<u64, (f64, f64)> = nodes.iter().map(|n| (n.id, (n.x, n.y))).collect();
    let mut segments = Vec::new();
    for r in read_rows::<EdgeRow>(edges_path)? {
        let length_m = match r.length_m {
            Some(l) => l,
            None => match (coords.get(&r.src), coords.get(&r.dst)) {
                (Some(&a), Some(&b)) => quantize(euclidean(a, b)),
                // Leave dangling ids for SkywayNetwork::new to report.
                _ => f64::NAN,
            },
        };
        segments.push(SkywaySegment {
            id: r.edge_id,
            src: r.src,
            dst: r.dst,
            length_m,
            wind: None,
        });
    }
    SkywayNetwork::new(nodes, segments)
}

pub fn save_network(network: &SkywayNetwork, nodes_path: &Path, edges_path: &Path) -> Result<()> {
    let (nodes, edges) = network.to_csv();
    std::fs::write(nodes_path, nodes).map_err(|e| Error::io(nodes_path, e))?;
    std::fs::write(edges_path, edges).map_err(|e| Error::io(edges_path, e))
}

/// Loads `nodes.csv` and `edges.csv` from a directory.
pub fn load_network_dir(dir: &Path) -> Result<SkywayNetwork> {
    load_network(&dir.join(NODES_FILE), &dir.join(EDGES_FILE))
}

pub fn save_network_dir(network: &SkywayNetwork, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_network(network, &dir.join(NODES_FILE), &dir.join(EDGES_FILE))
}

/// Generates a connected random geometric network with `k = 3` neighbours.
pub fn gen_network(node_count: usize, seed: u64) -> Result<SkywayNetwork> {
    gen_network_with(node_count, seed, DEFAULT_NEIGHBORS)
}

/// Places `node_count` nodes uniformly in a square sized for ~400 m mean
/// nearest-neighbour spacing, joins each node to its `k` nearest neighbours in
/// both directions, then bridges any leftover components through their closest
/// node pair. Coordinates and lengths are quantized to micrometres so the
/// 6-decimal CSV form reloads exactly.
pub fn gen_network_with(node_count: usize, seed: u64, k: usize) -> Result<SkywayNetwork> {
    if node_count < 2 {
        return Err(Error::Argument(format!(
            "node_count must be at least 2, got {node_count}"
        )));
    }
    if k == 0 {
        return Err(Error::Argument(
            "neighbour count k must be at least 1".into(),
        ));
    }
    // Poisson points at density n/A have mean nearest-neighbour distance 1/(2*sqrt(n/A)).
    let side = 2.0 * TARGET_SPACING_M * (node_count as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..node_count)
        .map(|_| {
            let x = quantize(rng.random::<f64>() * side);
            let y = quantize(rng.random::<f64>() * side);
            (x, y)
        })
        .collect();

    let mut pairs = BTreeSet::new();
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(node_count);
    for i in 0..node_count {
        candidates.clear();
        candidates.extend(
            (0..node_count)
                .filter(|&j| j != i)
                .map(|j| (euclidean(points[i], points[j]), j)),
        );
        let take = k.min(candidates.len());
        candidates.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &candidates[..take] {
            pairs.insert((i.min(j), i.max(j)));
        }
    }

    let mut uf = UnionFind::new(node_count);
    for &(a, b) in &pairs {
        uf.union(a, b);
    }
    // Bridge each component not containing node 0 to the nearest node outside it.
    loop {
        let root0 = uf.find(0);
        let Some(start) = (0..node_count).find(|&i| uf.find(i) != root0) else {
            break;
        };
        let root = uf.find(start);
        let (inside, outside): (Vec<usize>, Vec<usize>) =
            (0..node_count).partition(|&i| uf.find(i) == root);
        let mut best = (f64::INFINITY, 0, 0);
        for &a in &inside {
            for &b in &outside {
                let d = euclidean(points[a], points[b]);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (_, a, b) = best;
        pairs.insert((a.min(b), a.max(b)));
        uf.union(a, b);
    }

    let nodes = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| SkywayNode { id: i as u64, x, y })
        .collect();
    let mut segments = Vec::with_capacity(pairs.len() * 2);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let length_m = quantize(euclidean(points[a], points[b])).max(1e-6);
        for (offset, (src, dst)) in [(a, b), (b, a)].into_iter().enumerate() {
            segments.push(SkywaySegment {
                id: (2 * k + offset) as u64,
                src: src as u64,
                dst: dst as u64,
                length_m,
                wind: None,
            });
        }
    }
    SkywayNetwork::new(nodes, segments)
}

fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn quantize(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so the structure is order-independent.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
