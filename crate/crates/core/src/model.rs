//! Windows, stub configurations and paired graphs shared by both pairing
//! models.

use std::fmt;
use std::io;
use std::str::FromStr;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite stretch `[lo, hi]` of the integer line. The outer `margin`
/// vertices on each side are simulated but excluded from measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    lo: i64,
    hi: i64,
    margin: u64,
}

impl Window {
    pub fn new(lo: i64, hi: i64, margin: u64) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidWindow(format!("lo ({lo}) must be below hi ({hi})")));
        }
        let len = (hi - lo) as u128 + 1;
        if len < 2 * margin as u128 + 1 {
            return Err(Error::InvalidWindow(format!(
                "{len} vertices cannot host a margin of {margin} on both sides"
            )));
        }
        if len > u32::MAX as u128 {
            return Err(Error::InvalidWindow(format!("{len} vertices exceed the supported size")));
        }
        Ok(Window { lo, hi, margin })
    }

    /// `n` vertices at `0..n`.
    pub fn with_len(n: usize, margin: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidWindow(format!("need at least 2 vertices, got {n}")));
        }
        Window::new(0, n as i64 - 1, margin)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn margin(&self) -> u64 {
        self.margin
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pos: i64) -> bool {
        self.lo <= pos && pos <= self.hi
    }

    /// Index of `pos` counted from `lo`. Caller guarantees containment.
    #[inline]
    pub fn offset(&self, pos: i64) -> usize {
        (pos - self.lo) as usize
    }

    #[inline]
    pub fn position(&self, offset: usize) -> i64 {
        self.lo + offset as i64
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    /// Inclusive bounds of the measurement region.
    pub fn measurement(&self) -> (i64, i64) {
        (self.lo + self.margin as i64, self.hi - self.margin as i64)
    }

    pub fn in_measurement(&self, pos: i64) -> bool {
        let (a, b) = self.measurement();
        a <= pos && pos <= b
    }

    pub fn measurement_len(&self) -> usize {
        let (a, b) = self.measurement();
        (b - a) as usize + 1
    }

    pub fn with_margin(&self, margin: u64) -> Result<Window> {
        Window::new(self.lo, self.hi, margin)
    }
}

/// Degrees `D_i` for every vertex of a window. Stub `(i, j)` is the level-`j`
/// stub at vertex `i`, `1 <= j <= D_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StubConfiguration {
    window: Window,
    degrees: Vec<u32>,
    zero_stripped: bool,
    original_positions: Option<Vec<i64>>,
}

impl StubConfiguration {
    pub fn new(window: Window, degrees: Vec<u32>) -> Result<Self> {
        if degrees.len() != window.len() {
            return Err(Error::DegreeCount {
                expected: window.len(),
                got: degrees.len(),
            });
        }
        let zero_stripped = degrees.iter().all(|&d| d >= 1);
        Ok(StubConfiguration {
            window,
            degrees,
            zero_stripped,
            original_positions: None,
        })
    }

    /// Degrees listed left to right starting at position 0.
    pub fn from_degrees(degrees: Vec<u32>, margin: u64) -> Result<Self> {
        let window = Window::with_len(degrees.len(), margin)?;
        StubConfiguration::new(window, degrees)
    }

    pub(crate) fn stripped(window: Window, degrees: Vec<u32>, original: Vec<i64>) -> Self {
        debug_assert!(degrees.iter().all(|&d| d >= 1));
        StubConfiguration {
            window,
            degrees,
            zero_stripped: true,
            original_positions: Some(original),
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Degrees indexed by window offset.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, pos: i64) -> u32 {
        self.degrees[self.window.offset(pos)]
    }

    /// True when every vertex carries at least one stub.
    pub fn zero_stripped(&self) -> bool {
        self.zero_stripped
    }

    /// Positions before zero stripping, if this configuration was stripped.
    pub fn original_positions(&self) -> Option<&[i64]> {
        self.original_positions.as_deref()
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn total_stubs(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    /// Mirror image about the window center.
    pub fn reflected(&self) -> StubConfiguration {
        let mut degrees = self.degrees.clone();
        degrees.reverse();
        StubConfiguration {
            window: self.window,
            degrees,
            zero_stripped: self.zero_stripped,
            original_positions: None,
        }
    }
}

/// Which construction step created an edge (or failed to resolve a stub).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    /// Coin-toss pairing of level `j`.
    CtLevel(u32),
    /// Bad stubs joined between neighbouring high vertices of a cluster.
    Cluster1i,
    /// Remaining bad stubs joined to low vertices of the same cluster.
    Cluster1ii,
    /// Good stubs of high vertices joined along the high-vertex sequence.
    Cluster2,
    /// Coin-toss pairing of the residual low-vertex stubs at level `j`.
    Cluster3Level(u32),
}

impl Provenance {
    pub fn token(&self) -> String {
        match self {
            Provenance::CtLevel(j) => format!("ct{j}"),
            Provenance::Cluster1i => "c1i".to_string(),
            Provenance::Cluster1ii => "c1ii".to_string(),
            Provenance::Cluster2 => "c2".to_string(),
            Provenance::Cluster3Level(j) => format!("c3l{j}"),
        }
    }

    pub fn ct_level(&self) -> Option<u32> {
        match *self {
            Provenance::CtLevel(j) | Provenance::Cluster3Level(j) => Some(j),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let level = |rest: &str| {
            rest.parse::<u32>()
                .ok()
                .filter(|&j| j >= 1)
                .ok_or_else(|| format!("bad level in provenance token `{s}`"))
        };
        match s {
            "c1i" => Ok(Provenance::Cluster1i),
            "c1ii" => Ok(Provenance::Cluster1ii),
            "c2" => Ok(Provenance::Cluster2),
            _ => {
                if let Some(rest) = s.strip_prefix("c3l") {
                    level(rest).map(Provenance::Cluster3Level)
                } else if let Some(rest) = s.strip_prefix("ct") {
                    level(rest).map(Provenance::CtLevel)
                } else {
                    Err(format!("unknown provenance token `{s}`"))
                }
            }
        }
    }
}

/// An undirected edge stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: i64,
    pub v: i64,
    pub provenance: Provenance,
}

impl Edge {
    pub fn length(&self) -> u64 {
        self.u.abs_diff(self.v)
    }
}

/// A stub whose prescribed partner lies outside the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DanglingStub {
    pub vertex: i64,
    pub provenance: Provenance,
}

/// Edges accumulated by a pairing run, plus the stubs left dangling at the
/// window boundary.
#[derive(Clone, Debug)]
pub struct PairedGraph {
    window: Window,
    edges: Vec<Edge>,
    pairs: FxHashSet<u64>,
    dangling: Vec<DanglingStub>,
}

impl PairedGraph {
    pub fn new(window: Window) -> Self {
        PairedGraph {
            window,
            edges: Vec::new(),
            pairs: FxHashSet::default(),
            dangling: Vec::new(),
        }
    }

    pub fn with_capacity(window: Window, edges: usize) -> Self {
        let mut pairs = FxHashSet::default();
        pairs.reserve(edges);
        PairedGraph {
            window,
            edges: Vec::with_capacity(edges),
            pairs,
            dangling: Vec::new(),
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dangling(&self) -> &[DanglingStub] {
        &self.dangling
    }

    /// Records the edge `{u, v}`. Self-loops and repeated pairs are hard
    /// failures: either one means a pairing rule was broken.
    pub fn accumulate_edge(&mut self, u: i64, v: i64, provenance: Provenance) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for p in [u, v] {
            if !self.window.contains(p) {
                return Err(Error::OutsideWindow(p));
            }
        }
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        let key = ((self.window.offset(u) as u64) << 32) | self.window.offset(v) as u64;
        if !self.pairs.insert(key) {
            return Err(Error::DuplicatePair(u, v));
        }
        self.edges.push(Edge { u, v, provenance });
        Ok(())
    }

    pub fn add_dangling(&mut self, vertex: i64, provenance: Provenance) {
        debug_assert!(self.window.contains(vertex));
        self.dangling.push(DanglingStub { vertex, provenance });
    }

    /// Appends an edge without any validation. Only for fault injection in
    /// audits; generated graphs never use it.
    #[doc(hidden)]
    pub fn push_unchecked(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    /// Edges sorted by `(u, v)` then provenance.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        edges
    }

    /// Writes the sorted edge list as `u,v,provenance` CSV with a header row.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        write_edge_csv(&self.sorted_edges(), writer)
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.edges.len() * 16);
        self.write_csv(&mut out).expect("writing to memory cannot fail");
        out
    }
}

pub fn write_edge_csv<W: io::Write>(edges: &[Edge], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u", "v", "provenance"])?;
    for e in edges {
        w.write_record([e.u.to_string(), e.v.to_string(), e.provenance.token()])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses an edge list written by [`write_edge_csv`].
pub fn read_edge_csv<R: io::Read>(reader: R) -> Result<Vec<Edge>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut edges = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| {
            Error::InvalidConfig(format!("edge list row {}: bad {what}", line + 2))
        };
        let u: i64 = record.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("u"))?;
        let v: i64 = record.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("v"))?;
        let provenance: Provenance = record
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("provenance"))?;
        edges.push(Edge { u, v, provenance });
    }
    Ok(edges)
}

/// Per-vertex totals over the resolved edges of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexMetrics {
    pub vertex: i64,
    pub degree: u32,
    pub resolved: u32,
    pub dangling: u32,
    /// Sum of `|u - v|` over the resolved edges at this vertex.
    pub total_length: u64,
    pub fully_resolved: bool,
}

impl VertexMetrics {
    /// Smallest possible total length for `degree` edges in a simple graph on
    /// ℤ: one edge to each nearest neighbour, one to each second-nearest, and
    /// so on.
    pub fn length_lower_bound(degree: u32) -> u64 {
        let half = (degree / 2) as u64;
        half * (half + 1)
    }
}

pub fn vertex_metrics(graph: &PairedGraph, config: &StubConfiguration) -> Vec<VertexMetrics> {
    let window = config.window();
    let n = window.len();
    let mut resolved = vec![0u32; n];
    let mut dangling = vec![0u32; n];
    let mut length = vec![0u64; n];
    for e in graph.edges() {
        for p in [e.u, e.v] {
            let o = window.offset(p);
            resolved[o] += 1;
            length[o] += e.length();
        }
    }
    for s in graph.dangling() {
        dangling[window.offset(s.vertex)] += 1;
    }
    (0..n)
        .map(|o| VertexMetrics {
            vertex: window.position(o),
            degree: config.degrees()[o],
            resolved: resolved[o],
            dangling: dangling[o],
            total_length: length[o],
            fully_resolved: dangling[o] == 0,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityAudit {
    pub self_loops: u64,
    pub multi_edges: u64,
}

/// Recounts self-loops and repeated pairs straight from the edge list,
/// independently of the pair index used during construction.
pub fn simplicity_audit(edges: &[Edge]) -> SimplicityAudit {
    let self_loops = edges.iter().filter(|e| e.u == e.v).count() as u64;
    let mut pairs: Vec<(i64, i64)> = edges
        .iter()
        .filter(|e| e.u != e.v)
        .map(|e| (e.u.min(e.v), e.u.max(e.v)))
        .collect();
    pairs.sort_unstable();
    let multi_edges = pairs.windows(2).filter(|w| w[0] == w[1]).count() as u64;
    SimplicityAudit {
        self_loops,
        multi_edges,
    }
}
