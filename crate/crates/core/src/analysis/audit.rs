//! Invariant checks recomputed from an edge list.
//!
//! Nothing here trusts the bookkeeping done during construction: every count
//! is rebuilt from the edges, the dangling stubs and the configuration.

use serde::Serialize;

use crate::cluster::ClusterRun;
use crate::ct::level_sets;
use crate::model::{simplicity_audit, DanglingStub, Edge, PairedGraph, Provenance, StubConfiguration, VertexMetrics};

/// Violation counts. All zero for a correct run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Violations {
    pub self_loops: u64,
    pub multi_edges: u64,
    /// Vertices whose resolved plus dangling stubs differ from their degree.
    pub degree_conservation: u64,
    /// Fully resolved vertices with total length below `⌊D/2⌋(⌊D/2⌋ + 1)`.
    pub lower_bound: u64,
    /// Coin-toss edges whose endpoints are not `2j - 1` apart in `Γ_j`.
    pub ct_offset: u64,
    /// Non-boundary clusters with `b(C) > |C| - 1`.
    pub lemma: u64,
    /// Step-1 edges leaving their cluster.
    pub step1_locality: u64,
    /// Edges whose endpoint classes do not fit their construction step.
    pub class_discipline: u64,
    /// Residual degrees above `d`, or nonzero at a high vertex.
    pub residual_bound: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.self_loops
            + self.multi_edges
            + self.degree_conservation
            + self.lower_bound
            + self.ct_offset
            + self.lemma
            + self.step1_locality
            + self.class_discipline
            + self.residual_bound
    }

    pub fn merge(&mut self, other: &Violations) {
        self.self_loops += other.self_loops;
        self.multi_edges += other.multi_edges;
        self.degree_conservation += other.degree_conservation;
        self.lower_bound += other.lower_bound;
        self.ct_offset += other.ct_offset;
        self.lemma += other.lemma;
        self.step1_locality += other.step1_locality;
        self.class_discipline += other.class_discipline;
        self.residual_bound += other.residual_bound;
    }

    /// `(name, count)` pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, u64); 9] {
        [
            ("self_loops", self.self_loops),
            ("multi_edges", self.multi_edges),
            ("degree_conservation", self.degree_conservation),
            ("lower_bound", self.lower_bound),
            ("ct_offset", self.ct_offset),
            ("lemma", self.lemma),
            ("step1_locality", self.step1_locality),
            ("class_discipline", self.class_discipline),
            ("residual_bound", self.residual_bound),
        ]
    }
}

/// What produced the edges being audited.
#[derive(Clone, Copy, Debug)]
pub enum AuditTarget<'a> {
    Ct,
    Cluster(&'a ClusterRun),
}

pub fn audit_graph(graph: &PairedGraph, config: &StubConfiguration, target: AuditTarget<'_>) -> Violations {
    audit_edges(graph.edges(), graph.dangling(), config, target)
}

pub fn audit_edges(
    edges: &[Edge],
    dangling: &[DanglingStub],
    config: &StubConfiguration,
    target: AuditTarget<'_>,
) -> Violations {
    let simple = simplicity_audit(edges);
    let mut v = Violations {
        self_loops: simple.self_loops,
        multi_edges: simple.multi_edges,
        ..Violations::default()
    };
    let (conservation, lower) = degree_and_length_checks(edges, dangling, config);
    v.degree_conservation = conservation;
    v.lower_bound = lower;
    match target {
        AuditTarget::Ct => {
            v.class_discipline = edges
                .iter()
                .filter(|e| !matches!(e.provenance, Provenance::CtLevel(_)))
                .count() as u64;
            v.ct_offset = ct_offset_violations(edges, config, |p| match p {
                Provenance::CtLevel(j) => Some(j),
                _ => None,
            });
        }
        AuditTarget::Cluster(run) => {
            cluster_checks(edges, run, &mut v);
            v.ct_offset = ct_offset_violations(edges, &run.residual, |p| match p {
                Provenance::Cluster3Level(j) => Some(j),
                _ => None,
            });
        }
    }
    v
}

/// Vertices violating `T_i >= 2·Σ_{k <= ⌊D_i/2⌋} k` among fully resolved ones.
pub fn lower_bound_audit(graph: &PairedGraph, config: &StubConfiguration) -> u64 {
    degree_and_length_checks(graph.edges(), graph.dangling(), config).1
}

fn degree_and_length_checks(
    edges: &[Edge],
    dangling: &[DanglingStub],
    config: &StubConfiguration,
) -> (u64, u64) {
    let window = config.window();
    let n = window.len();
    let mut resolved = vec![0u64; n];
    let mut open = vec![0u64; n];
    let mut length = vec![0u64; n];
    let mut stray = 0u64;
    for e in edges {
        for p in [e.u, e.v] {
            if window.contains(p) {
                let o = window.offset(p);
                resolved[o] += 1;
                length[o] += e.length();
            } else {
                stray += 1;
            }
        }
    }
    for s in dangling {
        if window.contains(s.vertex) {
            open[window.offset(s.vertex)] += 1;
        } else {
            stray += 1;
        }
    }
    let mut conservation = stray;
    let mut lower = 0;
    for (o, &d) in config.degrees().iter().enumerate() {
        if resolved[o] + open[o] != d as u64 {
            conservation += 1;
        }
        if open[o] == 0 && length[o] < VertexMetrics::length_lower_bound(d) {
            lower += 1;
        }
    }
    (conservation, lower)
}

fn ct_offset_violations(
    edges: &[Edge],
    config: &StubConfiguration,
    level_of: impl Fn(Provenance) -> Option<u32>,
) -> u64 {
    let levels = level_sets(config);
    let mut bad = 0;
    for e in edges {
        let Some(j) = level_of(e.provenance) else { continue };
        let Some(level) = levels.get(j as usize - 1) else {
            bad += 1;
            continue;
        };
        let rank = |p: i64| level.members.binary_search(&p).ok();
        match (rank(e.u), rank(e.v)) {
            (Some(a), Some(b)) if a.abs_diff(b) == 2 * j as usize - 1 => {}
            _ => bad += 1,
        }
    }
    bad
}

fn cluster_checks(edges: &[Edge], run: &ClusterRun, v: &mut Violations) {
    let field = &run.field;
    let partition = &run.partition;
    let window = field.window();
    let d = field.d();

    v.lemma = partition
        .clusters()
        .iter()
        .filter(|c| !c.boundary_uncertain && c.bad_stubs + 1 > c.len())
        .count() as u64;

    let highs = field.high_positions();
    let high_rank = |p: i64| highs.binary_search(&p).ok();
    let mut low_debits = vec![0u32; window.len()];
    for e in edges {
        if !window.contains(e.u) || !window.contains(e.v) {
            v.class_discipline += 1;
            continue;
        }
        let (hu, hv) = (field.is_high(e.u), field.is_high(e.v));
        match e.provenance {
            Provenance::Cluster1i | Provenance::Cluster1ii => {
                let same = match (partition.cluster_index(e.u), partition.cluster_index(e.v)) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                };
                if !same {
                    v.step1_locality += 1;
                }
                let classes_ok = if e.provenance == Provenance::Cluster1i {
                    hu && hv
                } else {
                    hu != hv
                };
                if !classes_ok {
                    v.class_discipline += 1;
                }
                if e.provenance == Provenance::Cluster1ii && hu != hv {
                    let low = if hu { e.v } else { e.u };
                    low_debits[window.offset(low)] += 1;
                }
            }
            Provenance::Cluster2 => {
                let ok = match (high_rank(e.u), high_rank(e.v)) {
                    (Some(a), Some(b)) => (2..=d as usize / 2 + 1).contains(&a.abs_diff(b)),
                    _ => false,
                };
                if !ok {
                    v.class_discipline += 1;
                }
            }
            Provenance::Cluster3Level(_) => {
                if hu || hv {
                    v.class_discipline += 1;
                }
            }
            Provenance::CtLevel(_) => v.class_discipline += 1,
        }
    }
    // each low vertex gives at most one stub to bad stubs
    v.class_discipline += low_debits.iter().filter(|&&k| k > 1).count() as u64;

    for (o, &r) in run.residual.degrees().iter().enumerate() {
        if r > d || (field.tails()[o] > 0 && r != 0) {
            v.residual_bound += 1;
        }
    }
}
