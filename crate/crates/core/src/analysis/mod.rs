//! Monte-Carlo estimation over independent replicates.
//!
//! Each replicate samples a fresh configuration on the window, pairs it with
//! the chosen model, audits the result and measures vertices of the interior
//! region (the window minus its margin). Replicates are independent, so
//! standard errors are taken over replicate-level means; vertices inside one
//! window share pairings and are not independent.

pub mod audit;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cluster::{run_cluster, ClusterPartition, ClusterRun};
use crate::ct::run_ct;
use crate::distributions::{sample_configuration, select_d, strip_zeros, DegreeDistribution, TruncationChoice};
use crate::error::{Error, Result};
use crate::model::{vertex_metrics, PairedGraph, StubConfiguration, Window};
use crate::seed::{domain, StreamKey};

use audit::{audit_graph, AuditTarget, Violations};
use stats::mean_and_se;

/// Current version of the report layout.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ct,
    Cluster,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Ct => "ct",
            Model::Cluster => "cluster",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ct" => Ok(Model::Ct),
            "cluster" => Ok(Model::Cluster),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// How the truncation level of the cluster model is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Auto,
    Fixed(u32),
}

/// Inputs of [`estimate`].
#[derive(Clone, Debug)]
pub struct EstimateParams {
    pub model: Model,
    pub dist: DegreeDistribution,
    /// Window length; the window is `[0, n - 1]`.
    pub n: usize,
    /// `None` picks a margin from the model and distribution.
    pub margin: Option<u64>,
    pub truncation: Truncation,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Number of coin-toss levels measured individually. `None` uses the
    /// largest degree for bounded support and no levels otherwise.
    pub probe_levels: Option<u32>,
    /// Worker threads; results do not depend on it.
    pub workers: usize,
    /// Attach a SHA-256 digest of each replicate's sorted edge list.
    pub edge_digests: bool,
}

impl EstimateParams {
    pub fn new(model: Model, dist: DegreeDistribution, n: usize) -> Self {
        EstimateParams {
            model,
            dist,
            n,
            margin: None,
            truncation: Truncation::Auto,
            alpha: 1.0,
            replicates: 1,
            seed: 0,
            probe_levels: None,
            workers: 1,
            edge_digests: false,
        }
    }

    /// Resolves margin, truncation and probe depth.
    pub fn plan(&self) -> Result<Plan> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        let choice = match self.model {
            Model::Ct => None,
            Model::Cluster => Some(match self.truncation {
                Truncation::Auto => select_d(&self.dist, self.alpha)?,
                Truncation::Fixed(d) => TruncationChoice::explicit(&self.dist, d, self.alpha)?,
            }),
        };
        if choice.is_some() && !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        let probe_levels = match self.model {
            Model::Cluster => 0,
            Model::Ct => self.probe_levels.unwrap_or(self.dist.max_support().unwrap_or(0)),
        };
        let margin = match self.margin {
            Some(m) => m,
            None => auto_margin(self.model, &self.dist, choice.as_ref(), probe_levels, self.n),
        };
        let window = Window::with_len(self.n, margin)?;
        Ok(Plan {
            model: self.model,
            dist: self.dist.clone(),
            window,
            choice,
            probe_levels,
            seed: StreamKey::new(self.seed),
            edge_digests: self.edge_digests,
        })
    }
}

/// Default margin: `64(d + 1)` for the cluster model, `16u` for bounded
/// coin-toss runs, and sixteen expected level-`L` skips for the deepest probed
/// level otherwise. Never more than a quarter of the window.
pub fn auto_margin(
    model: Model,
    dist: &DegreeDistribution,
    choice: Option<&TruncationChoice>,
    probe_levels: u32,
    n: usize,
) -> u64 {
    let raw = match (model, choice) {
        (Model::Cluster, Some(c)) => 64 * (c.d as u64 + 1),
        _ => match dist.max_support() {
            Some(u) => 16 * u as u64,
            None => {
                let level = probe_levels.max(1);
                let survival = dist.survival(level);
                if survival > 0.0 {
                    (16.0 * ((2 * level - 1) as f64 / survival).ceil()).min(u64::MAX as f64 / 2.0) as u64
                } else {
                    16
                }
            }
        },
    };
    raw.min(n as u64 / 4)
}

/// Fully resolved parameters of an estimate.
#[derive(Clone, Debug)]
pub struct Plan {
    pub model: Model,
    pub dist: DegreeDistribution,
    pub window: Window,
    pub choice: Option<TruncationChoice>,
    pub probe_levels: u32,
    pub seed: StreamKey,
    pub edge_digests: bool,
}

/// Output of one pairing run.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Pairing {
    Ct(PairedGraph),
    Cluster(ClusterRun),
}

impl Pairing {
    pub fn graph(&self) -> &PairedGraph {
        match self {
            Pairing::Ct(g) => g,
            Pairing::Cluster(run) => &run.graph,
        }
    }

    pub fn partition(&self) -> Option<&ClusterPartition> {
        match self {
            Pairing::Ct(_) => None,
            Pairing::Cluster(run) => Some(&run.partition),
        }
    }

    pub fn audit_target(&self) -> AuditTarget<'_> {
        match self {
            Pairing::Ct(_) => AuditTarget::Ct,
            Pairing::Cluster(run) => AuditTarget::Cluster(run),
        }
    }
}

/// One replicate worth of pairing output.
#[derive(Clone, Debug)]
pub struct Replicate {
    /// The configuration that was paired (zero-stripped for the cluster model).
    pub config: StubConfiguration,
    pub pairing: Pairing,
    pub violations: Violations,
}

impl Replicate {
    pub fn graph(&self) -> &PairedGraph {
        self.pairing.graph()
    }
}

impl Plan {
    pub fn replicate_key(&self, r: usize) -> StreamKey {
        self.seed.derive(domain::REPLICATE, r as u64)
    }

    /// Samples and pairs replicate `r`, auditing the result.
    pub fn run_replicate(&self, r: usize) -> Result<Replicate> {
        let key = self.replicate_key(r);
        let config = sample_configuration(&self.dist, &self.window, key);
        let pairing_key = key.derive(domain::PAIRING, 0);
        let (config, pairing) = match (self.model, &self.choice) {
            (Model::Cluster, Some(choice)) => {
                let config = strip_zeros(&config)?;
                let run = run_cluster(&config, choice, pairing_key)?;
                (config, Pairing::Cluster(run))
            }
            _ => {
                let graph = run_ct(&config, pairing_key)?;
                (config, Pairing::Ct(graph))
            }
        };
        let violations = audit_graph(pairing.graph(), &config, pairing.audit_target());
        Ok(Replicate {
            config,
            pairing,
            violations,
        })
    }

    fn measure(&self, rep: &Replicate) -> Tally {
        let window = rep.config.window();
        let metrics = vertex_metrics(rep.graph(), &rep.config);
        let excluded: Vec<bool> = match rep.pairing.partition() {
            Some(p) => {
                let mut ex = vec![false; window.len()];
                for c in p.clusters().iter().filter(|c| c.boundary_uncertain) {
                    for pos in c.positions() {
                        ex[window.offset(pos)] = true;
                    }
                }
                ex
            }
            None => Vec::new(),
        };
        let mut tally = Tally {
            violations: rep.violations,
            dangling: rep.graph().dangling().len() as u64,
            ..Tally::default()
        };
        for (o, m) in metrics.iter().enumerate() {
            if !window.in_measurement(m.vertex) {
                continue;
            }
            if excluded.get(o).copied().unwrap_or(false) {
                tally.boundary_excluded += 1;
            } else if m.fully_resolved {
                tally.t_sum += m.total_length;
                tally.t_count += 1;
            } else {
                tally.margin_discards += 1;
            }
        }
        if self.probe_levels > 0 {
            let (levels, truncated) = level_tallies(rep.graph(), &rep.config, self.probe_levels);
            tally.levels = levels;
            tally.truncated = truncated;
        }
        if let Some(p) = rep.pairing.partition() {
            tally.clusters = Some(ClusterTally::from_partition(p));
        }
        if self.edge_digests {
            tally.digest = Some(hex::encode(Sha256::digest(rep.graph().to_csv_bytes())));
        }
        tally
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    t_sum: u64,
    t_count: u64,
    levels: Vec<SumCount>,
    truncated: Vec<SumCount>,
    clusters: Option<ClusterTally>,
    violations: Violations,
    dangling: u64,
    margin_discards: u64,
    boundary_excluded: u64,
    digest: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SumCount {
    pub sum: u64,
    pub count: u64,
}

impl SumCount {
    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum as f64 / self.count as f64)
    }
}

/// Per-level and truncated-sum tallies of a coin-toss graph over the
/// measurement region, for levels `1..=levels`.
///
/// Level `j` counts each measured vertex with a resolved level-`j` stub.
/// The truncated sum at `L` counts each measured vertex whose stubs at levels
/// up to `L` are all resolved, including vertices of degree below `L`.
pub fn level_tallies(
    graph: &PairedGraph,
    config: &StubConfiguration,
    levels: u32,
) -> (Vec<SumCount>, Vec<SumCount>) {
    let window = config.window();
    let n = window.len();
    let levels = levels as usize;
    let mut lowest_open = vec![u32::MAX; n];
    for s in graph.dangling() {
        if let Some(j) = s.provenance.ct_level() {
            let o = window.offset(s.vertex);
            lowest_open[o] = lowest_open[o].min(j);
        }
    }
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); levels];
    for (i, e) in graph.edges().iter().enumerate() {
        if let Some(j) = e.provenance.ct_level() {
            if (j as usize) <= levels {
                by_level[j as usize - 1].push(i);
            }
        }
    }
    let edges = graph.edges();
    let measured: Vec<usize> = (0..n).filter(|&o| window.in_measurement(window.position(o))).collect();
    let mut per_level = vec![SumCount::default(); levels];
    let mut truncated = vec![SumCount::default(); levels];
    let mut acc = vec![0u64; n];
    for j in 0..levels {
        for &i in &by_level[j] {
            let e = &edges[i];
            for p in [e.u, e.v] {
                let o = window.offset(p);
                acc[o] += e.length();
                if window.in_measurement(p) {
                    per_level[j].sum += e.length();
                    per_level[j].count += 1;
                }
            }
        }
        let level = j as u32 + 1;
        for &o in &measured {
            if lowest_open[o] > level {
                truncated[j].sum += acc[o];
                truncated[j].count += 1;
            }
        }
    }
    (per_level, truncated)
}

#[derive(Clone, Debug, Default)]
struct ClusterTally {
    /// Sizes of clusters not flagged `boundary_uncertain`.
    sizes: Vec<u64>,
    uncertain: u64,
    measured: u64,
    claimed_measured: u64,
    origin_sum: u64,
}

impl ClusterTally {
    fn from_partition(p: &ClusterPartition) -> Self {
        let window = p.window();
        let mut t = ClusterTally::default();
        for c in p.clusters() {
            if c.boundary_uncertain {
                t.uncertain += 1;
            } else {
                t.sizes.push(c.len());
            }
        }
        let (a, b) = window.measurement();
        t.measured = window.measurement_len() as u64;
        for c in p.clusters() {
            let overlap = (c.hi.min(b) - c.lo.max(a) + 1).max(0) as u64;
            t.claimed_measured += overlap;
            t.origin_sum += overlap * c.len();
        }
        t
    }
}

/// Size statistics of claimed clusters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterSizeStats {
    /// Clusters counted (those not flagged `boundary_uncertain`).
    pub clusters: u64,
    /// Mean size of a uniformly chosen cluster.
    pub mean_size: Option<f64>,
    /// Mean size of the cluster of a uniformly chosen claimed vertex.
    pub size_biased_mean: Option<f64>,
    /// Mean of `|C(v)|` over all measured vertices, counting 0 for unclaimed
    /// ones. Cluster extents are as seen in the window, so under a coupled
    /// seed this is monotone in `d` and `alpha`.
    pub origin_mean: f64,
    /// Fraction of measured vertices that are claimed.
    pub claimed_fraction: f64,
    /// `(size, count)` pairs in increasing size.
    pub histogram: Vec<(u64, u64)>,
    /// `(s, P(|C| >= s))` for each observed size.
    pub tail: Vec<(u64, f64)>,
    pub boundary_uncertain: u64,
}

/// Pools cluster statistics over partitions.
pub fn cluster_size_stats(partitions: &[&ClusterPartition]) -> ClusterSizeStats {
    let tallies: Vec<ClusterTally> = partitions.iter().map(|p| ClusterTally::from_partition(p)).collect();
    pool_clusters(tallies.iter())
}

fn pool_clusters<'a>(tallies: impl Iterator<Item = &'a ClusterTally>) -> ClusterSizeStats {
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    let (mut uncertain, mut measured, mut claimed, mut origin) = (0, 0, 0, 0);
    for t in tallies {
        for &s in &t.sizes {
            *hist.entry(s).or_default() += 1;
        }
        uncertain += t.uncertain;
        measured += t.measured;
        claimed += t.claimed_measured;
        origin += t.origin_sum;
    }
    let clusters: u64 = hist.values().sum();
    let total_size: u64 = hist.iter().map(|(s, c)| s * c).sum();
    let total_sq: u64 = hist.iter().map(|(s, c)| s * s * c).sum();
    let mut tail = Vec::with_capacity(hist.len());
    let mut at_least = clusters;
    for (&s, &c) in &hist {
        tail.push((s, at_least as f64 / clusters as f64));
        at_least -= c;
    }
    ClusterSizeStats {
        clusters,
        mean_size: (clusters > 0).then(|| total_size as f64 / clusters as f64),
        size_biased_mean: (total_size > 0).then(|| total_sq as f64 / total_size as f64),
        origin_mean: if measured > 0 { origin as f64 / measured as f64 } else { 0.0 },
        claimed_fraction: if measured > 0 { claimed as f64 / measured as f64 } else { 0.0 },
        histogram: hist.into_iter().collect(),
        tail,
        boundary_uncertain: uncertain,
    }
}

/// A mean with its replicate-level standard error and, where a closed form
/// exists, the predicted value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: Option<f64>,
    pub predicted: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelRecord {
    pub j: u32,
    /// Mean `K_j` over measured vertices with `D >= j`.
    pub mean_k: f64,
    pub se: Option<f64>,
    pub count: u64,
    /// `(2j - 1) / P(D >= j)`.
    pub predicted: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedRecord {
    pub l: u32,
    /// Mean of `Σ_{j <= L} K_j` over measured vertices.
    pub mean: f64,
    pub se: Option<f64>,
    pub count: u64,
    /// `Σ (2j - 1)` over levels `j <= L` with `P(D >= j) > 0`.
    pub predicted: f64,
}

/// Agreement checks for quantities without a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stability {
    /// Mean `T` over the first and second half of the replicates.
    pub half_means: (f64, f64),
    /// `|a - b| / ((a + b) / 2)` for the half means.
    pub mean_t_rel_diff: f64,
    /// Mean cluster size over the first half of the replicates and over all.
    pub cluster_size_half_and_full: Option<(f64, f64)>,
    pub cluster_size_rel_diff: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub dangling_stubs: u64,
    /// Measured vertices left out because a stub is dangling.
    pub margin_discards: u64,
    /// Measured vertices left out because their cluster is boundary-uncertain.
    pub boundary_excluded: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub schema: u32,
    pub model: Model,
    pub dist: String,
    pub n: usize,
    pub margin: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    /// Fully resolved measured vertices, summed over replicates.
    pub sample_size: u64,
    pub mean_t: Estimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<Stability>,
    pub per_level: Vec<LevelRecord>,
    pub truncated_sums: Vec<TruncatedRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<ClusterSizeStats>,
    pub invariant_violations: Violations,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_digests: Option<Vec<String>>,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.invariant_violations.total() == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs all replicates and assembles the report.
pub fn estimate(params: &EstimateParams) -> Result<SimulationReport> {
    let plan = params.plan()?;
    let tallies: Vec<Tally> = with_workers(params.workers, || {
        (0..params.replicates)
            .into_par_iter()
            .map(|r| plan.run_replicate(r).map(|rep| plan.measure(&rep)))
            .collect::<Result<Vec<_>>>()
    })??;
    build_report(params, &plan, &tallies)
}

/// Runs replicate 0 alone and returns it with its report.
pub fn generate(params: &EstimateParams) -> Result<(SimulationReport, Replicate)> {
    let mut single = params.clone();
    single.replicates = 1;
    let plan = single.plan()?;
    let rep = plan.run_replicate(0)?;
    let tally = plan.measure(&rep);
    let report = build_report(&single, &plan, std::slice::from_ref(&tally))?;
    Ok((report, rep))
}

/// Alias of [`estimate`] named after its headline quantity.
pub fn estimate_mean_t(params: &EstimateParams) -> Result<SimulationReport> {
    estimate(params)
}

fn build_report(params: &EstimateParams, plan: &Plan, tallies: &[Tally]) -> Result<SimulationReport> {
    let sample_size: u64 = tallies.iter().map(|t| t.t_count).sum();
    if tallies.iter().any(|t| t.t_count == 0) {
        return Err(Error::WindowTooSmall);
    }
    let means: Vec<f64> = tallies.iter().map(|t| t.t_sum as f64 / t.t_count as f64).collect();
    let (mean, se) = mean_and_se(&means);
    let predicted = match plan.model {
        Model::Ct => plan.dist.max_support().map(|u| (u as f64).powi(2)),
        Model::Cluster => None,
    };

    let mut per_level = Vec::new();
    let mut truncated_sums = Vec::new();
    let mut predicted_sum = 0.0;
    for j in 1..=plan.probe_levels {
        let idx = j as usize - 1;
        let survival = plan.dist.survival(j);
        if survival > 0.0 {
            predicted_sum += (2 * j - 1) as f64;
            let values: Vec<f64> = tallies.iter().filter_map(|t| t.levels[idx].mean()).collect();
            if !values.is_empty() {
                let (m, s) = mean_and_se(&values);
                per_level.push(LevelRecord {
                    j,
                    mean_k: m,
                    se: s,
                    count: tallies.iter().map(|t| t.levels[idx].count).sum(),
                    predicted: (2 * j - 1) as f64 / survival,
                });
            }
        }
        let values: Vec<f64> = tallies.iter().filter_map(|t| t.truncated[idx].mean()).collect();
        if !values.is_empty() {
            let (m, s) = mean_and_se(&values);
            truncated_sums.push(TruncatedRecord {
                l: j,
                mean: m,
                se: s,
                count: tallies.iter().map(|t| t.truncated[idx].count).sum(),
                predicted: predicted_sum,
            });
        }
    }

    let clusters = (plan.model == Model::Cluster)
        .then(|| pool_clusters(tallies.iter().filter_map(|t| t.clusters.as_ref())));

    let stability = (tallies.len() >= 2).then(|| {
        let half = tallies.len() / 2;
        let first = means[..half].iter().sum::<f64>() / half as f64;
        let second = means[half..].iter().sum::<f64>() / (means.len() - half) as f64;
        let cluster_pair = clusters.as_ref().and_then(|all| {
            let first_half = pool_clusters(tallies[..half].iter().filter_map(|t| t.clusters.as_ref()));
            Some((first_half.mean_size?, all.mean_size?))
        });
        Stability {
            half_means: (first, second),
            mean_t_rel_diff: relative_difference(first, second),
            cluster_size_half_and_full: cluster_pair,
            cluster_size_rel_diff: cluster_pair.map(|(h, f)| (h - f).abs() / f),
        }
    });

    let mut violations = Violations::default();
    let mut diagnostics = Diagnostics::default();
    for t in tallies {
        violations.merge(&t.violations);
        diagnostics.dangling_stubs += t.dangling;
        diagnostics.margin_discards += t.margin_discards;
        diagnostics.boundary_excluded += t.boundary_excluded;
    }
    let edge_digests = plan
        .edge_digests
        .then(|| tallies.iter().map(|t| t.digest.clone().unwrap_or_default()).collect());

    Ok(SimulationReport {
        schema: REPORT_SCHEMA,
        model: plan.model,
        dist: plan.dist.to_string(),
        n: params.n,
        margin: plan.window.margin(),
        d: plan.choice.map(|c| c.d),
        mu_d: plan.choice.and_then(|c| c.mu_d),
        alpha: plan.choice.map(|c| c.alpha),
        replicates: params.replicates,
        seed: params.seed,
        sample_size,
        mean_t: Estimate { mean, se, predicted },
        stability,
        per_level,
        truncated_sums,
        clusters,
        invariant_violations: violations,
        diagnostics,
        edge_digests,
    })
}

fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = (a + b) / 2.0;
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Per-level records pooled over coin-toss graphs. Levels with
/// `P(D >= j) = 0` get no record.
pub fn per_level_lengths(
    runs: &[(PairedGraph, StubConfiguration)],
    dist: &DegreeDistribution,
    levels: u32,
) -> Vec<LevelRecord> {
    let tallies: Vec<Vec<SumCount>> = runs.iter().map(|(g, c)| level_tallies(g, c, levels).0).collect();
    (1..=levels)
        .filter_map(|j| {
            let survival = dist.survival(j);
            if survival <= 0.0 {
                return None;
            }
            let idx = j as usize - 1;
            let values: Vec<f64> = tallies.iter().filter_map(|t| t[idx].mean()).collect();
            if values.is_empty() {
                return None;
            }
            let (mean_k, se) = mean_and_se(&values);
            Some(LevelRecord {
                j,
                mean_k,
                se,
                count: tallies.iter().map(|t| t[idx].count).sum(),
                predicted: (2 * j - 1) as f64 / survival,
            })
        })
        .collect()
}

/// Spacing between consecutive members of one level set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapEstimate {
    pub j: u32,
    pub mean_gap: f64,
    /// Standard error treating gaps as independent, which holds for iid
    /// degrees.
    pub se: f64,
    pub gaps: u64,
}

/// Mean distance from a member of `Γ_j` to the next member, pooled over
/// configurations. `None` when no configuration has two members.
pub fn gap_statistics(configs: &[StubConfiguration], j: u32) -> Option<GapEstimate> {
    let (mut n, mut sum, mut sq) = (0u64, 0f64, 0f64);
    for config in configs {
        let window = config.window();
        let mut last: Option<i64> = None;
        for (o, &d) in config.degrees().iter().enumerate() {
            if d >= j {
                let pos = window.position(o);
                if let Some(prev) = last {
                    let g = (pos - prev) as f64;
                    n += 1;
                    sum += g;
                    sq += g * g;
                }
                last = Some(pos);
            }
        }
    }
    if n == 0 {
        return None;
    }
    let mean = sum / n as f64;
    let var = if n > 1 { (sq - n as f64 * mean * mean).max(0.0) / (n - 1) as f64 } else { 0.0 };
    Some(GapEstimate {
        j,
        mean_gap: mean,
        se: (var / n as f64).sqrt(),
        gaps: n,
    })
}

/// Truncated sums `Σ_{j <= L} K_j` for `L = 1..=max_level` under the
/// coin-toss model.
pub fn divergence_probe_ct(
    dist: &DegreeDistribution,
    max_level: u32,
    n: usize,
    replicates: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<TruncatedRecord>> {
    let mut params = EstimateParams::new(Model::Ct, dist.clone(), n);
    params.probe_levels = Some(max_level);
    params.replicates = replicates;
    params.seed = seed;
    params.workers = workers;
    Ok(estimate(&params)?.truncated_sums)
}

/// Total length `T` at fixed window positions, one row per replicate of the
/// coin-toss model. Positions whose stubs dangle in a replicate are skipped
/// for that replicate.
pub fn translation_samples(
    params: &EstimateParams,
    positions: &[i64],
) -> Result<Vec<Vec<u64>>> {
    let plan = params.plan()?;
    for &p in positions {
        if !plan.window.contains(p) {
            return Err(Error::OutsideWindow(p));
        }
    }
    let rows: Vec<Vec<Option<u64>>> = with_workers(params.workers, || {
        (0..params.replicates)
            .into_par_iter()
            .map(|r| {
                let key = plan.replicate_key(r);
                let config = sample_configuration(&plan.dist, &plan.window, key);
                let graph = run_ct(&config, key.derive(domain::PAIRING, 0))?;
                let metrics = vertex_metrics(&graph, &config);
                Ok(positions
                    .iter()
                    .map(|&p| {
                        let m = &metrics[plan.window.offset(p)];
                        m.fully_resolved.then_some(m.total_length)
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok((0..positions.len())
        .map(|i| rows.iter().filter_map(|row| row[i]).collect())
        .collect())
}
