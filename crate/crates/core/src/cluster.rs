//! The cluster model.
//!
//! Degrees are truncated at an even level `d`. Stubs above `d` are *bad*, and
//! a vertex carrying bad stubs is *high*. A vertex `i` is (α-)claimed when
//! some symmetric interval `[i - m, i + m]`, `m >= 1`, holds at least `α·m`
//! bad stubs. Maximal runs of claimed vertices form clusters, and a cluster
//! always has fewer bad stubs than vertices. Pairing then runs in three
//! steps:
//!
//! 1. inside each cluster, neighbouring high vertices are joined with one bad
//!    stub each (i), and the remaining bad stubs go to distinct, uniformly
//!    chosen low vertices of the cluster (ii);
//! 2. the `d` good stubs of each high vertex are joined to the high vertices
//!    2 to `d/2 + 1` places away along the high-vertex sequence, on both sides;
//! 3. whatever is left at low vertices is paired by the coin-toss model.
//!
//! Window handling: interval sums are clipped to the window, which can only
//! undercount bad stubs, so every claim found in the window also holds on the
//! whole line. Clusters whose extent may depend on unseen vertices are
//! flagged `boundary_uncertain`; they are still paired but excluded from
//! measurement.

use rand::seq::{index, SliceRandom};

use crate::ct::{self, CtTag};
use crate::distributions::TruncationChoice;
use crate::error::{Error, Result};
use crate::model::{PairedGraph, Provenance, StubConfiguration, Window};
use crate::seed::{domain, StreamKey};

/// Bad-stub counts `D_i^d = max(D_i - d, 0)` over a window.
#[derive(Clone, Debug)]
pub struct BadStubField {
    d: u32,
    window: Window,
    tails: Vec<u32>,
}

impl BadStubField {
    pub fn new(config: &StubConfiguration, d: u32) -> Self {
        let tails = config.degrees().iter().map(|&k| k.saturating_sub(d)).collect();
        BadStubField {
            d,
            window: *config.window(),
            tails,
        }
    }

    /// Builds a field straight from tail counts.
    pub fn from_tails(window: Window, d: u32, tails: Vec<u32>) -> Result<Self> {
        if tails.len() != window.len() {
            return Err(Error::DegreeCount {
                expected: window.len(),
                got: tails.len(),
            });
        }
        Ok(BadStubField { d, window, tails })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Tails indexed by window offset.
    pub fn tails(&self) -> &[u32] {
        &self.tails
    }

    pub fn tail(&self, pos: i64) -> u32 {
        self.tails[self.window.offset(pos)]
    }

    pub fn is_high(&self, pos: i64) -> bool {
        self.tail(pos) > 0
    }

    pub fn high_positions(&self) -> Vec<i64> {
        self.tails
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > 0)
            .map(|(o, _)| self.window.position(o))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub lo: i64,
    pub hi: i64,
    /// `b(C)`.
    pub bad_stubs: u64,
    /// `h(C)`.
    pub high_count: u32,
    pub boundary_uncertain: bool,
}

impl Cluster {
    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pos: i64) -> bool {
        self.lo <= pos && pos <= self.hi
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

#[derive(Clone, Debug)]
pub struct ClusterPartition {
    alpha: f64,
    window: Window,
    claimed: Vec<bool>,
    clusters: Vec<Cluster>,
}

impl ClusterPartition {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Claimed flags indexed by window offset.
    pub fn claimed(&self) -> &[bool] {
        &self.claimed
    }

    pub fn is_claimed(&self, pos: i64) -> bool {
        self.claimed[self.window.offset(pos)]
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Index of the cluster containing `pos`.
    pub fn cluster_index(&self, pos: i64) -> Option<usize> {
        let i = self.clusters.partition_point(|c| c.hi < pos);
        self.clusters.get(i).filter(|c| c.contains(pos)).map(|_| i)
    }

    pub fn claimed_count(&self) -> usize {
        self.claimed.iter().filter(|&&c| c).count()
    }
}

/// Marks every α-claimed vertex and extracts the clusters.
///
/// A vertex at offset `c` is claimed when a radius `m >= 1` exists with
/// `b([c - m, c + m] ∩ window) >= α·m`. Radii are only scanned up to the
/// larger of the two one-sided reaches
/// `max{L : b([c, c + L] ∩ window) >= α·L/2}` (and its mirror), which any
/// successful radius must respect; the reaches come from binary searches over
/// running extrema of `prefix(k) - α·k/2`.
pub fn claimed_set(field: &BadStubField, alpha: f64) -> ClusterPartition {
    assert!(alpha > 0.0 && alpha.is_finite(), "alpha must be positive");
    let window = *field.window();
    let tails = field.tails();
    let n = tails.len();
    let mut prefix = vec![0u64; n + 1];
    for (k, &t) in tails.iter().enumerate() {
        prefix[k + 1] = prefix[k] + t as u64;
    }
    let half = alpha / 2.0;
    let h: Vec<f64> = (0..=n).map(|k| prefix[k] as f64 - half * k as f64).collect();
    let mut suffix_max = h.clone();
    for k in (0..n).rev() {
        suffix_max[k] = suffix_max[k].max(suffix_max[k + 1]);
    }
    let mut prefix_min = h.clone();
    for k in 1..=n {
        prefix_min[k] = prefix_min[k].min(prefix_min[k - 1]);
    }
    // absorbs rounding in h; a too-large reach only costs extra scanning
    let slack = 1e-9 * (1.0 + n as f64 + prefix[n] as f64);
    let clipped = |a: isize, b: isize| -> u64 {
        let a = a.max(0) as usize;
        let b = (b as usize).min(n - 1);
        prefix[b + 1] - prefix[a]
    };
    let beyond = |total: u64| -> usize { ((2.0 * total as f64 / alpha) + slack).min(n as f64 * 2.0) as usize };

    let mut claimed = vec![false; n];
    let mut capped = vec![false; n];
    for c in 0..n {
        let mut right = 0usize;
        let threshold = h[c] - half - slack;
        if c + 2 <= n && suffix_max[c + 2] >= threshold {
            let (mut lo, mut hi) = (c + 2, n);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if suffix_max[mid] >= threshold {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            right = lo - c - 1;
        }
        let far_right = beyond(prefix[n] - prefix[c]);
        if far_right > n - 1 - c {
            right = right.max(far_right);
        }

        let mut left = 0usize;
        let threshold = h[c + 1] + half + slack;
        if c >= 1 && prefix_min[c - 1] <= threshold {
            let (mut lo, mut hi) = (0usize, c - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if prefix_min[mid] <= threshold {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            left = c - lo;
        }
        let far_left = beyond(prefix[c + 1]);
        if far_left > c {
            left = left.max(far_left);
        }

        let reach = left.max(right);
        // beyond the farther edge the clipped sum stops growing
        let scan = reach.min(c.max(n - 1 - c));
        let ci = c as isize;
        claimed[c] = (1..=scan).any(|m| {
            let m = m as isize;
            clipped(ci - m, ci + m) as f64 >= alpha * m as f64
        });
        capped[c] = !claimed[c] && reach >= c.min(n - 1 - c);
    }

    let margin = window.margin() as usize;
    let mut clusters = Vec::new();
    let mut o = 0;
    while o < n {
        if !claimed[o] {
            o += 1;
            continue;
        }
        let start = o;
        while o < n && claimed[o] {
            o += 1;
        }
        let end = o - 1;
        let high_count = tails[start..=end].iter().filter(|&&t| t > 0).count() as u32;
        let boundary_uncertain = start == 0
            || end == n - 1
            || start < margin
            || end + margin > n - 1
            || capped[start - 1]
            || capped[end + 1];
        clusters.push(Cluster {
            lo: window.position(start),
            hi: window.position(end),
            bad_stubs: prefix[end + 1] - prefix[start],
            high_count,
            boundary_uncertain,
        });
    }

    ClusterPartition {
        alpha,
        window,
        claimed,
        clusters,
    }
}

/// Step 1(i): joins neighbouring high vertices of the cluster pairwise with
/// one bad stub each. With an odd count a fair coin leaves out either the
/// last or the first high vertex. Returns the unused bad stubs per high
/// vertex, in position order.
pub fn pair_high_pairs(
    cluster: &Cluster,
    field: &BadStubField,
    key: StreamKey,
    graph: &mut PairedGraph,
) -> Result<Vec<(i64, u32)>> {
    let mut remaining: Vec<(i64, u32)> = cluster
        .positions()
        .filter_map(|p| Some((p, field.tail(p))).filter(|&(_, t)| t > 0))
        .collect();
    let h = remaining.len();
    let skip_first = h % 2 == 1 && !key.derive(domain::HIGH_PAIRS, 0).coin();
    let start = usize::from(skip_first);
    let pairs = h / 2;
    for p in 0..pairs {
        let (a, b) = (start + 2 * p, start + 2 * p + 1);
        graph.accumulate_edge(remaining[a].0, remaining[b].0, Provenance::Cluster1i)?;
        remaining[a].1 -= 1;
        remaining[b].1 -= 1;
    }
    Ok(remaining)
}

/// Step 1(ii): takes one stub from each of a uniformly random set of
/// `b_r(C)` low vertices of the cluster and matches them to the remaining
/// bad stubs by a uniformly random bijection. Returns the debited low
/// vertices in ascending order.
///
/// Too few low vertices is an error for a cluster that is not
/// `boundary_uncertain`. For a cluster cut by the window edge the surplus bad
/// stubs are left dangling.
pub fn pair_bad_to_low(
    cluster: &Cluster,
    field: &BadStubField,
    remaining: &[(i64, u32)],
    config: &StubConfiguration,
    key: StreamKey,
    graph: &mut PairedGraph,
) -> Result<Vec<i64>> {
    let mut bad: Vec<i64> = remaining
        .iter()
        .flat_map(|&(p, r)| std::iter::repeat_n(p, r as usize))
        .collect();
    if bad.is_empty() {
        return Ok(Vec::new());
    }
    let lows: Vec<i64> = cluster.positions().filter(|&p| !field.is_high(p)).collect();
    if bad.len() > lows.len() && !cluster.boundary_uncertain {
        return Err(Error::LemmaViolation {
            lo: cluster.lo,
            hi: cluster.hi,
            bad: bad.len() as u64,
            low: lows.len() as u64,
        });
    }
    let mut rng = key.derive(domain::BAD_TO_LOW, 0).rng();
    let matched = bad.len().min(lows.len());
    let mut chosen: Vec<i64> = index::sample(&mut rng, lows.len(), matched)
        .into_iter()
        .map(|i| lows[i])
        .collect();
    chosen.sort_unstable();
    bad.shuffle(&mut rng);
    for (&low, &high) in chosen.iter().zip(&bad) {
        if config.degree(low) == 0 {
            return Err(Error::NotZeroStripped);
        }
        graph.accumulate_edge(high, low, Provenance::Cluster1ii)?;
    }
    // a truncated cluster at the window edge may lack lows; its partners lie outside
    for &high in &bad[matched..] {
        graph.add_dangling(high, Provenance::Cluster1ii);
    }
    Ok(chosen)
}

/// Step 2: high vertex `k` of the ordered sequence is joined to the high
/// vertices at ordinals `k ± 2, ..., k ± (d/2 + 1)`. Immediate neighbours are
/// skipped since step 1(i) may already join them. Partners beyond the
/// sequence leave dangling good stubs.
pub fn pair_high_good(highs: &[i64], d: u32, graph: &mut PairedGraph) -> Result<()> {
    debug_assert!(d.is_multiple_of(2));
    let reach = d as usize / 2 + 1;
    for (k, &pos) in highs.iter().enumerate() {
        for offset in 2..=reach {
            match highs.get(k + offset) {
                Some(&partner) => graph.accumulate_edge(pos, partner, Provenance::Cluster2)?,
                None => graph.add_dangling(pos, Provenance::Cluster2),
            }
            if k < offset {
                graph.add_dangling(pos, Provenance::Cluster2);
            }
        }
    }
    Ok(())
}

/// Everything produced by one cluster-model run.
#[derive(Clone, Debug)]
pub struct ClusterRun {
    pub graph: PairedGraph,
    pub field: BadStubField,
    pub partition: ClusterPartition,
    /// Stubs left for the coin-toss step: `D_i` minus step-1(ii) debits at
    /// low vertices, 0 at high vertices.
    pub residual: StubConfiguration,
}

/// Key of the coin-toss pass inside [`run_cluster`].
pub fn residual_ct_key(key: StreamKey) -> StreamKey {
    key.derive(domain::RESIDUAL_CT, 0)
}

pub fn run_cluster(
    config: &StubConfiguration,
    choice: &TruncationChoice,
    key: StreamKey,
) -> Result<ClusterRun> {
    if !config.zero_stripped() {
        return Err(Error::NotZeroStripped);
    }
    if choice.d < 2 || !choice.d.is_multiple_of(2) {
        return Err(Error::InvalidTruncation(choice.d));
    }
    if !(choice.alpha > 0.0 && choice.alpha <= 1.0) {
        return Err(Error::InvalidAlpha(choice.alpha));
    }
    let window = *config.window();
    let field = BadStubField::new(config, choice.d);
    let partition = claimed_set(&field, choice.alpha);
    let mut graph = PairedGraph::with_capacity(window, config.total_stubs() as usize / 2);

    let mut residual: Vec<u32> = config.degrees().to_vec();
    for cluster in partition.clusters().iter().filter(|c| c.high_count > 0) {
        let cluster_key = key.derive_signed(domain::CLUSTER, cluster.lo);
        let remaining = pair_high_pairs(cluster, &field, cluster_key, &mut graph)?;
        let debited =
            pair_bad_to_low(cluster, &field, &remaining, config, cluster_key, &mut graph)?;
        for low in debited {
            residual[window.offset(low)] -= 1;
        }
    }

    let highs = field.high_positions();
    pair_high_good(&highs, choice.d, &mut graph)?;

    for &h in &highs {
        residual[window.offset(h)] = 0;
    }
    let residual = StubConfiguration::new(window, residual)?;
    ct::run_ct_into(&residual, residual_ct_key(key), &mut graph, CtTag::Residual)?;

    Ok(ClusterRun {
        graph,
        field,
        partition,
        residual,
    })
}
