//! The coin-toss pairing model.
//!
//! Level `j` collects one stub from every vertex of degree at least `j`
//! (the level set `Γ_j`). Along `Γ_j` the stubs alternate between pointing
//! right and pointing left, with the phase fixed by a fair coin. A
//! right-pointing stub at ordinal `k` is joined to the stub at ordinal
//! `k + 2j - 1`, which points left because `2j - 1` is odd. Nesting
//! `Γ_{j+1} ⊆ Γ_j` together with the growing skip rules out repeated pairs.
//!
//! In a finite window the coin is keyed to the leftmost member of `Γ_j`, and
//! stubs whose partner ordinal falls outside the window are left dangling.

use crate::error::{Error, Result};
use crate::model::{PairedGraph, Provenance, StubConfiguration};
use crate::seed::{domain, StreamKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSet {
    pub level: u32,
    /// Positions with `D_i >= level`, ascending.
    pub members: Vec<i64>,
}

/// Direction of the member at even ordinals of `Γ_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    EvenRight,
    EvenLeft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelOrientation {
    pub level: u32,
    pub phase: Phase,
}

impl LevelOrientation {
    #[inline]
    pub fn points_right(&self, ordinal: usize) -> bool {
        ordinal.is_multiple_of(2) == (self.phase == Phase::EvenRight)
    }
}

/// Tags edges produced by a CT pass, which is also reused for the last step
/// of the cluster model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtTag {
    Plain,
    Residual,
}

impl CtTag {
    fn provenance(self, level: u32) -> Provenance {
        match self {
            CtTag::Plain => Provenance::CtLevel(level),
            CtTag::Residual => Provenance::Cluster3Level(level),
        }
    }
}

/// `Γ_1, Γ_2, ...` up to the largest degree in the window.
pub fn level_sets(config: &StubConfiguration) -> Vec<LevelSet> {
    let max = config.max_degree() as usize;
    let mut counts = vec![0usize; max + 1];
    for &d in config.degrees() {
        counts[d as usize] += 1;
    }
    // |Γ_j| = Σ_{k >= j} counts[k]
    let mut sizes = vec![0usize; max + 2];
    for j in (1..=max).rev() {
        sizes[j] = sizes[j + 1] + counts[j];
    }
    let mut levels: Vec<LevelSet> = (1..=max)
        .map(|j| LevelSet {
            level: j as u32,
            members: Vec::with_capacity(sizes[j]),
        })
        .collect();
    let window = config.window();
    for (o, &d) in config.degrees().iter().enumerate() {
        let pos = window.position(o);
        for level in &mut levels[..d as usize] {
            level.members.push(pos);
        }
    }
    levels
}

/// Draws the phase of level `j` from the coin keyed on `(key, j)`.
pub fn orient_level(level: &LevelSet, key: StreamKey) -> Result<LevelOrientation> {
    if level.members.is_empty() {
        return Err(Error::EmptyLevel(level.level));
    }
    let heads = key.derive(domain::CT_LEVEL, level.level as u64).coin();
    Ok(LevelOrientation {
        level: level.level,
        phase: if heads { Phase::EvenRight } else { Phase::EvenLeft },
    })
}

/// Joins every right-pointing stub of the level to the member `2j - 1`
/// ordinals further right. Each edge is emitted once, from its right-pointing
/// end; stubs without a partner in the window are recorded as dangling.
pub fn pair_level(
    level: &LevelSet,
    orientation: LevelOrientation,
    graph: &mut PairedGraph,
    tag: CtTag,
) -> Result<()> {
    debug_assert_eq!(level.level, orientation.level);
    let members = &level.members;
    let skip = 2 * level.level as usize - 1;
    let provenance = tag.provenance(level.level);
    for (k, &pos) in members.iter().enumerate() {
        if orientation.points_right(k) {
            match members.get(k + skip) {
                Some(&partner) => {
                    assert!(
                        !orientation.points_right(k + skip),
                        "partner at odd ordinal offset must point left"
                    );
                    graph.accumulate_edge(pos, partner, provenance)?;
                }
                None => graph.add_dangling(pos, provenance),
            }
        } else if k < skip {
            graph.add_dangling(pos, provenance);
        }
    }
    Ok(())
}

/// Pairs all levels of `config` in ascending order.
pub fn run_ct(config: &StubConfiguration, key: StreamKey) -> Result<PairedGraph> {
    let mut graph = PairedGraph::with_capacity(*config.window(), config.total_stubs() as usize / 2);
    run_ct_into(config, key, &mut graph, CtTag::Plain)?;
    Ok(graph)
}

pub(crate) fn run_ct_into(
    config: &StubConfiguration,
    key: StreamKey,
    graph: &mut PairedGraph,
    tag: CtTag,
) -> Result<()> {
    for level in level_sets(config) {
        let orientation = orient_level(&level, key)?;
        pair_level(&level, orientation, graph, tag)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{vertex_metrics, Edge, Window};

    fn config(degrees: Vec<u32>) -> StubConfiguration {
        StubConfiguration::from_degrees(degrees, 0).unwrap()
    }

    #[test]
    fn level_set_examples() {
        let sets = level_sets(&config(vec![1, 2, 2]));
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].members, vec![0, 1, 2]);
        assert_eq!(sets[1].members, vec![1, 2]);
        assert!(level_sets(&config(vec![0, 0, 0])).is_empty());
        let single = StubConfiguration::new(Window::new(0, 1, 0).unwrap(), vec![3, 0]).unwrap();
        let sets = level_sets(&single);
        assert_eq!(sets.len(), 3);
        assert!(sets.iter().all(|s| s.members == vec![0]));
    }

    #[test]
    fn orientation_is_keyed_and_reproducible() {
        let level = LevelSet { level: 1, members: vec![0, 1] };
        let key = StreamKey::new(11);
        assert_eq!(orient_level(&level, key).unwrap(), orient_level(&level, key).unwrap());
        let empty = LevelSet { level: 2, members: vec![] };
        assert!(matches!(orient_level(&empty, key), Err(Error::EmptyLevel(2))));
    }

    #[test]
    fn coin_is_fair_and_levels_are_independent() {
        let l1 = LevelSet { level: 1, members: vec![0] };
        let l2 = LevelSet { level: 2, members: vec![0] };
        let seeds = 10_000u64;
        let mut even_right = 0;
        let mut agree = 0;
        for s in 0..seeds {
            let key = StreamKey::new(s);
            let a = orient_level(&l1, key).unwrap().phase;
            let b = orient_level(&l2, key).unwrap().phase;
            even_right += (a == Phase::EvenRight) as u32;
            agree += (a == b) as u32;
        }
        let se = (seeds as f64 * 0.25).sqrt();
        assert!((even_right as f64 - 5000.0).abs() < 3.0 * se);
        assert!((agree as f64 - 5000.0).abs() < 3.0 * se);
    }

    #[test]
    fn degree_one_pairs_neighbours() {
        let cfg = config(vec![1; 6]);
        let level = &level_sets(&cfg)[0];
        let mut g = PairedGraph::new(*cfg.window());
        let orientation = LevelOrientation { level: 1, phase: Phase::EvenRight };
        pair_level(level, orientation, &mut g, CtTag::Plain).unwrap();
        let pairs: Vec<(i64, i64)> = g.sorted_edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3), (4, 5)]);
        assert!(g.dangling().is_empty());

        let mut g = PairedGraph::new(*cfg.window());
        let flipped = LevelOrientation { level: 1, phase: Phase::EvenLeft };
        pair_level(level, flipped, &mut g, CtTag::Plain).unwrap();
        let pairs: Vec<(i64, i64)> = g.sorted_edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(1, 2), (3, 4)]);
        assert_eq!(g.dangling().len(), 2);
    }

    #[test]
    fn degree_two_level_two_skips_three() {
        let cfg = config(vec![2; 20]);
        let g = run_ct(&cfg, StreamKey::new(4)).unwrap();
        for e in g.edges() {
            match e.provenance {
                Provenance::CtLevel(1) => assert_eq!(e.length(), 1),
                Provenance::CtLevel(2) => assert_eq!(e.length(), 3),
                other => panic!("unexpected {other}"),
            }
        }
    }

    #[test]
    fn short_levels_dangle_entirely() {
        // Γ_3 has 4 members, fewer than 2·3 = 6
        let cfg = config(vec![3, 3, 3, 3]);
        let sets = level_sets(&cfg);
        let mut g = PairedGraph::new(*cfg.window());
        let o = orient_level(&sets[2], StreamKey::new(1)).unwrap();
        pair_level(&sets[2], o, &mut g, CtTag::Plain).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.dangling().len(), 4);
    }

    #[test]
    fn constant_degree_interior_total_is_square() {
        for c in 1..=6u32 {
            let cfg = StubConfiguration::from_degrees(vec![c; 200], 4 * c as u64).unwrap();
            let g = run_ct(&cfg, StreamKey::new(c as u64)).unwrap();
            for m in vertex_metrics(&g, &cfg) {
                if cfg.window().in_measurement(m.vertex) {
                    assert!(m.fully_resolved);
                    assert_eq!(m.total_length, (c * c) as u64, "c={c} vertex {}", m.vertex);
                }
                assert_eq!(m.resolved + m.dangling, m.degree);
            }
        }
    }

    #[test]
    fn degree_zero_vertices_are_skipped() {
        let cfg = config(vec![1, 0, 0, 1, 2, 0, 2]);
        let g = run_ct(&cfg, StreamKey::new(2)).unwrap();
        let m = vertex_metrics(&g, &cfg);
        assert_eq!(m[1].total_length, 0);
        assert!(m[1].fully_resolved);
    }

    #[test]
    fn reflection_with_flipped_phases_mirrors_edges() {
        let cfg = config(vec![1, 3, 2, 1, 1, 2, 4, 1, 2, 3, 1, 1, 2, 2, 1, 3, 1, 1]);
        let mirrored = cfg.reflected();
        let n = cfg.window().len() as i64;
        let sets = level_sets(&cfg);
        let msets = level_sets(&mirrored);
        let key = StreamKey::new(77);
        let mut g = PairedGraph::new(*cfg.window());
        let mut mg = PairedGraph::new(*cfg.window());
        for (level, mlevel) in sets.iter().zip(&msets) {
            let o = orient_level(level, key).unwrap();
            pair_level(level, o, &mut g, CtTag::Plain).unwrap();
            // the mirrored ordinal of k is len-1-k; keep each stub's direction reversed
            let len = level.members.len();
            let last_right = o.points_right(len - 1);
            let mphase = if last_right { Phase::EvenLeft } else { Phase::EvenRight };
            let mo = LevelOrientation { level: level.level, phase: mphase };
            pair_level(mlevel, mo, &mut mg, CtTag::Plain).unwrap();
        }
        let reflect = |e: &Edge| {
            let (a, b) = (n - 1 - e.v, n - 1 - e.u);
            Edge { u: a, v: b, provenance: e.provenance }
        };
        let mut expected: Vec<Edge> = g.edges().iter().map(reflect).collect();
        expected.sort_unstable();
        assert_eq!(expected, mg.sorted_edges());
    }
}
