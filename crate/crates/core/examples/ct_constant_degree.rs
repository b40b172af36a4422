//! Coin-toss pairing of a constant-degree window. Every interior vertex ends
//! up with total edge length exactly `c²`.
//!
//!     cargo run --example ct_constant_degree -- 3

use stubline::ct::{level_sets, run_ct};
use stubline::distributions::sample_configuration;
use stubline::model::vertex_metrics;
use stubline::{DegreeDistribution, StreamKey, Window};

fn main() -> stubline::Result<()> {
    let c: u32 = std::env::args().nth(1).map_or(3, |s| s.parse().expect("degree"));
    let dist: DegreeDistribution = format!("const:{c}").parse()?;
    let window = Window::new(0, 59, 4 * c as u64)?;
    let key = StreamKey::new(1);
    let config = sample_configuration(&dist, &window, key);
    let graph = run_ct(&config, key)?;

    for level in level_sets(&config) {
        let lengths: Vec<u64> = graph
            .edges()
            .iter()
            .filter(|e| e.provenance.ct_level() == Some(level.level))
            .map(|e| e.length())
            .collect();
        println!("level {}: {} edges, lengths {:?}", level.level, lengths.len(), dedup(lengths));
    }

    let interior: Vec<u64> = vertex_metrics(&graph, &config)
        .into_iter()
        .filter(|m| window.in_measurement(m.vertex) && m.fully_resolved)
        .map(|m| m.total_length)
        .collect();
    println!(
        "{} interior vertices, total lengths {:?} (c² = {})",
        interior.len(),
        dedup(interior),
        c * c
    );
    Ok(())
}

fn dedup(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v.dedup();
    v
}
