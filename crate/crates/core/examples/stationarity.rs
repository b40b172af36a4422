//! The law of the total edge length does not depend on the vertex position:
//! a two-sample KS test between two interior positions, and the gap law of a
//! level set.
//!
//!     cargo run --release --example stationarity

use stubline::analysis::stats::ks_two_sample;
use stubline::analysis::{gap_statistics, translation_samples, EstimateParams, Model};
use stubline::distributions::sample_configuration;
use stubline::{StreamKey, Window};

fn main() -> stubline::Result<()> {
    let mut params = EstimateParams::new(Model::Ct, "cat:0.5,0.5".parse()?, 1_000);
    params.replicates = 10_000;
    params.seed = 9;
    let samples = translation_samples(&params, &[300, 700])?;
    let as_f64 = |v: &Vec<u64>| v.iter().map(|&t| t as f64).collect::<Vec<_>>();
    let ks = ks_two_sample(&as_f64(&samples[0]), &as_f64(&samples[1]));
    println!("T at 300 vs 700: KS D = {:.4}, p = {:.3}", ks.statistic, ks.p_value);

    let window = Window::with_len(200_000, 0)?;
    let config = sample_configuration(&params.dist, &window, StreamKey::new(10));
    if let Some(g) = gap_statistics(&[config], 2) {
        println!(
            "gap between degree-2 vertices: {:.4} ± {:.4} over {} gaps (1/P(D >= 2) = 2)",
            g.mean_gap, g.se, g.gaps
        );
    }
    Ok(())
}
