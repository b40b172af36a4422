//! The cluster model on geometric degrees: the truncation level is chosen
//! automatically, every invariant is audited, and the finite mean is checked
//! for stability across half-samples.
//!
//!     cargo run --release --example cluster_model

use stubline::analysis::{estimate, EstimateParams, Model};

fn main() -> stubline::Result<()> {
    let mut params = EstimateParams::new(Model::Cluster, "geom:0.5".parse()?, 1_000_000);
    params.replicates = 4;
    params.seed = 3;
    let report = estimate(&params)?;

    println!("d = {:?}, mu_d = {:?}", report.d, report.mu_d);
    println!("mean T = {:.3} ± {:.3}", report.mean_t.mean, report.mean_t.se.unwrap_or(0.0));
    if let Some(s) = report.stability {
        println!("half-sample means {:.3} / {:.3}", s.half_means.0, s.half_means.1);
    }
    if let Some(c) = &report.clusters {
        println!(
            "{} clusters, mean size {:.3}, size-biased {:.3}, claimed fraction {:.4}, {} at the boundary",
            c.clusters,
            c.mean_size.unwrap_or(0.0),
            c.size_biased_mean.unwrap_or(0.0),
            c.claimed_fraction,
            c.boundary_uncertain
        );
        for (s, p) in c.tail.iter().take(8) {
            println!("  P(|C| >= {s}) = {p:.4}");
        }
    }
    for (name, count) in report.invariant_violations.entries() {
        println!("  {name}: {count}");
    }
    Ok(())
}
