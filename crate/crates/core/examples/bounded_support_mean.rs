//! Mean total edge length under the coin-toss model for degrees 1 or 2 with
//! equal probability, compared with the square of the largest degree, plus
//! the per-level means `(2j - 1) / P(D >= j)`.
//!
//!     cargo run --release --example bounded_support_mean

use stubline::analysis::{estimate, EstimateParams, Model};

fn main() -> stubline::Result<()> {
    let mut params = EstimateParams::new(Model::Ct, "cat:0.5,0.5".parse()?, 1_000_000);
    params.replicates = 10;
    params.seed = 2;
    let report = estimate(&params)?;

    let t = report.mean_t;
    println!(
        "mean T = {:.4} ± {:.4} (predicted {:?}), {} vertices",
        t.mean,
        t.se.unwrap_or(0.0),
        t.predicted,
        report.sample_size
    );
    for rec in &report.per_level {
        println!(
            "  level {}: mean K = {:.4} ± {:.4}, predicted {:.1}",
            rec.j,
            rec.mean_k,
            rec.se.unwrap_or(0.0),
            rec.predicted
        );
    }
    println!("invariant violations: {}", report.invariant_violations.total());
    Ok(())
}
