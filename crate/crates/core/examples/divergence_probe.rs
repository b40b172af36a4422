//! For geometric degrees the coin-toss model has infinite mean edge length.
//! Truncating at level `L` gives `L²`, which grows without bound.
//!
//!     cargo run --release --example divergence_probe -- 8

use stubline::analysis::divergence_probe_ct;

fn main() -> stubline::Result<()> {
    let levels: u32 = std::env::args().nth(1).map_or(6, |s| s.parse().expect("level count"));
    let dist = "geom:0.5".parse()?;
    let records = divergence_probe_ct(&dist, levels, 1_000_000, 2, 4, 1)?;
    println!("{:>3} {:>10} {:>8} {:>8}", "L", "mean", "L²", "rel");
    for r in records {
        println!(
            "{:>3} {:>10.3} {:>8} {:>8.4}",
            r.l,
            r.mean,
            r.predicted,
            (r.mean - r.predicted) / r.predicted
        );
    }
    Ok(())
}
