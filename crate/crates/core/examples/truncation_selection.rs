//! Automatic choice of the truncation level `d` for several degree laws.
//!
//!     cargo run --example truncation_selection

use stubline::distributions::select_d;
use stubline::DegreeDistribution;

fn main() {
    for spec in ["const:3", "geom:0.5", "geom:0.2", "pois:4", "plaw:3.5", "plaw:2.5,cap=1000", "plaw:2.5"] {
        let dist: DegreeDistribution = spec.parse().expect("valid spec");
        for alpha in [1.0, 0.25] {
            match select_d(&dist, alpha) {
                Ok(c) => println!("{spec:<18} alpha={alpha:<5} d = {:<4} mu_d = {:.3e}", c.d, c.mu_d.unwrap()),
                Err(e) => println!("{spec:<18} alpha={alpha:<5} {e}"),
            }
        }
    }
}
