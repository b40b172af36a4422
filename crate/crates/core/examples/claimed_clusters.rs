//! Claimed vertices and clusters for a hand-made bad-stub field, checked
//! against the brute-force definition.
//!
//!     cargo run --example claimed_clusters

use stubline::cluster::{claimed_set, BadStubField};
use stubline::oracle::claimed_brute_force;
use stubline::Window;

fn main() -> stubline::Result<()> {
    let mut tails = vec![0u32; 60];
    tails[12] = 3;
    tails[30] = 2;
    tails[33] = 4;
    tails[58] = 1;
    let window = Window::with_len(tails.len(), 0)?;
    let field = BadStubField::from_tails(window, 8, tails.clone())?;

    for alpha in [1.0, 0.5] {
        let part = claimed_set(&field, alpha);
        let row: String = part.claimed().iter().map(|&c| if c { '#' } else { '.' }).collect();
        let bars: String = tails.iter().map(|&t| char::from_digit(t, 10).unwrap()).collect();
        println!("alpha = {alpha}");
        println!("  tails   {bars}");
        println!("  claimed {row}");
        for c in part.clusters() {
            println!(
                "  cluster [{}, {}]: size {}, bad stubs {}, high vertices {}{}",
                c.lo,
                c.hi,
                c.len(),
                c.bad_stubs,
                c.high_count,
                if c.boundary_uncertain { ", boundary uncertain" } else { "" }
            );
        }
        assert_eq!(part.claimed(), claimed_brute_force(&tails, alpha).as_slice());
    }
    Ok(())
}
