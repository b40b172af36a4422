//! Slow reference computations used to cross-check the fast paths.

/// Claimed flags by the defining double loop: vertex `c` is claimed when
/// some radius `m >= 1` gives `b([c - m, c + m] ∩ window) >= alpha·m`.
/// Radii past the farther window edge add nothing, so they are not tried.
pub fn claimed_brute_force(tails: &[u32], alpha: f64) -> Vec<bool> {
    let n = tails.len();
    (0..n)
        .map(|c| {
            let mut sum = tails[c] as u64;
            for m in 1..=c.max(n - 1 - c) {
                if m <= c {
                    sum += tails[c - m] as u64;
                }
                if c + m < n {
                    sum += tails[c + m] as u64;
                }
                if sum as f64 >= alpha * m as f64 {
                    return true;
                }
            }
            false
        })
        .collect()
}
