//! Small statistical helpers: replicate-level means, the two-sample
//! Kolmogorov–Smirnov test and a chi-square test of homogeneity.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean and standard error of a set of replicate-level values. The standard
/// error is `None` with fewer than two values.
pub fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value. For
/// discrete data the test is conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsOutcome {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs non-empty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    KsOutcome {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
    }
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small lambda
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let mut sum = 0.0;
        for k in 0..20 {
            let e = (2 * k + 1) * (2 * k + 1);
            sum += y.powi(e);
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * sum;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let term = x.powi(k * k);
            sum += sign * term;
            if term < 1e-18 {
                break;
            }
            sign = -sign;
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square test that all rows of a contingency table share one column
/// law. Sparse trailing columns are pooled until every column total is at
/// least `5 × rows`.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> ChiSquareOutcome {
    let rows = table.len();
    assert!(rows >= 2, "need at least two rows");
    let cols = table.iter().map(|r| r.len()).max().unwrap_or(0);
    let cell = |r: usize, c: usize| table[r].get(c).copied().unwrap_or(0);
    let mut pooled: Vec<Vec<u64>> = vec![Vec::new(); rows];
    let mut pending = vec![0u64; rows];
    let min_total = 5 * rows as u64;
    for c in 0..cols {
        for (r, p) in pending.iter_mut().enumerate() {
            *p += cell(r, c);
        }
        if pending.iter().sum::<u64>() >= min_total {
            for r in 0..rows {
                pooled[r].push(pending[r]);
                pending[r] = 0;
            }
        }
    }
    if pending.iter().any(|&p| p > 0) {
        for r in 0..rows {
            match pooled[r].last_mut() {
                Some(last) => *last += pending[r],
                None => pooled[r].push(pending[r]),
            }
        }
    }
    let k = pooled[0].len();
    let row_totals: Vec<f64> = pooled.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_totals: Vec<f64> = (0..k).map(|c| pooled.iter().map(|r| r[c]).sum::<u64>() as f64).collect();
    let total: f64 = row_totals.iter().sum();
    let mut statistic = 0.0;
    for r in 0..rows {
        for c in 0..k {
            let expected = row_totals[r] * col_totals[c] / total;
            if expected > 0.0 {
                statistic += (pooled[r][c] as f64 - expected).powi(2) / expected;
            }
        }
    }
    let dof = (rows - 1) * (k.max(1) - 1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
    };
    ChiSquareOutcome {
        statistic,
        dof,
        p_value,
    }
}
