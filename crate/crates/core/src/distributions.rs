//! Degree distributions with exact moment and tail arithmetic, iid sampling
//! of stub configurations, and selection of the truncation level `d`.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result, SpecError};
use crate::model::{StubConfiguration, Window};
use crate::seed::{domain, StreamKey};

/// The parameterisation a distribution was built from.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionKind {
    /// Every vertex has the same degree.
    PointMass(u32),
    /// `pmf[k] = P(D = k)` for `k = 0..=u`.
    Categorical(Vec<f64>),
    /// `P(D = k) = p (1 - p)^(k - 1)` on `k >= 1`.
    Geometric(f64),
    Poisson(f64),
    /// `P(D = k) ∝ k^(-tau)` on `k >= 1`, optionally restricted to `k <= cap`.
    PowerLaw { tau: f64, cap: Option<u32> },
}

#[derive(Clone, Debug)]
struct FiniteSupport {
    pmf: Vec<f64>,
    // survival[j] = P(D >= j) for j = 0..=u+1
    survival: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl FiniteSupport {
    fn new(pmf: Vec<f64>) -> std::result::Result<Self, String> {
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err("probabilities must be finite and non-negative".into());
        }
        let total: f64 = pmf.iter().sum();
        if total <= 0.0 {
            return Err("probabilities sum to zero".into());
        }
        let mut pmf: Vec<f64> = pmf.into_iter().map(|p| p / total).collect();
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let mut survival = vec![0.0; pmf.len() + 1];
        for j in (0..pmf.len()).rev() {
            survival[j] = survival[j + 1] + pmf[j];
        }
        survival[0] = 1.0;
        let sampler = WeightedIndex::new(&pmf).map_err(|e| e.to_string())?;
        Ok(FiniteSupport { pmf, survival, sampler })
    }
}

const ZETA_TABLE: usize = 4096;

#[derive(Clone, Debug)]
struct ZetaTail {
    tau: f64,
    norm: f64,
    // table[k - 1] = P(D >= k)
    table: Vec<f64>,
}

impl ZetaTail {
    fn new(tau: f64) -> Self {
        let norm = hurwitz(tau, 1);
        let table = (1..=ZETA_TABLE as u64).map(|k| hurwitz(tau, k) / norm).collect();
        ZetaTail { tau, norm, table }
    }

    fn survival(&self, j: u64) -> f64 {
        match j {
            0 | 1 => 1.0,
            j if (j as usize) <= ZETA_TABLE => self.table[j as usize - 1],
            j => hurwitz(self.tau, j) / self.norm,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u = 1.0 - rng.random::<f64>();
        let last = *self.table.last().unwrap();
        if u > last {
            return self.table.partition_point(|&s| s >= u) as u32;
        }
        // D = max{k : P(D >= k) >= u}, beyond the table
        let mut lo = ZETA_TABLE as u64;
        let mut hi = 2 * lo;
        while hi < u32::MAX as u64 && self.survival(hi) >= u {
            lo = hi;
            hi = (2 * hi).min(u32::MAX as u64);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.survival(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo as u32
    }
}

/// `Σ_{k >= a} k^(-s)` for `s > 1`, `a >= 1`: direct summation up to 64
/// followed by an Euler–Maclaurin tail.
pub(crate) fn hurwitz(s: f64, a: u64) -> f64 {
    const DIRECT: u64 = 64;
    let mut direct = 0.0;
    let mut k = a.max(1);
    while k < DIRECT {
        direct += (k as f64).powf(-s);
        k += 1;
    }
    let x = k as f64;
    let xs = x.powf(-s);
    let x2 = x * x;
    let mut tail = x * xs / (s - 1.0) + xs / 2.0;
    // Bernoulli corrections B_2..B_8
    let mut rising = s;
    let mut xp = xs / x;
    let coefficients = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    for (i, c) in coefficients.iter().enumerate() {
        tail += c * rising * xp;
        let r = s + 2.0 * i as f64;
        rising *= (r + 1.0) * (r + 2.0);
        xp /= x2;
    }
    direct + tail
}

fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}

/// Law of the iid vertex degrees `D_i`.
#[derive(Clone, Debug)]
pub struct DegreeDistribution {
    kind: DistributionKind,
    finite: Option<FiniteSupport>,
    zeta: Option<ZetaTail>,
}

impl PartialEq for DegreeDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl DegreeDistribution {
    pub fn point_mass(value: u32) -> Self {
        let mut pmf = vec![0.0; value as usize + 1];
        pmf[value as usize] = 1.0;
        DegreeDistribution {
            kind: DistributionKind::PointMass(value),
            finite: Some(FiniteSupport::new(pmf).expect("point mass is valid")),
            zeta: None,
        }
    }

    /// `pmf[k] = P(D = k)` starting at degree 0. Weights must sum to 1
    /// within 1e-9 and are renormalised exactly.
    pub fn categorical(pmf: Vec<f64>) -> Result<Self> {
        let total: f64 = pmf.iter().sum();
        if pmf.is_empty() || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "categorical probabilities sum to {total}, expected 1"
            )));
        }
        let finite = FiniteSupport::new(pmf.clone()).map_err(Error::InvalidDistribution)?;
        Ok(DegreeDistribution {
            kind: DistributionKind::Categorical(pmf),
            finite: Some(finite),
            zeta: None,
        })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "geometric parameter must lie in (0, 1], got {p}"
            )));
        }
        Ok(DegreeDistribution {
            kind: DistributionKind::Geometric(p),
            finite: None,
            zeta: None,
        })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && lambda < 1e6) {
            return Err(Error::InvalidDistribution(format!(
                "poisson mean must lie in (0, 1e6), got {lambda}"
            )));
        }
        Ok(DegreeDistribution {
            kind: DistributionKind::Poisson(lambda),
            finite: None,
            zeta: None,
        })
    }

    pub fn power_law(tau: f64, cap: Option<u32>) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::InvalidDistribution("power-law exponent must be finite".into()));
        }
        match cap {
            Some(0) => Err(Error::InvalidDistribution("power-law cap must be at least 1".into())),
            Some(cap) => {
                let mut pmf = vec![0.0; cap as usize + 1];
                for (k, p) in pmf.iter_mut().enumerate().skip(1) {
                    *p = (k as f64).powf(-tau);
                }
                let finite = FiniteSupport::new(pmf).map_err(Error::InvalidDistribution)?;
                Ok(DegreeDistribution {
                    kind: DistributionKind::PowerLaw { tau, cap: Some(cap) },
                    finite: Some(finite),
                    zeta: None,
                })
            }
            None => {
                if tau <= 1.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "uncapped power law needs tau > 1 to normalise, got {tau}"
                    )));
                }
                Ok(DegreeDistribution {
                    kind: DistributionKind::PowerLaw { tau, cap: None },
                    finite: None,
                    zeta: Some(ZetaTail::new(tau)),
                })
            }
        }
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    /// `p_k = P(D = k)`.
    pub fn pmf(&self, k: u32) -> f64 {
        if let Some(f) = &self.finite {
            return f.pmf.get(k as usize).copied().unwrap_or(0.0);
        }
        match self.kind {
            DistributionKind::Geometric(p) => {
                if k == 0 {
                    0.0
                } else {
                    p * (1.0 - p).powi(k as i32 - 1)
                }
            }
            DistributionKind::Poisson(lambda) => poisson_pmf(lambda, k as u64),
            DistributionKind::PowerLaw { tau, .. } => {
                let z = self.zeta.as_ref().unwrap();
                if k == 0 {
                    0.0
                } else {
                    (k as f64).powf(-tau) / z.norm
                }
            }
            _ => unreachable!("finite kinds handled above"),
        }
    }

    /// `p_j⁺ = P(D >= j)`.
    pub fn survival(&self, j: u32) -> f64 {
        if j == 0 {
            return 1.0;
        }
        if let Some(f) = &self.finite {
            return f.survival.get(j as usize).copied().unwrap_or(0.0);
        }
        match self.kind {
            DistributionKind::Geometric(p) => (1.0 - p).powi(j as i32 - 1),
            DistributionKind::Poisson(lambda) => {
                if j as f64 <= lambda + 1.0 {
                    let below: f64 = (0..j as u64).map(|k| poisson_pmf(lambda, k)).sum();
                    (1.0 - below).max(0.0)
                } else {
                    let mut acc = 0.0;
                    let mut k = j as u64;
                    loop {
                        let term = poisson_pmf(lambda, k);
                        acc += term;
                        if term == 0.0 || term < acc * 1e-17 {
                            break acc;
                        }
                        k += 1;
                    }
                }
            }
            DistributionKind::PowerLaw { .. } => self.zeta.as_ref().unwrap().survival(j as u64),
            _ => unreachable!(),
        }
    }

    /// `u = max{j : p_j > 0}` for bounded support.
    pub fn max_support(&self) -> Option<u32> {
        self.finite.as_ref().map(|f| f.pmf.len() as u32 - 1)
    }

    pub fn mean(&self) -> Option<f64> {
        if let Some(f) = &self.finite {
            return Some(f.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum());
        }
        match self.kind {
            DistributionKind::Geometric(p) => Some(1.0 / p),
            DistributionKind::Poisson(lambda) => Some(lambda),
            DistributionKind::PowerLaw { tau, .. } if tau > 2.0 => {
                Some(hurwitz(tau - 1.0, 1) / self.zeta.as_ref().unwrap().norm)
            }
            _ => None,
        }
    }

    /// `E[D²]`, or `None` when it is infinite.
    pub fn second_moment(&self) -> Option<f64> {
        if let Some(f) = &self.finite {
            return Some(
                f.pmf
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (k * k) as f64 * p)
                    .sum(),
            );
        }
        match self.kind {
            DistributionKind::Geometric(p) => Some((2.0 - p) / (p * p)),
            DistributionKind::Poisson(lambda) => Some(lambda + lambda * lambda),
            DistributionKind::PowerLaw { tau, .. } if tau > 3.0 => {
                Some(hurwitz(tau - 2.0, 1) / self.zeta.as_ref().unwrap().norm)
            }
            _ => None,
        }
    }

    pub fn has_finite_second_moment(&self) -> bool {
        self.second_moment().is_some()
    }

    /// `μ_d = E[max(D - d, 0)]`, the expected number of stubs above level `d`.
    pub fn tail_mean(&self, d: u32) -> Result<f64> {
        if let Some(f) = &self.finite {
            return Ok(f
                .pmf
                .iter()
                .enumerate()
                .skip(d as usize + 1)
                .map(|(k, p)| (k - d as usize) as f64 * p)
                .fold(0.0, |acc, x| acc + x));
        }
        match self.kind {
            DistributionKind::Geometric(p) => Ok((1.0 - p).powi(d as i32) / p),
            DistributionKind::Poisson(lambda) => {
                let df = d as f64;
                if df < lambda {
                    let below: f64 = (0..=d as u64)
                        .map(|k| (df - k as f64) * poisson_pmf(lambda, k))
                        .sum();
                    Ok(lambda - df + below)
                } else {
                    let mut acc = 0.0;
                    let mut k = d as u64 + 1;
                    loop {
                        let term = (k - d as u64) as f64 * poisson_pmf(lambda, k);
                        acc += term;
                        if term == 0.0 || term < acc * 1e-17 {
                            break Ok(acc);
                        }
                        k += 1;
                    }
                }
            }
            DistributionKind::PowerLaw { tau, .. } => {
                if tau <= 2.0 {
                    return Err(Error::TailMeanUndefined);
                }
                let z = self.zeta.as_ref().unwrap();
                let a = d as u64 + 1;
                let value = (hurwitz(tau - 1.0, a) - d as f64 * hurwitz(tau, a)) / z.norm;
                Ok(value.max(0.0))
            }
            _ => unreachable!(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if let Some(f) = &self.finite {
            return f.sampler.sample(rng) as u32;
        }
        match self.kind {
            DistributionKind::Geometric(p) => {
                let failures = Geometric::new(p).expect("validated").sample(rng);
                failures.saturating_add(1).min(u32::MAX as u64) as u32
            }
            DistributionKind::Poisson(lambda) => {
                let x: f64 = Poisson::new(lambda).expect("validated").sample(rng);
                x.min(u32::MAX as f64) as u32
            }
            DistributionKind::PowerLaw { .. } => self.zeta.as_ref().unwrap().sample(rng),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ps: &[f64]| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        match &self.kind {
            DistributionKind::PointMass(c) => write!(f, "const:{c}"),
            DistributionKind::Categorical(pmf) => {
                if pmf.len() > 1 && pmf[0] == 0.0 {
                    write!(f, "cat:{}", join(&pmf[1..]))
                } else {
                    write!(f, "cat0:{}", join(pmf))
                }
            }
            DistributionKind::Geometric(p) => write!(f, "geom:{p}"),
            DistributionKind::Poisson(l) => write!(f, "pois:{l}"),
            DistributionKind::PowerLaw { tau, cap: None } => write!(f, "plaw:{tau}"),
            DistributionKind::PowerLaw { tau, cap: Some(c) } => write!(f, "plaw:{tau},cap={c}"),
        }
    }
}

impl Serialize for DegreeDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for DegreeDistribution {
    type Err = SpecError;

    /// Accepts `const:3`, `cat:0.5,0.5` (degrees 1, 2, ...), `cat0:0.2,0.8`
    /// (degrees 0, 1, ...), `geom:0.5`, `pois:2.0`, `plaw:3.5` and
    /// `plaw:3.5,cap=50`.
    fn from_str(input: &str) -> std::result::Result<Self, SpecError> {
        let err = |offset: usize, msg: String| SpecError::new(input, offset, msg);
        let colon = input
            .find(':')
            .ok_or_else(|| err(input.len(), "expected `<kind>:<parameters>`".into()))?;
        let kind = &input[..colon];
        let mut fields = Vec::new();
        let mut offset = colon + 1;
        for field in input[colon + 1..].split(',') {
            fields.push((offset, field));
            offset += field.len() + 1;
        }
        let number = |(at, text): (usize, &str)| -> std::result::Result<f64, SpecError> {
            text.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(at, format!("expected a number, found `{text}`")))
        };
        let exactly_one = |fields: &[(usize, &str)]| -> std::result::Result<usize, SpecError> {
            match fields {
                [_] => Ok(0),
                [_, (at, _), ..] => Err(err(at - 1, "expected exactly one parameter".into())),
                [] => unreachable!("split yields at least one field"),
            }
        };
        let build = |at: usize, r: Result<DegreeDistribution>| {
            r.map_err(|e| match e {
                Error::InvalidDistribution(msg) => err(at, msg),
                other => err(at, other.to_string()),
            })
        };
        match kind {
            "const" => {
                let (at, text) = fields[exactly_one(&fields)?];
                let c = text
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| err(at, format!("expected a non-negative integer, found `{text}`")))?;
                Ok(DegreeDistribution::point_mass(c))
            }
            "cat" | "cat0" => {
                let mut pmf = if kind == "cat" { vec![0.0] } else { Vec::new() };
                for f in &fields {
                    let p = number(*f)?;
                    if p < 0.0 {
                        return Err(err(f.0, "probabilities must be non-negative".into()));
                    }
                    pmf.push(p);
                }
                build(colon + 1, DegreeDistribution::categorical(pmf))
            }
            "geom" => {
                let f = fields[exactly_one(&fields)?];
                build(f.0, DegreeDistribution::geometric(number(f)?))
            }
            "pois" => {
                let f = fields[exactly_one(&fields)?];
                build(f.0, DegreeDistribution::poisson(number(f)?))
            }
            "plaw" => {
                let tau = number(fields[0])?;
                let cap = match &fields[1..] {
                    [] => None,
                    [(at, text)] => {
                        let value = text
                            .trim()
                            .strip_prefix("cap=")
                            .ok_or_else(|| err(*at, format!("expected `cap=<int>`, found `{text}`")))?;
                        Some(value.parse::<u32>().map_err(|_| {
                            err(at + 4, format!("expected an integer cap, found `{value}`"))
                        })?)
                    }
                    [_, (at, _), ..] => return Err(err(at - 1, "too many parameters".into())),
                };
                build(fields[0].0, DegreeDistribution::power_law(tau, cap))
            }
            other => Err(err(
                0,
                format!("unknown distribution kind `{other}` (expected const, cat, cat0, geom, pois or plaw)"),
            )),
        }
    }
}

/// The truncation level `d` of the cluster model together with `μ_d` and the
/// claim threshold `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationChoice {
    pub d: u32,
    /// `None` when the distribution has infinite mean.
    pub mu_d: Option<f64>,
    pub alpha: f64,
}

impl TruncationChoice {
    /// A user-supplied level. `d` must be even and at least 2.
    pub fn explicit(dist: &DegreeDistribution, d: u32, alpha: f64) -> Result<Self> {
        if d < 2 || !d.is_multiple_of(2) {
            return Err(Error::InvalidTruncation(d));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(TruncationChoice {
            d,
            mu_d: dist.tail_mean(d).ok(),
            alpha,
        })
    }

    /// Upper bound on `μ_d` required of an automatically chosen level.
    pub fn tail_bound(alpha: f64) -> f64 {
        (alpha / 18.0 * (1.0 - 1e-15)).min(1.0 / 36.0)
    }
}

const MAX_TRUNCATION: u32 = 1 << 30;

/// Smallest even `d >= 2` with `μ_d <= min(alpha/18 - ε, 1/36)`.
pub fn select_d(dist: &DegreeDistribution, alpha: f64) -> Result<TruncationChoice> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !dist.has_finite_second_moment() {
        return Err(Error::NoValidTruncation);
    }
    let bound = TruncationChoice::tail_bound(alpha);
    let ok = |d: u32| -> Result<bool> { Ok(dist.tail_mean(d)? <= bound) };
    // μ_d is non-increasing: bracket by doubling, then bisect over even d.
    let mut below = 0u32;
    let mut above = 2u32;
    while !ok(above)? {
        if above >= MAX_TRUNCATION {
            return Err(Error::TruncationSearchExhausted(MAX_TRUNCATION));
        }
        below = above;
        above *= 2;
    }
    while above - below > 2 {
        let mid = below + (above - below) / 4 * 2;
        if ok(mid)? {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(TruncationChoice {
        d: above,
        mu_d: Some(dist.tail_mean(above)?),
        alpha,
    })
}

/// Draws `D_i` iid for every vertex of `window`, left to right from a single
/// stream keyed on `key`.
pub fn sample_configuration(
    dist: &DegreeDistribution,
    window: &Window,
    key: StreamKey,
) -> StubConfiguration {
    let mut rng = key.derive(domain::CONFIGURATION, 0).rng();
    let degrees = (0..window.len()).map(|_| dist.sample(&mut rng)).collect();
    StubConfiguration::new(*window, degrees).expect("degree count matches window")
}

/// Removes degree-0 vertices and packs the rest onto consecutive positions
/// starting at the old `lo`. The margin is kept when it still fits and
/// shrunk otherwise.
pub fn strip_zeros(config: &StubConfiguration) -> Result<StubConfiguration> {
    let window = config.window();
    let mut degrees = Vec::with_capacity(window.len());
    let mut original = Vec::with_capacity(window.len());
    for (o, &d) in config.degrees().iter().enumerate() {
        if d > 0 {
            degrees.push(d);
            original.push(window.position(o));
        }
    }
    if degrees.is_empty() {
        return Err(Error::EmptySupport);
    }
    if degrees.len() == window.len() {
        return Ok(config.clone());
    }
    if degrees.len() < 2 {
        return Err(Error::InvalidWindow(
            "fewer than two vertices remain after removing degree-0 vertices".into(),
        ));
    }
    let n = degrees.len() as u64;
    let margin = window.margin().min((n - 1) / 2);
    let stripped = Window::new(window.lo(), window.lo() + n as i64 - 1, margin)?;
    Ok(StubConfiguration::stripped(stripped, degrees, original))
}
