//! Command-line front end: `generate`, `estimate`, `verify` and `sweep`.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::audit::{audit_edges, Violations};
use crate::analysis::stats::chi_square_homogeneity;
use crate::analysis::{self, estimate, gap_statistics, EstimateParams, Model, SimulationReport, Truncation};
use crate::cluster::{claimed_set, BadStubField};
use crate::distributions::{sample_configuration, DegreeDistribution};
use crate::error::{Error, Result};
use crate::model::{read_edge_csv, Edge, Window};
use crate::oracle::claimed_brute_force;
use crate::seed::StreamKey;

#[derive(Debug, Parser)]
#[command(name = "stubline", version, about = "Stationary simple random graphs on the integer line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pair one window and write `edges.csv` and `report.json`.
    Generate(RunConfig),
    /// Average over replicates and print a report.
    Estimate(RunConfig),
    /// Run the invariant suite over a pinned corpus.
    Verify(VerifyArgs),
    /// One estimate per value of a swept parameter, as CSV.
    Sweep(SweepArgs),
}

/// `auto` or an explicit value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutoOr<T> {
    Auto,
    Value(T),
}

fn parse_auto_or<T: std::str::FromStr>(s: &str) -> std::result::Result<AutoOr<T>, String> {
    if s == "auto" {
        Ok(AutoOr::Auto)
    } else {
        s.parse()
            .map(AutoOr::Value)
            .map_err(|_| format!("expected `auto` or a non-negative integer, got `{s}`"))
    }
}

fn parse_d(s: &str) -> std::result::Result<AutoOr<u32>, String> {
    match parse_auto_or::<u32>(s)? {
        AutoOr::Value(d) if d < 2 || d % 2 != 0 => Err(format!("d must be even and at least 2, got {d}")),
        other => Ok(other),
    }
}

fn parse_margin(s: &str) -> std::result::Result<AutoOr<u64>, String> {
    parse_auto_or(s)
}

fn parse_dist(s: &str) -> std::result::Result<DegreeDistribution, String> {
    s.parse().map_err(|e: crate::SpecError| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Degree distribution, e.g. `const:3`, `cat:0.5,0.5`, `geom:0.5`,
    /// `pois:2`, `plaw:3.5`, `plaw:2.5,cap=100`.
    #[arg(long, value_parser = parse_dist)]
    pub dist: DegreeDistribution,
    #[arg(long, value_enum, default_value_t = Model::Ct)]
    pub model: Model,
    /// Number of vertices in the window.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Truncation level of the cluster model: `auto` or an even integer >= 2.
    #[arg(long, default_value = "auto", value_parser = parse_d)]
    pub d: AutoOr<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Vertices excluded from measurement at each end: `auto` or an integer.
    #[arg(long, default_value = "auto", value_parser = parse_margin)]
    pub margin: AutoOr<u64>,
    /// Output file (estimate, sweep) or directory (generate).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; JSON for `estimate` and CSV for `sweep` by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads. Output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Coin-toss levels measured individually.
    #[arg(long)]
    pub probe_levels: Option<u32>,
    /// Include a SHA-256 digest of every replicate's edge list in the report.
    #[arg(long)]
    pub edge_digests: bool,
}

impl RunConfig {
    /// Cross-field checks done before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.model == Model::Cluster && self.d == AutoOr::Auto && !self.dist.has_finite_second_moment() {
            return Err(Error::NoValidTruncation);
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.model == Model::Cluster && !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }

    pub fn params(&self) -> EstimateParams {
        let mut p = EstimateParams::new(self.model, self.dist.clone(), self.n);
        p.margin = match self.margin {
            AutoOr::Auto => None,
            AutoOr::Value(m) => Some(m),
        };
        p.truncation = match self.d {
            AutoOr::Auto => Truncation::Auto,
            AutoOr::Value(d) => Truncation::Fixed(d),
        };
        p.alpha = self.alpha;
        p.replicates = self.replicates;
        p.seed = self.seed;
        p.probe_levels = self.probe_levels;
        p.workers = self.workers;
        p.edge_digests = self.edge_digests;
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Repeat the first edge of every audited edge list.
    DupEdge,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Window length for the claimed-set oracle check.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Only compare the claimed set against brute force.
    #[arg(long)]
    pub oracle_claimed: bool,
    /// Random configurations for the oracle check.
    #[arg(long, default_value_t = 500)]
    pub oracle_cases: usize,
    #[arg(long, value_enum)]
    pub inject: Option<Fault>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    D,
    N,
    Alpha,
    DistParam,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunConfig,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
}

/// Parses arguments and runs the command, returning the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Generate(c) => cmd_generate(c).map(|r| exit_code(&r)),
        Command::Estimate(c) => cmd_estimate(c).map(|r| exit_code(&r)),
        Command::Verify(v) => cmd_verify(v).map(|s| if s.passed() { 0 } else { 1 }),
        Command::Sweep(s) => cmd_sweep(s).map(|rows| if rows.iter().all(|r| r.violations == 0) { 0 } else { 1 }),
    }
}

fn exit_code(report: &SimulationReport) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}

fn announce_truncation(config: &RunConfig, report: &SimulationReport) {
    if config.model == Model::Cluster && config.d == AutoOr::Auto {
        if let Some(d) = report.d {
            match report.mu_d {
                Some(mu) => eprintln!("d = {d} (mu_d = {mu})"),
                None => eprintln!("d = {d}"),
            }
        }
    }
}

/// Writes `edges.csv` and `report.json` for replicate 0 into `--out`
/// (default `stubline-out`).
pub fn cmd_generate(config: &RunConfig) -> Result<SimulationReport> {
    config.validate()?;
    let (report, rep) = analysis::generate(&config.params())?;
    announce_truncation(config, &report);
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("stubline-out"));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("edges.csv"), rep.graph().to_csv_bytes())?;
    fs::write(dir.join("report.json"), report.to_json())?;
    Ok(report)
}

/// Prints the report (JSON, or one CSV row) to `--out` or stdout.
pub fn cmd_estimate(config: &RunConfig) -> Result<SimulationReport> {
    config.validate()?;
    let report = estimate(&config.params())?;
    announce_truncation(config, &report);
    let body = match config.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json().into_bytes(),
        Format::Csv => rows_to_csv(&[SweepRow::from_report("", "", &report)])?,
    };
    emit(config.out.as_ref(), &body)?;
    Ok(report)
}

fn emit(out: Option<&PathBuf>, body: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().lock().write_all(body)?,
    }
    Ok(())
}

/// One line of a sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub model: String,
    pub dist: String,
    pub n: usize,
    pub d: Option<u32>,
    pub alpha: Option<f64>,
    pub replicates: usize,
    pub sample_size: u64,
    pub mean_t: f64,
    pub mean_t_se: Option<f64>,
    pub mean_cluster_size: Option<f64>,
    pub origin_cluster_size: Option<f64>,
    pub claimed_fraction: Option<f64>,
    pub boundary_uncertain: Option<u64>,
    pub violations: u64,
}

impl SweepRow {
    pub fn from_report(axis: &str, value: &str, r: &SimulationReport) -> Self {
        let c = r.clusters.as_ref();
        SweepRow {
            axis: axis.to_string(),
            value: value.to_string(),
            model: r.model.to_string(),
            dist: r.dist.clone(),
            n: r.n,
            d: r.d,
            alpha: r.alpha,
            replicates: r.replicates,
            sample_size: r.sample_size,
            mean_t: r.mean_t.mean,
            mean_t_se: r.mean_t.se,
            mean_cluster_size: c.and_then(|c| c.mean_size),
            origin_cluster_size: c.map(|c| c.origin_mean),
            claimed_fraction: c.map(|c| c.claimed_fraction),
            boundary_uncertain: c.map(|c| c.boundary_uncertain),
            violations: r.invariant_violations.total(),
        }
    }
}

fn rows_to_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Replaces the numeric parameter of a one-parameter family, keeping a
/// power-law cap.
pub fn with_dist_param(dist: &DegreeDistribution, value: &str) -> Result<DegreeDistribution> {
    let spec = dist.to_string();
    let (family, rest) = spec.split_once(':').unwrap_or((&spec, ""));
    let suffix = match family {
        "plaw" => rest.find(',').map(|i| &rest[i..]).unwrap_or(""),
        "const" | "geom" | "pois" => "",
        _ => {
            return Err(Error::InvalidConfig(format!(
                "cannot sweep the parameter of `{spec}`; use const, geom, pois or plaw"
            )))
        }
    };
    Ok(format!("{family}:{value}{suffix}").parse()?)
}

/// Runs one estimate per value, all from the same base seed.
pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    let axis_name = args.axis.to_possible_value().expect("named axis").get_name().to_string();
    let mut rows = Vec::with_capacity(args.values.len());
    for value in &args.values {
        let value = value.trim();
        let mut config = args.run.clone();
        let bad = |what: &str| Error::InvalidConfig(format!("invalid {what} value `{value}`"));
        match args.axis {
            Axis::D => {
                config.d = parse_d(value).map_err(Error::InvalidConfig)?;
            }
            Axis::N => config.n = value.parse().map_err(|_| bad("n"))?,
            Axis::Alpha => config.alpha = value.parse().map_err(|_| bad("alpha"))?,
            Axis::DistParam => config.dist = with_dist_param(&config.dist, value)?,
        }
        config.validate()?;
        let report = estimate(&config.params())?;
        rows.push(SweepRow::from_report(&axis_name, value, &report));
    }
    let body = match args.run.format.unwrap_or(Format::Csv) {
        Format::Csv => rows_to_csv(&rows)?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(args.run.out.as_ref(), &body)?;
    Ok(rows)
}

/// Result of one verification check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub violations: u64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifySummary {
    pub checks: Vec<CheckLine>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn check(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, violations: u64, detail: String) {
        self.checks.push(CheckLine {
            name: name.to_string(),
            violations,
            detail,
        });
    }
}

/// Pinned corpus: `(dist, model, n, d)`.
const CORPUS: &[(&str, Model, usize, Option<u32>)] = &[
    ("const:3", Model::Ct, 2_000, None),
    ("cat:0.5,0.5", Model::Ct, 20_000, None),
    ("cat0:0.2,0.3,0.3,0.2", Model::Ct, 20_000, None),
    ("geom:0.5", Model::Ct, 20_000, None),
    ("pois:2", Model::Ct, 20_000, None),
    ("geom:0.5", Model::Cluster, 50_000, None),
    ("geom:0.3", Model::Cluster, 50_000, Some(4)),
    ("pois:3", Model::Cluster, 50_000, None),
    ("cat0:0.1,0.2,0.2,0.2,0.1,0.1,0.1", Model::Cluster, 50_000, Some(2)),
    ("plaw:3.5", Model::Cluster, 50_000, None),
];

/// Audits the corpus from exported edge lists, checks gap statistics, and
/// compares the claimed set with brute force. Prints one line per check.
pub fn cmd_verify(args: &VerifyArgs) -> Result<VerifySummary> {
    let mut summary = VerifySummary::default();
    if !args.oracle_claimed {
        corpus_checks(args, &mut summary)?;
        gap_check(args, &mut summary)?;
    }
    oracle_check(args, &mut summary)?;
    for c in &summary.checks {
        let verdict = if c.violations == 0 { "PASS" } else { "FAIL" };
        println!("{verdict} {:<20} {:>6}  {}", c.name, c.violations, c.detail);
    }
    Ok(summary)
}

fn corpus_checks(args: &VerifyArgs, summary: &mut VerifySummary) -> Result<()> {
    let mut total = Violations::default();
    for (i, &(spec, model, n, d)) in CORPUS.iter().enumerate() {
        let mut params = EstimateParams::new(model, spec.parse()?, n);
        params.seed = args.seed.wrapping_add(i as u64);
        params.truncation = d.map_or(Truncation::Auto, Truncation::Fixed);
        let plan = params.plan()?;
        let rep = plan.run_replicate(0)?;
        // re-read the edges exactly as exported
        let mut edges: Vec<Edge> = read_edge_csv(rep.graph().to_csv_bytes().as_slice())?;
        if args.inject == Some(Fault::DupEdge) && !edges.is_empty() {
            edges.push(edges[0]);
        }
        let v = audit_edges(&edges, rep.graph().dangling(), &rep.config, rep.pairing.audit_target());
        total.merge(&v);
    }
    let detail = format!("{} corpus runs", CORPUS.len());
    summary.push("simplicity", total.self_loops + total.multi_edges, detail.clone());
    for (name, count) in total.entries() {
        if name != "self_loops" && name != "multi_edges" {
            summary.push(name, count, detail.clone());
        }
    }
    Ok(())
}

fn gap_check(args: &VerifyArgs, summary: &mut VerifySummary) -> Result<()> {
    let dist: DegreeDistribution = "cat:0.5,0.5".parse()?;
    let window = Window::with_len(100_000, 0)?;
    let key = StreamKey::new(args.seed);
    let config = sample_configuration(&dist, &window, key);
    let g = gap_statistics(std::slice::from_ref(&config), 2).expect("level 2 is populated");
    let z = (g.mean_gap - 2.0) / g.se;
    summary.push(
        "gap_level2",
        u64::from(z.abs() > 3.0),
        format!("mean gap {:.4} (se {:.4}), expected 2", g.mean_gap, g.se),
    );

    // gap lengths should follow the same law in both window halves
    let half = window.len() / 2;
    let mut hist = vec![vec![0u64; 16]; 2];
    let mut last: Option<usize> = None;
    for (o, &d) in config.degrees().iter().enumerate() {
        if d >= 2 {
            if let Some(prev) = last {
                let gap = (o - prev).min(16) - 1;
                hist[usize::from(o >= half)][gap] += 1;
            }
            last = Some(o);
        }
    }
    let chi = chi_square_homogeneity(&hist);
    summary.push(
        "gap_homogeneity",
        u64::from(chi.p_value <= 0.01),
        format!("chi-square {:.2} on {} dof, p = {:.3}", chi.statistic, chi.dof, chi.p_value),
    );
    Ok(())
}

fn oracle_check(args: &VerifyArgs, summary: &mut VerifySummary) -> Result<()> {
    use rand::Rng;
    if args.n < 2 {
        return Err(Error::InvalidConfig("oracle window needs at least 2 vertices".into()));
    }
    let mut rng = StreamKey::new(args.seed).rng();
    let dists: Vec<DegreeDistribution> = ["geom:0.3", "geom:0.5", "pois:4", "plaw:2.5,cap=60"]
        .iter()
        .map(|s| s.parse().map_err(Error::from))
        .collect::<Result<_>>()?;
    let mut mismatches = 0;
    for case in 0..args.oracle_cases {
        let n = rng.random_range(2..=args.n);
        let d = [2u32, 4, 8][case % 3];
        let alpha = if (case / 3) % 2 == 0 { 1.0 } else { 0.5 };
        let dist = &dists[rng.random_range(0..dists.len())];
        let window = Window::with_len(n, 0)?;
        let config = sample_configuration(dist, &window, StreamKey::new(rng.random()));
        let field = BadStubField::new(&config, d);
        let fast = claimed_set(&field, alpha);
        if fast.claimed() != claimed_brute_force(field.tails(), alpha).as_slice() {
            mismatches += 1;
        }
    }
    summary.push(
        "claimed_set_oracle",
        mismatches,
        format!("{} windows of up to {} vertices", args.oracle_cases, args.n),
    );
    Ok(())
}
