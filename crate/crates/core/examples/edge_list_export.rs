//! Generates one cluster-model window, writes the sorted edge list as CSV,
//! reads it back and audits it from the file alone.
//!
//!     cargo run --release --example edge_list_export -- edges.csv

use std::fs::File;

use stubline::analysis::audit::audit_edges;
use stubline::analysis::{generate, EstimateParams, Model, Truncation};
use stubline::model::read_edge_csv;

fn main() -> stubline::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "edges.csv".to_string());
    let mut params = EstimateParams::new(Model::Cluster, "geom:0.5".parse()?, 100_000);
    params.truncation = Truncation::Fixed(8);
    params.seed = 1;
    let (report, rep) = generate(&params)?;

    rep.graph().write_csv(File::create(&path)?)?;
    let edges = read_edge_csv(File::open(&path)?)?;
    let audit = audit_edges(&edges, rep.graph().dangling(), &rep.config, rep.pairing.audit_target());
    println!("wrote {} edges to {path}", edges.len());
    println!("mean T in this window: {:.3}", report.mean_t.mean);
    println!("violations recomputed from the file: {}", audit.total());
    Ok(())
}
