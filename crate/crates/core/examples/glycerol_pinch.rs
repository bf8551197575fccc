//! Glycerol droplet in co-flowing air, adaptive run to pinch-off with
//! snapshots, run log and report written to an output directory.
//!
//! Usage: glycerol_pinch [out_dir] [strategy]

use std::path::PathBuf;

use dropletfem::output::{report_text, OutputDir};
use dropletfem::properties::FluidPair;
use dropletfem::timeloop::{run_with, RunConfig};

fn main() -> dropletfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "glycerol_out".into()));
    let mut cfg = RunConfig::default();
    if let Some(s) = args.next() {
        cfg.amr_strategy = s.parse().map_err(|m: String| dropletfem::Error::InvalidParameter { name: "strategy", reason: m })?;
    }
    let fp = FluidPair::glycerol85();
    let mut dir = OutputDir::create(&out, fp.h_in)?;
    let report = run_with(&cfg, &fp, |snap| dir.write_snapshot(snap))?;
    dir.finish(&report)?;
    print!("{}", report_text(&report));
    for r in &report.refinements {
        println!(
            "refined at t = {:.4} s ({}): {} -> {} elements",
            r.t, r.trigger, r.record.elements_before, r.record.elements_after
        );
    }
    println!("{} snapshots in {}", dir.snapshots().len(), dir.root().display());
    Ok(())
}
