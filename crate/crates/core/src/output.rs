//! Plain-text run artifacts: snapshot CSVs, the run log and the report.
//!
//! A snapshot file has one row per (element, end node) pair so that the
//! element-wise `eta_K` can be plotted as a step function. Interior nodes
//! therefore appear twice, once for each adjacent element, and rows are in
//! non-decreasing node order.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::physics::nodal_curvature;
use crate::timeloop::{Outcome, RunReport, Snapshot};

pub const SNAPSHOT_HEADER: &str = "t,node,zeta,z,z_over_hin,u,h,h_over_hin,s,curvature,eta_K";

/// CSV text of one snapshot.
pub fn snapshot_csv(snap: &Snapshot, h_in: f64) -> String {
    let (mesh, st) = (&snap.mesh, &snap.state);
    let kappa = nodal_curvature(st, mesh);
    let mut out = String::with_capacity(160 * 2 * mesh.n_elements());
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for e in 0..mesh.n_elements() {
        for i in [e, e + 1] {
            let z = mesh.z(i);
            let _ = writeln!(
                out,
                "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                st.t,
                i,
                mesh.ref_coords()[i],
                z,
                z / h_in,
                st.u[i],
                st.h[i],
                st.h[i] / h_in,
                st.s[i],
                kappa[i],
                snap.error.eta[e]
            );
        }
    }
    out
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("snap_{step:06}.csv")
}

/// Key/value report text.
pub fn report_text(report: &RunReport) -> String {
    let outcome = match &report.outcome {
        Outcome::NoSteps => "no_steps".to_string(),
        Outcome::Pinched => "pinched".to_string(),
        Outcome::TimeLimit => "time_limit".to_string(),
        Outcome::HardFailure(_) => "hard_failure".to_string(),
    };
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"));
    let p = report.pinch.as_ref();
    let fin = &report.final_snapshot;
    let mut out = String::new();
    let _ = writeln!(out, "outcome = {outcome}");
    let _ = writeln!(out, "pinch_time_s = {}", opt(p.map(|p| p.t)));
    let _ = writeln!(out, "pinch_z_m = {}", opt(p.map(|p| p.z)));
    let _ = writeln!(out, "droplet_volume_m3 = {}", opt(p.map(|p| p.droplet_volume)));
    let _ = writeln!(out, "n_steps = {}", report.n_steps);
    let _ = writeln!(out, "n_refinements = {}", report.n_refinements());
    let _ = writeln!(out, "final_n_elements = {}", fin.mesh.n_elements());
    let _ = writeln!(out, "eta_global_final = {:e}", fin.error.eta_global);
    let _ = writeln!(out, "final_time_s = {:e}", fin.state.t);
    let _ = writeln!(out, "final_length_m = {:e}", fin.state.length);
    let _ = writeln!(out, "elements_refined = {}", report.elements_refined());
    let _ = writeln!(out, "max_volume_defect = {:e}", report.max_volume_defect());
    if let Outcome::HardFailure(msg) = &report.outcome {
        let _ = writeln!(out, "failure = {msg}");
    }
    out
}

/// Run log: event lines followed by one line per accepted step.
pub fn log_text(report: &RunReport) -> String {
    let mut out = String::new();
    for line in &report.log {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("# step t dt length newton_iters n_elements volume_defect h_neck\n");
    for s in &report.steps {
        let _ = writeln!(
            out,
            "{} {:e} {:e} {:e} {} {} {:e} {}",
            s.step,
            s.t,
            s.dt,
            s.length,
            s.newton_iters,
            s.n_elements,
            s.volume_defect,
            s.h_neck.map_or_else(|| "none".to_string(), |h| format!("{h:e}"))
        );
    }
    out
}

/// Output directory receiving snapshots as they are produced.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    h_in: f64,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, h_in: f64) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), h_in, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Snapshot files written so far, in order.
    pub fn snapshots(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write_snapshot(&mut self, snap: &Snapshot) -> Result<()> {
        let path = self.root.join(snapshot_file_name(snap.step));
        let mut w = BufWriter::new(File::create(&path)?);
        w.write_all(snapshot_csv(snap, self.h_in).as_bytes())?;
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.root.join(name), text)?;
        Ok(())
    }

    /// Writes `run.log` and `report.txt`.
    pub fn finish(&self, report: &RunReport) -> Result<()> {
        self.write_text("run.log", &log_text(report))?;
        self.write_text("report.txt", &report_text(report))
    }
}
