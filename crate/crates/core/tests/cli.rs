use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dropletfem")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SHORT_RUN: &str = "# short glycerol run\nt_max = 0.06\nn_elements_init = 40\noutput_every = 10\n";

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(&["run"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--out", "x", "--strategy", "bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["mms", "--n0", "2"]).status.code(), Some(1));
}

#[test]
fn missing_fluid_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "rho_d = 1222\nrho_c = 1.2\nmu_d = 0.109\nmu_c = 1.8e-5\nu_in = 5e-3\nu_c = 1\nh_in = 2.5e-3\nr_tube = 2.5e-2\n";
    let cfg = write_config(tmp.path(), "nogamma.cfg", text);
    let o = cli(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
}

#[test]
fn config_errors_report_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "t_max = 0.1\n\nlambda = nope\n");
    let o = cli(&["run", "--config", &cfg, "--seed-preset", "glycerol85", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(&["run", "--seed-preset", "water", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("water"));
}

#[test]
fn mms_single_level_has_no_rates() {
    let o = cli(&["mms", "--levels", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].trim_start().starts_with("n_elements"));
    let cols: Vec<&str> = lines[1].split_whitespace().collect();
    assert_eq!(cols.len(), 8);
    assert_eq!(cols[2], "-");
    assert_eq!(cols[4], "-");
}

fn read_key(report: &str, key: &str) -> String {
    report.lines().find_map(|l| l.strip_prefix(&format!("{key} = "))).unwrap().to_string()
}

#[test]
fn run_writes_outputs_and_round_trips_effective_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "short.cfg", SHORT_RUN);
    let first = tmp.path().join("first");
    let o = cli(&["run", "--config", &cfg, "--seed-preset", "glycerol85", "--strategy", "max", "--lambda", "0.2", "--out", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(first.join("report.txt")).unwrap();
    assert_eq!(read_key(&report, "outcome"), "time_limit");
    for key in ["pinch_time_s", "pinch_z_m", "droplet_volume_m3", "n_steps", "n_refinements", "final_n_elements", "eta_global_final"] {
        read_key(&report, key);
    }
    assert!(first.join("run.log").exists());
    let effective = fs::read_to_string(first.join("effective.cfg")).unwrap();
    assert!(effective.contains("amr_strategy = max"));
    assert!(effective.contains("lambda = 0.2"));

    let second = tmp.path().join("second");
    let eff_path = first.join("effective.cfg");
    let o = cli(&["run", "--config", eff_path.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(first.join("report.txt")).unwrap(), fs::read(second.join("report.txt")).unwrap());
    assert_eq!(fs::read(first.join("effective.cfg")).unwrap(), fs::read(second.join("effective.cfg")).unwrap());
}

#[test]
fn snapshots_are_valid_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "short.cfg", SHORT_RUN);
    let out = tmp.path().join("o");
    let o = cli(&["run", "--config", &cfg, "--seed-preset", "glycerol85", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut snaps: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("snap_"))
        .collect();
    snaps.sort();
    assert!(snaps.len() >= 2);
    for path in snaps {
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header, dropletfem::output::SNAPSHOT_HEADER.split(',').collect::<Vec<_>>());
        let mut last_node = 0usize;
        let mut rows = 0;
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), header.len(), "{}: {line}", path.display());
            let node: usize = cols[1].parse().unwrap();
            assert!(node >= last_node);
            last_node = node;
            for c in &cols {
                assert!(c.parse::<f64>().unwrap().is_finite());
            }
            let h: f64 = cols[6].parse().unwrap();
            assert!(h > 0.0);
            rows += 1;
        }
        assert!(rows >= 2 * 40);
    }
}
