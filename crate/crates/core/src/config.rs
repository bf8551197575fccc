//! Flat `key = value` configuration files.
//!
//! One assignment per line, SI units, `#` starts a comment. Keys are the
//! field names of [`FluidPair`] and [`RunConfig`], plus `preset`. A preset
//! seeds every key; keys in the file override it. Without a preset all fluid
//! keys except `nu_d`, `dpdz_c` and `full_pressure_term` are required.
//!
//! ```text
//! preset = glycerol85
//! amr_strategy = doerfler   # none | max | doerfler
//! probe_times = 0.1, 0.2
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::properties::FluidPair;
use crate::timeloop::RunConfig;

pub const PRESETS: &[&str] = &["glycerol85"];

/// Fluid keys that must be present when no preset is given.
const REQUIRED_FLUID_KEYS: &[&str] =
    &["gamma", "rho_d", "rho_c", "mu_d", "mu_c", "u_in", "u_c", "h_in", "r_tube", "c_shear", "g"];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub preset: Option<String>,
    pub fluid: FluidPair,
    pub run: RunConfig,
}

/// Fluid pair and run settings of a named scenario.
pub fn preset(name: &str) -> Result<Config> {
    match name {
        "glycerol85" => {
            let run = RunConfig { lambda: 0.1, theta: 0.9, ..RunConfig::default() };
            Ok(Config { preset: Some(name.to_string()), fluid: FluidPair::glycerol85(), run })
        }
        other => Err(Error::InvalidParameter {
            name: "preset",
            reason: format!("unknown preset `{other}` (available: {})", PRESETS.join(", ")),
        }),
    }
}

fn blank_fluid() -> FluidPair {
    FluidPair {
        gamma: f64::NAN,
        rho_d: f64::NAN,
        rho_c: f64::NAN,
        mu_d: f64::NAN,
        mu_c: f64::NAN,
        nu_d: f64::NAN,
        u_in: f64::NAN,
        u_c: f64::NAN,
        h_in: f64::NAN,
        r_tube: f64::NAN,
        c_shear: f64::NAN,
        dpdz_c: 0.0,
        g: f64::NAN,
        full_pressure_term: false,
    }
}

/// Key/value pairs with their line numbers.
fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config { line, message: format!("empty key or value in `{content}`") });
        }
        if let Some((first, _)) = entries.insert(key.to_string(), (line, value.to_string())) {
            return Err(Error::Config { line, message: format!("duplicate key `{key}` (first set on line {first})") });
        }
    }
    Ok(entries)
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config { line, message: format!("`{key}`: cannot parse `{v}`") })
}

fn apply(cfg: &mut Config, key: &str, line: usize, v: &str) -> Result<()> {
    let f = &mut cfg.fluid;
    let r = &mut cfg.run;
    match key {
        "gamma" => f.gamma = num(line, key, v)?,
        "rho_d" => f.rho_d = num(line, key, v)?,
        "rho_c" => f.rho_c = num(line, key, v)?,
        "mu_d" => f.mu_d = num(line, key, v)?,
        "mu_c" => f.mu_c = num(line, key, v)?,
        "nu_d" => f.nu_d = num(line, key, v)?,
        "u_in" => f.u_in = num(line, key, v)?,
        "u_c" => f.u_c = num(line, key, v)?,
        "h_in" => f.h_in = num(line, key, v)?,
        "r_tube" => f.r_tube = num(line, key, v)?,
        "c_shear" => f.c_shear = num(line, key, v)?,
        "dpdz_c" => f.dpdz_c = num(line, key, v)?,
        "g" => f.g = num(line, key, v)?,
        "full_pressure_term" => f.full_pressure_term = num(line, key, v)?,
        "dt_init" => r.dt_init = num(line, key, v)?,
        "dt_min" => r.dt_min = num(line, key, v)?,
        "dt_max" => r.dt_max = num(line, key, v)?,
        "newton_tol" => r.newton_tol = num(line, key, v)?,
        "newton_max_iters" => r.newton_max_iters = num(line, key, v)?,
        "t_max" => r.t_max = num(line, key, v)?,
        "amr_strategy" => r.amr_strategy = v.parse().map_err(|m| Error::Config { line, message: m })?,
        "lambda" => r.lambda = num(line, key, v)?,
        "theta" => r.theta = num(line, key, v)?,
        "doerfler_accounting" => {
            r.doerfler_accounting = v.parse().map_err(|m| Error::Config { line, message: m })?
        }
        "refine_trigger_n" | "refine_trigger_N" => r.refine_trigger_n = num(line, key, v)?,
        "safety_trigger" => r.safety_trigger = num(line, key, v)?,
        "output_every" => r.output_every = num(line, key, v)?,
        "l0" | "L0" => r.l0 = num(line, key, v)?,
        "n_elements_init" => r.n_elements_init = num(line, key, v)?,
        "quad_order" => r.quad_order = num(line, key, v)?,
        "max_generation" => r.max_generation = num(line, key, v)?,
        "eps_tip" => r.eps_tip = num(line, key, v)?,
        "pinch_threshold" => r.pinch_threshold = num(line, key, v)?,
        "exclusion_fraction" => r.exclusion_fraction = num(line, key, v)?,
        "max_rel_change" => r.max_rel_change = num(line, key, v)?,
        "probe_times" => {
            r.probe_times =
                v.split(',').map(|t| num(line, key, t.trim())).collect::<Result<Vec<f64>>>()?;
        }
        _ => return Err(Error::Config { line, message: format!("unknown key `{key}`") }),
    }
    Ok(())
}

/// Parses configuration text. `seed_preset` applies before any `preset` key
/// in the text; a `preset` key in the text wins over it.
pub fn parse(text: &str, seed_preset: Option<&str>) -> Result<Config> {
    let entries = tokenize(text)?;
    let preset_name = match entries.get("preset") {
        Some((line, name)) => Some(
            preset(name).map(|_| name.as_str()).map_err(|e| Error::Config { line: *line, message: strip(&e) })?,
        ),
        None => seed_preset,
    };
    let mut cfg = match preset_name {
        Some(name) => preset(name)?,
        None => Config { preset: None, fluid: blank_fluid(), run: RunConfig::default() },
    };
    for (key, (line, value)) in &entries {
        if key != "preset" {
            apply(&mut cfg, key, *line, value)?;
        }
    }
    if cfg.preset.is_none() {
        if let Some(missing) = REQUIRED_FLUID_KEYS.iter().find(|k| !entries.contains_key(**k)) {
            return Err(Error::MissingKey(missing.to_string()));
        }
    }
    if !entries.contains_key("nu_d") {
        cfg.fluid.nu_d = cfg.fluid.mu_d / cfg.fluid.rho_d;
    }
    Ok(cfg)
}

fn strip(e: &Error) -> String {
    match e {
        Error::InvalidParameter { reason, .. } => reason.clone(),
        other => other.to_string(),
    }
}

pub fn load(path: &Path, seed_preset: Option<&str>) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&text, seed_preset)
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.fluid.validate()?;
        self.run.validate()
    }

    /// Every key with its effective value. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn to_text(&self) -> String {
        let f = &self.fluid;
        let r = &self.run;
        let mut out = String::from("# effective configuration\n");
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        for (k, v) in [
            ("gamma", f.gamma),
            ("rho_d", f.rho_d),
            ("rho_c", f.rho_c),
            ("mu_d", f.mu_d),
            ("mu_c", f.mu_c),
            ("nu_d", f.nu_d),
            ("u_in", f.u_in),
            ("u_c", f.u_c),
            ("h_in", f.h_in),
            ("r_tube", f.r_tube),
            ("c_shear", f.c_shear),
            ("dpdz_c", f.dpdz_c),
            ("g", f.g),
        ] {
            put(k, format!("{v:?}"));
        }
        put("full_pressure_term", f.full_pressure_term.to_string());
        for (k, v) in [
            ("dt_init", r.dt_init),
            ("dt_min", r.dt_min),
            ("dt_max", r.dt_max),
            ("newton_tol", r.newton_tol),
            ("t_max", r.t_max),
            ("lambda", r.lambda),
            ("theta", r.theta),
            ("safety_trigger", r.safety_trigger),
            ("l0", r.l0),
            ("eps_tip", r.eps_tip),
            ("pinch_threshold", r.pinch_threshold),
            ("exclusion_fraction", r.exclusion_fraction),
            ("max_rel_change", r.max_rel_change),
        ] {
            put(k, format!("{v:?}"));
        }
        put("newton_max_iters", r.newton_max_iters.to_string());
        put("amr_strategy", r.amr_strategy.to_string());
        put("doerfler_accounting", r.doerfler_accounting.to_string());
        put("refine_trigger_n", r.refine_trigger_n.to_string());
        put("output_every", r.output_every.to_string());
        put("n_elements_init", r.n_elements_init.to_string());
        put("quad_order", r.quad_order.to_string());
        put("max_generation", r.max_generation.to_string());
        if !r.probe_times.is_empty() {
            put("probe_times", r.probe_times.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(", "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
gamma = 0.0655
rho_d = 1222
rho_c = 1.2   # air
mu_d = 0.109
mu_c = 1.8e-5
u_in = 5e-3
u_c = 1.0
h_in = 2.5e-3
r_tube = 2.5e-2
c_shear = 1.5
g = 9.81
";

    #[test]
    fn full_fluid_without_preset() {
        let cfg = parse(FULL, None).unwrap();
        assert_eq!(cfg.fluid.gamma, 0.0655);
        assert_eq!(cfg.fluid.dpdz_c, 0.0);
        assert_eq!(cfg.fluid.nu_d, 0.109 / 1222.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn missing_key_is_named() {
        let text = FULL.replace("gamma = 0.0655\n", "");
        let err = parse(&text, None).unwrap_err();
        assert_eq!(err, Error::MissingKey("gamma".into()));
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("preset = glycerol85\n\nlambda = abc\n", None).unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
        let err = parse("# c\nfoo = 1\n", Some("glycerol85")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = parse("t_max = 1\nt_max = 2\n", Some("glycerol85")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = parse("just text\n", None).unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
    }

    #[test]
    fn preset_values_and_overrides() {
        let cfg = parse("preset = glycerol85\nu_in = 1e-2\namr_strategy = max\nprobe_times = 0.1, 0.25\n", None).unwrap();
        assert_eq!(cfg.fluid.u_in, 1e-2);
        assert_eq!(cfg.fluid.h_in, 2.5e-3);
        assert_eq!(cfg.run.amr_strategy, crate::amr::Strategy::MaxThreshold);
        assert_eq!(cfg.run.probe_times, vec![0.1, 0.25]);
        let p = preset("glycerol85").unwrap();
        assert_eq!(p.fluid.u_in / p.fluid.u_c, 5e-3);
        assert_eq!(p.fluid.r_tube / p.fluid.h_in, 10.0);
        assert_eq!((p.run.lambda, p.run.theta), (0.1, 0.9));
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(preset("water").is_err());
        assert!(matches!(parse("preset = water\n", None), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn effective_text_round_trips() {
        let mut cfg = preset("glycerol85").unwrap();
        cfg.run.probe_times = vec![0.1, 1.0 / 3.0];
        cfg.run.amr_strategy = crate::amr::Strategy::None;
        let back = parse(&cfg.to_text(), None).unwrap();
        assert_eq!(back.fluid, cfg.fluid);
        assert_eq!(back.run, cfg.run);
    }
}
