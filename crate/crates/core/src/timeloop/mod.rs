//! Time integration of the droplet: implicit steps with the length solved
//! self-consistently, step-size control, the refinement cycle at length
//! milestones, and termination at pinch-off.

mod newton;

pub use newton::{advance_length, newton_solve, LengthMode, NewtonReport, NewtonSettings, Scales};

use crate::amr::{refine_cycle, DoerflerAccounting, RefineParams, RefinementRecord, Strategy};
use crate::assembly::{droplet_dirichlet, State, StepContext, TipModel};
use crate::banded::BandedMatrix;
use crate::error::{invalid, Error, Result};
use crate::estimator::{estimate, ErrorField};
use crate::mesh::Mesh1D;
use crate::physics::{detect_pinch, find_neck};
use crate::properties::FluidPair;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub t_max: f64,
    pub amr_strategy: Strategy,
    /// Max-threshold fraction λ.
    pub lambda: f64,
    /// Dörfler bulk fraction θ.
    pub theta: f64,
    pub doerfler_accounting: DoerflerAccounting,
    /// Smallest N for which crossing L = N·h_in triggers refinement.
    pub refine_trigger_n: u32,
    /// Also refine each time the neck radius halves below this multiple of h_in.
    pub safety_trigger: f64,
    pub output_every: usize,
    /// Initial droplet length, m. Zero means h_in.
    pub l0: f64,
    pub n_elements_init: usize,
    pub quad_order: usize,
    pub max_generation: u32,
    /// Tip radius as a multiple of h_in.
    pub eps_tip: f64,
    /// Pinch threshold as a multiple of h_in.
    pub pinch_threshold: f64,
    pub exclusion_fraction: f64,
    /// Largest accepted relative change of h at any non-tip node per step.
    pub max_rel_change: f64,
    /// Times at which the step lands exactly and the profile is recorded.
    pub probe_times: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dt_init: 1e-3,
            dt_min: 1e-10,
            dt_max: 1e-3,
            newton_tol: 1e-8,
            newton_max_iters: 25,
            t_max: 5.0,
            amr_strategy: Strategy::Doerfler,
            lambda: 0.1,
            theta: 0.9,
            doerfler_accounting: DoerflerAccounting::SumOfSquares,
            refine_trigger_n: 2,
            safety_trigger: 0.2,
            output_every: 50,
            l0: 0.0,
            n_elements_init: 200,
            quad_order: 3,
            max_generation: 12,
            eps_tip: 1e-3,
            pinch_threshold: 1e-2,
            exclusion_fraction: 0.05,
            max_rel_change: 0.1,
            probe_times: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(invalid("dt_init", "need 0 < dt_min <= dt_init <= dt_max"));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol < 1.0) {
            return Err(invalid("newton_tol", "must lie in (0, 1)"));
        }
        if self.newton_max_iters == 0 {
            return Err(invalid("newton_max_iters", "must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(invalid("lambda", "must lie in (0, 1]"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(invalid("theta", "must lie in (0, 1]"));
        }
        if self.n_elements_init < crate::mesh::MIN_ELEMENTS {
            return Err(invalid("n_elements_init", "need at least 4 elements"));
        }
        if !(0.0..0.5).contains(&self.exclusion_fraction) {
            return Err(invalid("exclusion_fraction", "must lie in [0, 0.5)"));
        }
        if !(self.eps_tip > 0.0 && self.eps_tip < 1.0) {
            return Err(invalid("eps_tip", "must lie in (0, 1)"));
        }
        if !(self.pinch_threshold > 0.0 && self.max_rel_change > 0.0 && self.l0 >= 0.0) {
            return Err(invalid("pinch_threshold", "thresholds must be positive"));
        }
        if self.output_every == 0 {
            return Err(invalid("output_every", "must be positive"));
        }
        if !self.t_max.is_finite() {
            return Err(invalid("t_max", "must be finite"));
        }
        Ok(())
    }

    /// Marking parameter of the active strategy.
    pub fn marking_parameter(&self) -> f64 {
        match self.amr_strategy {
            Strategy::Doerfler => self.theta,
            _ => self.lambda,
        }
    }

    fn refine_params(&self) -> RefineParams {
        RefineParams {
            strategy: self.amr_strategy,
            parameter: self.marking_parameter(),
            accounting: self.doerfler_accounting,
            max_generation: self.max_generation,
            quad_order: self.quad_order,
        }
    }
}

/// Hemispherical cap h = h_in √(1 − ζ²) on [0, L0], with the tip node at
/// ε_tip, uniform inlet velocity, and s the L² projection of ∂h/∂z.
pub fn initial_state(mesh: &Mesh1D, fp: &FluidPair, eps_tip: f64) -> Result<State> {
    let n = mesh.n_nodes();
    let mut h: Vec<f64> = mesh.ref_coords().iter().map(|z| fp.h_in * (1.0 - z * z).max(0.0).sqrt()).collect();
    h[n - 1] = eps_tip;
    let s = project_gradient(mesh, &h)?;
    Ok(State { u: vec![fp.u_in; n], h, s, length: mesh.length(), t: 0.0 })
}

/// L² projection of the broken gradient of a P1 field onto P1.
pub fn project_gradient(mesh: &Mesh1D, h: &[f64]) -> Result<Vec<f64>> {
    let n = mesh.n_nodes();
    let mut m = BandedMatrix::zeros(n, 1, 1);
    let mut b = vec![0.0; n];
    for e in 0..mesh.n_elements() {
        let w = mesh.width(e);
        let g = (h[e + 1] - h[e]) / w;
        m.add(e, e, w / 3.0);
        m.add(e + 1, e + 1, w / 3.0);
        m.add(e, e + 1, w / 6.0);
        m.add(e + 1, e, w / 6.0);
        b[e] += 0.5 * w * g;
        b[e + 1] += 0.5 * w * g;
    }
    Ok(m.factor()?.solve(&b))
}

/// Mesh and state at one instant, handed to snapshot consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub mesh: Mesh1D,
    pub state: State,
    pub error: ErrorField,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// t_max was not positive.
    NoSteps,
    Pinched,
    TimeLimit,
    /// Unrecoverable failure; the last good snapshot is in the report.
    HardFailure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinchEvent {
    pub t: f64,
    pub z: f64,
    pub h_min: f64,
    /// π∫h² dz from the pinch point to the tip, m³.
    pub droplet_volume: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub length: f64,
    pub newton_iters: usize,
    pub n_elements: usize,
    /// |ΔV − dt·(net inflow)| / V for the step.
    pub volume_defect: f64,
    pub h_neck: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementEvent {
    pub step: usize,
    pub t: f64,
    pub trigger: String,
    pub record: RefinementRecord,
    /// Global estimate after re-solving on the refined mesh.
    pub eta_global_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub outcome: Outcome,
    pub pinch: Option<PinchEvent>,
    pub n_steps: usize,
    pub steps: Vec<StepRecord>,
    pub refinements: Vec<RefinementEvent>,
    /// Snapshots taken at the configured probe times.
    pub probes: Vec<Snapshot>,
    /// Last accepted state.
    pub final_snapshot: Snapshot,
    /// Run log lines: step-size changes, refinements, termination.
    pub log: Vec<String>,
}

impl RunReport {
    pub fn n_refinements(&self) -> usize {
        self.refinements.len()
    }

    /// Total elements marked and bisected over the run.
    pub fn elements_refined(&self) -> usize {
        self.refinements.iter().map(|r| r.record.n_marked).sum()
    }

    pub fn max_volume_defect(&self) -> f64 {
        self.steps.iter().map(|s| s.volume_defect).fold(0.0, f64::max)
    }

    pub fn probe_at(&self, t: f64) -> Option<&Snapshot> {
        self.probes.iter().find(|p| (p.state.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Runs without a snapshot consumer.
pub fn run(config: &RunConfig, fp: &FluidPair) -> Result<RunReport> {
    run_with(config, fp, |_| Ok(()))
}

fn volume_defect(old: &State, new: &State, mesh_old: &Mesh1D, mesh_new: &Mesh1D, fp: &FluidPair, dt: f64) -> f64 {
    let tip = new.n_nodes() - 1;
    let v_old = old.volume(mesh_old);
    let v_new = new.volume(mesh_new);
    let dldt = (new.length - old.length) / dt;
    let h_tip = new.h[tip];
    let flux = std::f64::consts::PI * (fp.h_in * fp.h_in * new.u[0] - h_tip * h_tip * new.u[tip] + h_tip * h_tip * dldt);
    ((v_new - v_old) - dt * flux).abs() / v_new
}

struct StepOutcome {
    state: State,
    iterations: usize,
}

fn solve_step(
    mesh: &Mesh1D,
    old: &State,
    dt: f64,
    fp: &FluidPair,
    config: &RunConfig,
    scales: &Scales,
    settings: &NewtonSettings,
) -> Result<StepOutcome> {
    let eps_tip = config.eps_tip * fp.h_in;
    let ctx = StepContext::new(mesh, old, dt, fp, config.quad_order, None)?;
    let tip = old.n_nodes() - 1;
    let mut guess = old.clone();
    guess.t = old.t + dt;
    guess.length = advance_length(old.length, old.u[tip], dt)?;
    let bcs = droplet_dirichlet(old.n_nodes(), fp, TipModel::Pinned { eps_tip });
    let (state, rep) = newton_solve(&ctx, guess, &bcs, LengthMode::Kinematic, scales, settings)?;
    if let Some((i, _)) = state.h.iter().enumerate().take(tip).find(|(_, &h)| !(h > 0.0)) {
        return Err(Error::SingularCurvature { z: mesh.ref_coords()[i] * state.length, h: state.h[i] });
    }
    Ok(StepOutcome { state, iterations: rep.iterations })
}

/// Appends a run-log line and forwards it to the `log` facade; step-size
/// changes go to debug level.
fn note(log: &mut Vec<String>, line: String) {
    if line.starts_with("step ") {
        log::debug!("{line}");
    } else {
        log::info!("{line}");
    }
    log.push(line);
}

/// Largest relative change of h over non-tip nodes.
fn relative_change(old: &State, new: &State) -> f64 {
    let tip = new.n_nodes() - 1;
    (0..tip).map(|i| ((new.h[i] - old.h[i]) / old.h[i]).abs()).fold(0.0, f64::max)
}

/// Runs the droplet simulation, passing snapshots to `on_snapshot` every
/// `output_every` steps, after each refinement, and at termination.
pub fn run_with(
    config: &RunConfig,
    fp: &FluidPair,
    mut on_snapshot: impl FnMut(&Snapshot) -> Result<()>,
) -> Result<RunReport> {
    config.validate()?;
    fp.validate()?;
    let scales = Scales::for_fluid(fp);
    let settings = NewtonSettings { tol: config.newton_tol, max_iters: config.newton_max_iters, ..Default::default() };
    let l0 = if config.l0 > 0.0 { config.l0 } else { fp.h_in };
    let mut mesh = Mesh1D::build_uniform(config.n_elements_init, l0)?;
    let mut state = initial_state(&mesh, fp, config.eps_tip * fp.h_in)?;
    let mut log = Vec::new();
    let mut steps = Vec::new();
    let mut refinements: Vec<RefinementEvent> = Vec::new();
    let mut probes = Vec::new();
    let snap = |step: usize, mesh: &Mesh1D, state: &State, quad: usize| Snapshot {
        step,
        mesh: mesh.clone(),
        state: state.clone(),
        error: estimate(state, mesh, quad),
    };

    note(&mut log, format!(
        "start strategy={} parameter={} n_elements={} L0={:e} dt_init={:e}",
        config.amr_strategy,
        config.marking_parameter(),
        mesh.n_elements(),
        l0,
        config.dt_init
    ));
    let first = snap(0, &mesh, &state, config.quad_order);
    if !(config.t_max > 0.0) {
        note(&mut log, "t_max <= 0: no steps taken".into());
        return Ok(RunReport {
            outcome: Outcome::NoSteps,
            pinch: None,
            n_steps: 0,
            steps,
            refinements,
            probes,
            final_snapshot: first,
            log,
        });
    }
    on_snapshot(&first)?;

    let params = config.refine_params();
    let h_in = fp.h_in;
    let mut dt = config.dt_init;
    let mut step = 0usize;
    let mut easy_streak = 0usize;
    let mut next_n = config.refine_trigger_n.max(1);
    while (next_n as f64) * h_in <= state.length {
        next_n += 1;
    }
    let mut safety_level = config.safety_trigger * h_in;
    let mut probe_idx = 0usize;
    let mut probe_list = config.probe_times.clone();
    probe_list.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut last_snapshot_step = 0usize;
    let outcome;
    let mut pinch = None;

    loop {
        if state.t >= config.t_max * (1.0 - 1e-12) {
            note(&mut log, format!("t_max reached at t={:e} after {} steps", state.t, step));
            outcome = Outcome::TimeLimit;
            break;
        }
        let mut dt_try = dt.min(config.t_max - state.t);
        while probe_idx < probe_list.len() && probe_list[probe_idx] <= state.t * (1.0 + 1e-12) {
            probe_idx += 1;
        }
        let mut hits_probe = false;
        if probe_idx < probe_list.len() && state.t + dt_try >= probe_list[probe_idx] {
            dt_try = probe_list[probe_idx] - state.t;
            hits_probe = true;
        }

        let attempt = solve_step(&mesh, &state, dt_try, fp, config, &scales, &settings).map_err(|e| e.to_string()).and_then(|out| {
            let change = relative_change(&state, &out.state);
            if change > config.max_rel_change {
                Err(format!("relative change {change:.3} above limit"))
            } else {
                Ok(out)
            }
        });
        let out = match attempt {
            Ok(out) => out,
            Err(cause) => {
                let new_dt = 0.5 * dt_try;
                easy_streak = 0;
                if new_dt < config.dt_min {
                    let msg = Error::TimeStepUnderflow { t: state.t, dt: new_dt, cause }.to_string();
                    note(&mut log, format!("hard failure: {msg}"));
                    outcome = Outcome::HardFailure(msg);
                    break;
                }
                note(&mut log, format!("step {} t={:e} dt {:e} -> {:e} (halve: {})", step + 1, state.t, dt_try, new_dt, cause));
                dt = new_dt;
                continue;
            }
        };

        let old = std::mem::replace(&mut state, out.state);
        let old_mesh = mesh.clone();
        mesh = mesh.grow_domain(state.length)?;
        step += 1;
        let defect = volume_defect(&old, &state, &old_mesh, &mesh, fp, dt_try);
        let neck = find_neck(&state, &mesh, config.exclusion_fraction);
        steps.push(StepRecord {
            step,
            t: state.t,
            dt: dt_try,
            length: state.length,
            newton_iters: out.iterations,
            n_elements: mesh.n_elements(),
            volume_defect: defect,
            h_neck: neck.map(|n| n.h_min),
        });

        // Step-size growth after easy steps; probe landings do not count as a
        // controller decision.
        if !hits_probe {
            if out.iterations <= 5 {
                easy_streak += 1;
            } else {
                easy_streak = 0;
            }
            if easy_streak >= 3 && dt < config.dt_max {
                let new_dt = (dt * 1.2).min(config.dt_max);
                note(&mut log, format!("step {step} t={:e} dt {:e} -> {:e} (grow: 3 easy steps)", state.t, dt, new_dt));
                dt = new_dt;
                easy_streak = 0;
            }
        }

        // Refinement triggers.
        let mut trigger = None;
        if params.strategy != Strategy::None {
            if state.length >= next_n as f64 * h_in {
                let n_now = (state.length / h_in).floor() as u32;
                trigger = Some(format!("length L/h_in={:.3} crossed N={}", state.length / h_in, next_n));
                next_n = n_now.max(next_n) + 1;
            } else if let Some(nk) = neck {
                if nk.h_min < safety_level {
                    trigger = Some(format!("neck h/h_in={:.4} below {:.4}", nk.h_min / h_in, safety_level / h_in));
                    while nk.h_min < safety_level {
                        safety_level *= 0.5;
                    }
                }
            }
        }
        if let Some(cause) = trigger {
            match refine_cycle(&state, &mesh, &params) {
                Ok((_, fine, record)) if record.n_marked > 0 => {
                    // Re-solve the current step on the refined mesh.
                    let (_, old_fields) = old_mesh.bisect(&record.marked, &[&old.u, &old.h, &old.s])?;
                    let mut it = old_fields.into_iter();
                    let old_fine = State {
                        u: it.next().unwrap(),
                        h: it.next().unwrap(),
                        s: it.next().unwrap(),
                        length: old.length,
                        t: old.t,
                    };
                    let fine_old_mesh = fine.grow_domain(old.length)?;
                    note(&mut log, format!(
                        "refine step={} t={:e} trigger=\"{}\" strategy={} marked={} capped={} elements {} -> {} eta_before={:e}",
                        step,
                        state.t,
                        cause,
                        record.strategy,
                        record.n_marked,
                        record.n_capped,
                        record.elements_before,
                        record.elements_after,
                        record.eta_global_before
                    ));
                    let resolved = solve_step(&fine_old_mesh, &old_fine, dt_try, fp, config, &scales, &settings);
                    let eta_after = match resolved {
                        Ok(out) => {
                            state = out.state;
                            mesh = fine_old_mesh.grow_domain(state.length)?;
                            let e = estimate(&state, &mesh, config.quad_order).eta_global;
                            note(&mut log, format!("refine step={step} re-solve eta_after={e:e}"));
                            Some(e)
                        }
                        Err(e) => {
                            // Keep the refined mesh and redo the step from the
                            // transferred previous state.
                            note(&mut log, format!("refine step={step} re-solve failed ({e}); retrying with dt/2"));
                            state = old_fine;
                            mesh = fine_old_mesh;
                            step -= 1;
                            steps.pop();
                            dt = 0.5 * dt_try;
                            refinements.push(RefinementEvent { step: step + 1, t: old.t + dt_try, trigger: cause, record, eta_global_after: None });
                            continue;
                        }
                    };
                    if let Some(last) = steps.last_mut() {
                        last.n_elements = mesh.n_elements();
                        last.volume_defect = volume_defect(&old, &state, &old_mesh, &mesh, fp, dt_try);
                    }
                    refinements.push(RefinementEvent { step, t: state.t, trigger: cause, record, eta_global_after: eta_after });
                    on_snapshot(&snap(step, &mesh, &state, config.quad_order))?;
                    last_snapshot_step = step;
                }
                Ok(_) => note(&mut log, format!("refine step={step} trigger=\"{cause}\": nothing marked")),
                Err(Error::RefinementExhausted(m)) => note(&mut log, format!("refine step={step} skipped: {m}")),
                Err(e) => return Err(e),
            }
        }

        if hits_probe {
            probes.push(snap(step, &mesh, &state, config.quad_order));
        }
        if step.is_multiple_of(config.output_every) && last_snapshot_step != step {
            on_snapshot(&snap(step, &mesh, &state, config.quad_order))?;
            last_snapshot_step = step;
        }

        if let Some(nk) = detect_pinch(&state, &mesh, config.exclusion_fraction, config.pinch_threshold * h_in) {
            let volume = state.volume_between(&mesh, nk.zeta);
            note(&mut log, format!(
                "pinch step={} t={:e} z={:e} h_min={:e} droplet_volume={:e}",
                step, state.t, nk.z, nk.h_min, volume
            ));
            pinch = Some(PinchEvent { t: state.t, z: nk.z, h_min: nk.h_min, droplet_volume: volume });
            outcome = Outcome::Pinched;
            break;
        }
    }

    let final_snapshot = snap(step, &mesh, &state, config.quad_order);
    if last_snapshot_step != step || step == 0 {
        on_snapshot(&final_snapshot)?;
    }
    Ok(RunReport { outcome, pinch, n_steps: step, steps, refinements, probes, final_snapshot, log })
}
