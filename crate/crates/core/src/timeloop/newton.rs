//! Damped Newton iteration for one implicit step, with the droplet length
//! optionally coupled in as a bordered unknown.

use crate::assembly::{apply_boundary_residual, impose_dirichlet, State, StepContext, FIELDS, INTERFACE, MOMENTUM};
use crate::error::{Error, Result};
use crate::properties::FluidPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Required reduction of the scaled residual relative to the first iterate.
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    /// Scaled residual below which the iterate is accepted outright.
    pub atol: f64,
    /// Scaled update below which the iterate is accepted.
    pub stol: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { tol: 1e-8, max_iters: 25, max_halvings: 8, atol: 1e-10, stol: 1e-12 }
    }
}

/// Characteristic magnitudes used to compare residual rows and updates of
/// different physical dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// Acceleration, m/s².
    pub accel: f64,
    /// Velocity, m/s.
    pub velocity: f64,
    /// Length, m.
    pub length: f64,
}

impl Scales {
    pub fn for_fluid(fp: &FluidPair) -> Self {
        let accel = fp.capillary_coefficient() / (fp.h_in * fp.h_in) + fp.g.abs();
        Scales { accel, velocity: (accel * fp.h_in).sqrt().max(fp.u_in.abs()), length: fp.h_in }
    }

    fn row_weights(&self, ctx: &StepContext, length: f64, bcs: &[(usize, f64)]) -> Vec<f64> {
        let mesh = ctx.mesh;
        let n = mesh.n_nodes();
        let mut w = vec![0.0; FIELDS * n];
        for i in 0..n {
            let mut lumped = 0.0;
            if i > 0 {
                lumped += 0.5 * mesh.ref_width(i - 1) * length;
            }
            if i + 1 < n {
                lumped += 0.5 * mesh.ref_width(i) * length;
            }
            w[FIELDS * i] = 1.0 / (self.accel * lumped);
            w[FIELDS * i + 1] = 1.0 / (self.velocity * lumped);
            w[FIELDS * i + 2] = 1.0 / lumped;
        }
        for &(dof, _) in bcs {
            w[dof] = 1.0 / self.unknown_scale(dof % FIELDS);
        }
        w
    }

    fn unknown_scale(&self, field: usize) -> f64 {
        match field {
            MOMENTUM => self.velocity,
            INTERFACE => self.length,
            _ => 1.0,
        }
    }
}

/// How the droplet length enters a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthMode {
    /// Length fixed at the guess value.
    Fixed,
    /// Length solved with the tip kinematic condition L = L_old + dt·u(tip).
    Kinematic,
}

/// New droplet length from the tip kinematic condition.
pub fn advance_length(old_length: f64, u_tip: f64, dt: f64) -> Result<f64> {
    let l = old_length + dt * u_tip;
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(Error::InvalidParameter { name: "length", reason: format!("tip kinematics give non-positive length {l:e}") })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Scaled residual norm before each iteration and after the last one.
    pub history: Vec<f64>,
}

struct Evaluation {
    norm: f64,
}

fn scaled_norm(res: &[f64], weights: &[f64], kin: Option<f64>, scales: &Scales) -> f64 {
    let mut m = res.iter().zip(weights).fold(0.0f64, |m, (r, w)| m.max((r * w).abs()));
    if let Some(k) = kin {
        m = m.max((k / scales.length).abs());
    }
    if m.is_nan() {
        f64::INFINITY
    } else {
        m
    }
}

fn evaluate(
    ctx: &StepContext,
    state: &State,
    bcs: &[(usize, f64)],
    weights: &[f64],
    mode: LengthMode,
    scales: &Scales,
) -> Result<Evaluation> {
    let mut r = ctx.residual(state)?;
    apply_boundary_residual(&mut r, state, bcs);
    let kin = kinematic_residual(ctx, state, mode);
    Ok(Evaluation { norm: scaled_norm(&r, weights, kin, scales) })
}

fn kinematic_residual(ctx: &StepContext, state: &State, mode: LengthMode) -> Option<f64> {
    match mode {
        LengthMode::Fixed => None,
        LengthMode::Kinematic => {
            let tip = state.n_nodes() - 1;
            Some(state.length - ctx.old.length - ctx.dt * state.u[tip])
        }
    }
}

/// Solves the implicit step starting from `guess`. Essential conditions in
/// `bcs` replace their residual rows. Each linear solve is a banded LU; with
/// [`LengthMode::Kinematic`] the length column and kinematic row are
/// eliminated as a border.
pub fn newton_solve(
    ctx: &StepContext,
    guess: State,
    bcs: &[(usize, f64)],
    mode: LengthMode,
    scales: &Scales,
    settings: &NewtonSettings,
) -> Result<(State, NewtonReport)> {
    let mut state = guess;
    for &(dof, v) in bcs {
        let node = dof / FIELDS;
        match dof % FIELDS {
            MOMENTUM => state.u[node] = v,
            INTERFACE => state.h[node] = v,
            _ => state.s[node] = v,
        }
    }
    let tip = state.n_nodes() - 1;
    let weights = scales.row_weights(ctx, state.length, bcs);
    let mut current = evaluate(ctx, &state, bcs, &weights, mode, scales)?;
    let r0 = current.norm;
    let mut history = vec![r0];
    if r0 <= settings.atol {
        return Ok((state, NewtonReport { iterations: 0, history }));
    }
    for iter in 1..=settings.max_iters {
        let mut sys = ctx.assemble(&state)?;
        for &(dof, v) in bcs {
            impose_dirichlet(&mut sys, &state, dof, v);
        }
        let n = sys.residual.len();
        // Row equilibration before factoring.
        let mut rhs = sys.residual.clone();
        for i in 0..n {
            let m = sys.jacobian.row_max(i).max(sys.d_length[i].abs());
            if m > 0.0 {
                let s = 1.0 / m;
                sys.jacobian.scale_row(i, s);
                sys.d_length[i] *= s;
                rhs[i] *= s;
            }
        }
        let lu = sys.jacobian.factor()?;
        let y = lu.solve(&rhs);
        let (delta, delta_l) = match mode {
            LengthMode::Fixed => (y, 0.0),
            LengthMode::Kinematic => {
                let q = lu.solve(&sys.d_length);
                let r_l = kinematic_residual(ctx, &state, mode).unwrap();
                // Kinematic row: δL − dt·δu_tip = r_L.
                let k_tip = -ctx.dt;
                let denom = 1.0 - k_tip * q[FIELDS * tip];
                if denom == 0.0 || !denom.is_finite() {
                    return Err(Error::SingularMatrix { column: n });
                }
                let dl = (r_l - k_tip * y[FIELDS * tip]) / denom;
                let d: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a - b * dl).collect();
                (d, dl)
            }
        };
        let step_norm = delta
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (k, d)| m.max((d / scales.unknown_scale(k % FIELDS)).abs()))
            .max((delta_l / scales.length).abs());
        if !step_norm.is_finite() {
            return Err(Error::SingularMatrix { column: 0 });
        }

        let x0 = state.pack();
        let mut alpha = 1.0;
        let mut fallback = None;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let mut trial = state.clone();
            let x: Vec<f64> = x0.iter().zip(&delta).map(|(a, d)| a - alpha * d).collect();
            trial.unpack(&x);
            trial.length = state.length - alpha * delta_l;
            if trial.length > 0.0 {
                let w = scales.row_weights(ctx, trial.length, bcs);
                if let Ok(ev) = evaluate(ctx, &trial, bcs, &w, mode, scales) {
                    if ev.norm < current.norm {
                        accepted = Some((trial, ev, alpha));
                        break;
                    }
                    if ev.norm.is_finite() {
                        fallback = Some((trial, ev, alpha));
                    }
                }
            }
            alpha *= 0.5;
        }
        // No decrease after all halvings: take the most damped admissible step.
        let Some((trial, ev, alpha)) = accepted.or(fallback) else {
            return Err(Error::NonConvergence { iterations: iter, residual: current.norm });
        };
        state = trial;
        current = ev;
        history.push(current.norm);
        if current.norm <= settings.tol * r0 || current.norm <= settings.atol || alpha * step_norm <= settings.stol {
            return Ok((state, NewtonReport { iterations: iter, history }));
        }
    }
    Err(Error::NonConvergence { iterations: settings.max_iters, residual: current.norm })
}
