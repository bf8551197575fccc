//! Manufactured-solution verification on a fixed domain.
//!
//! The exact fields are linear in time, so backward Euler reproduces them
//! without truncation error and the measured error is purely spatial.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::assembly::{Forcing, State, StepContext, FIELDS, INTERFACE, MOMENTUM};
use crate::error::{invalid, Result};
use crate::estimator::effectivity;
use crate::mesh::Mesh1D;
use crate::properties::{viscosity_ratio_terms, FluidPair};
use crate::quadrature::GaussRule;
use crate::timeloop::{newton_solve, project_gradient, LengthMode, NewtonSettings, Scales};

/// Exact fields and the derivatives needed by the strong form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPoint {
    pub u: f64,
    pub u_t: f64,
    pub u_z: f64,
    pub u_zz: f64,
    pub h: f64,
    pub h_t: f64,
    pub h_z: f64,
    pub h_zz: f64,
    pub h_zzz: f64,
}

/// Smooth manufactured solution on [0, length]:
///
/// h* = h_in (1 + a_h sin(πx) + b_h (t/τ) sin(2πx)),
/// u* = u_in (1 + x + a_u sin(πx)(1 + t/τ)), x = z/length.
#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    pub fp: FluidPair,
    pub length: f64,
    pub tau: f64,
    pub a_h: f64,
    pub b_h: f64,
    pub a_u: f64,
    pub t_final: f64,
    pub n_steps: usize,
    pub quad_order: usize,
}

impl Manufactured {
    /// Glycerol properties on a domain two inlet radii long.
    pub fn standard() -> Self {
        let fp = FluidPair::glycerol85();
        let length = 2.0 * fp.h_in;
        Manufactured { fp, length, tau: 0.1, a_h: -0.3, b_h: 0.1, a_u: 0.5, t_final: 0.02, n_steps: 4, quad_order: 3 }
    }

    pub fn exact(&self, z: f64, t: f64) -> ExactPoint {
        let (hi, ui) = (self.fp.h_in, self.fp.u_in);
        let x = z / self.length;
        let p = PI / self.length;
        let q = 2.0 * p;
        let (s1, c1) = (PI * x).sin_cos();
        let (s2, c2) = (2.0 * PI * x).sin_cos();
        let tt = t / self.tau;
        let (a, b, au) = (self.a_h, self.b_h, self.a_u);
        ExactPoint {
            h: hi * (1.0 + a * s1 + b * tt * s2),
            h_t: hi * b * s2 / self.tau,
            h_z: hi * (a * p * c1 + b * tt * q * c2),
            h_zz: -hi * (a * p * p * s1 + b * tt * q * q * s2),
            h_zzz: -hi * (a * p.powi(3) * c1 + b * tt * q.powi(3) * c2),
            u: ui * (1.0 + x + au * s1 * (1.0 + tt)),
            u_t: ui * au * s1 / self.tau,
            u_z: ui * (1.0 / self.length + au * p * c1 * (1.0 + tt)),
            u_zz: -ui * au * p * p * s1 * (1.0 + tt),
        }
    }

    /// Discrete solution at `t_final` on a uniform mesh.
    pub fn solve(&self, n_elements: usize) -> Result<(Mesh1D, State)> {
        if self.n_steps == 0 || !(self.t_final > 0.0) {
            return Err(invalid("n_steps", "need at least one step and a positive final time"));
        }
        let mesh = Mesh1D::build_uniform(n_elements, self.length)?;
        let n = mesh.n_nodes();
        let nodes = mesh.node_positions();
        let h: Vec<f64> = nodes.iter().map(|&z| self.exact(z, 0.0).h).collect();
        let u: Vec<f64> = nodes.iter().map(|&z| self.exact(z, 0.0).u).collect();
        let s = project_gradient(&mesh, &h)?;
        let mut state = State { u, h, s, length: self.length, t: 0.0 };
        let dt = self.t_final / self.n_steps as f64;
        let scales = Scales::for_fluid(&self.fp);
        let settings = NewtonSettings { tol: 1e-12, atol: 1e-13, ..NewtonSettings::default() };
        for k in 1..=self.n_steps {
            let t = k as f64 * dt;
            let ctx = StepContext::new(&mesh, &state, dt, &self.fp, self.quad_order, Some(self))?;
            let (left, right) = (self.exact(0.0, t), self.exact(self.length, t));
            let bcs = [
                (MOMENTUM, left.u),
                (INTERFACE, left.h),
                (FIELDS * (n - 1) + MOMENTUM, right.u),
                (FIELDS * (n - 1) + INTERFACE, right.h),
            ];
            let mut guess = state.clone();
            guess.t = t;
            state = newton_solve(&ctx, guess, &bcs, LengthMode::Fixed, &scales, &settings)?.0;
        }
        Ok((mesh, state))
    }

    /// L² errors of h and u against the exact fields at the state's time.
    pub fn l2_errors(&self, mesh: &Mesh1D, state: &State) -> (f64, f64) {
        let rule = GaussRule::new(5);
        let (mut eh, mut eu) = (0.0, 0.0);
        for e in 0..mesh.n_elements() {
            let z0 = mesh.z(e);
            let w = mesh.width(e);
            for (x, wq) in rule.iter() {
                let ex = self.exact(z0 + x * w, state.t);
                let h = state.h[e] + (state.h[e + 1] - state.h[e]) * x;
                let u = state.u[e] + (state.u[e + 1] - state.u[e]) * x;
                eh += wq * w * (h - ex.h).powi(2);
                eu += wq * w * (u - ex.u).powi(2);
            }
        }
        (eh.sqrt(), eu.sqrt())
    }
}

impl Forcing for Manufactured {
    fn momentum(&self, z: f64, t: f64) -> f64 {
        let e = self.exact(z, t);
        let fp = &self.fp;
        let (a1, a2) = viscosity_ratio_terms(fp);
        let nu = fp.nu_d;
        let r2 = 1.0 + e.h_z * e.h_z;
        let r = r2.sqrt();
        let r3 = r2 * r;
        let dk = -e.h_z / (e.h * e.h * r) - e.h_z * e.h_zz / (e.h * r3) - e.h_zzz / r3
            + 3.0 * e.h_z * e.h_zz * e.h_zz / (r3 * r2);
        let source = fp.pressure_forcing().unwrap_or(0.0) - fp.body_acceleration();
        e.u_t + e.u * e.u_z - 6.0 * nu * a1 * e.h_z * e.u_z / e.h - 3.0 * nu * a2 * e.u_zz
            + fp.capillary_coefficient() * dk
            + source
    }

    fn interface(&self, z: f64, t: f64) -> f64 {
        let e = self.exact(z, t);
        e.h_t + e.u * e.h_z + 0.5 * e.h * e.u_z
    }
}

/// One row of the convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsLevel {
    pub n_elements: usize,
    pub l2_err_h: f64,
    pub rate_h: Option<f64>,
    pub l2_err_u: f64,
    pub rate_u: Option<f64>,
    pub eta_global: f64,
    pub effectivity: f64,
    pub empirical_c: f64,
}

/// Solves on `levels` uniform meshes starting at `n0` elements, doubling
/// each time.
pub fn convergence_study(problem: &Manufactured, levels: usize, n0: usize) -> Result<Vec<MmsLevel>> {
    if levels == 0 {
        return Err(invalid("levels", "need at least one level"));
    }
    let mut rows: Vec<MmsLevel> = Vec::with_capacity(levels);
    for k in 0..levels {
        let n = n0 << k;
        let (mesh, state) = problem.solve(n)?;
        let (eh, eu) = problem.l2_errors(&mesh, &state);
        let t = state.t;
        let eff = effectivity(&state, &mesh, |z| problem.exact(z, t).h_z, problem.quad_order)?;
        let (rate_h, rate_u) = match rows.last() {
            Some(prev) => (Some((prev.l2_err_h / eh).log2()), Some((prev.l2_err_u / eu).log2())),
            None => (None, None),
        };
        rows.push(MmsLevel {
            n_elements: n,
            l2_err_h: eh,
            rate_h,
            l2_err_u: eu,
            rate_u,
            eta_global: eff.eta_global,
            effectivity: eff.index,
            empirical_c: eff.c,
        });
    }
    Ok(rows)
}

/// Whitespace-aligned table with a header row; missing rates print as "-".
pub fn format_table(rows: &[MmsLevel]) -> String {
    let rate = |r: Option<f64>| r.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    let mut out = format!(
        "{:>10} {:>12} {:>8} {:>12} {:>8} {:>12} {:>11} {:>11}\n",
        "n_elements", "L2_err_h", "rate_h", "L2_err_u", "rate_u", "eta_global", "effectivity", "empirical_c"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>10} {:>12.4e} {:>8} {:>12.4e} {:>8} {:>12.4e} {:>11.4} {:>11.4}",
            r.n_elements,
            r.l2_err_h,
            rate(r.rate_h),
            r.l2_err_u,
            rate(r.rate_u),
            r.eta_global,
            r.effectivity,
            r.empirical_c
        );
    }
    out
}
