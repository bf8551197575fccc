//! Discrete residual and Jacobian of the mixed weak form.
//!
//! Unknowns are interleaved per node as (u, h, s). The momentum row carries
//! the capillary force split into a bulk part under the test function and a
//! flux part against its gradient; the interface row is the kinematic
//! equation; the slope row is the L² projection s = ∂h/∂z. Time derivatives
//! are backward Euler on the reference mesh with the ALE correction
//! −w ∂f/∂z for nodes that move with the droplet length.

use crate::banded::BandedMatrix;
use crate::dual::{Dual, Scalar};
use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh1D;
use crate::physics::{curvature_bulk, curvature_flux};
use crate::properties::{viscosity_ratio_terms, FluidPair};
use crate::quadrature::GaussRule;

pub const FIELDS: usize = 3;
pub const MOMENTUM: usize = 0;
pub const INTERFACE: usize = 1;
pub const SLOPE: usize = 2;

/// Lower and upper bandwidth of the P1 Jacobian with interleaved unknowns.
pub const BANDWIDTH: usize = 2 * FIELDS - 1;

/// Nodal solution at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Axial velocity, m/s.
    pub u: Vec<f64>,
    /// Interface radius, m.
    pub h: Vec<f64>,
    /// Mixed slope ≈ ∂h/∂z.
    pub s: Vec<f64>,
    /// Droplet length, m.
    pub length: f64,
    /// Time, s.
    pub t: f64,
}

impl State {
    pub fn n_nodes(&self) -> usize {
        self.h.len()
    }

    pub fn dof(node: usize, field: usize) -> usize {
        FIELDS * node + field
    }

    /// Interleaved (u, h, s) vector.
    pub fn pack(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(FIELDS * self.n_nodes());
        for i in 0..self.n_nodes() {
            x.extend_from_slice(&[self.u[i], self.h[i], self.s[i]]);
        }
        x
    }

    pub fn unpack(&mut self, x: &[f64]) {
        for i in 0..self.n_nodes() {
            self.u[i] = x[FIELDS * i];
            self.h[i] = x[FIELDS * i + 1];
            self.s[i] = x[FIELDS * i + 2];
        }
    }

    /// Volume π∫h² dz, exact for piecewise-linear h.
    pub fn volume(&self, mesh: &Mesh1D) -> f64 {
        self.volume_between(mesh, 0.0)
    }

    /// π∫h² dz over ζ ≥ `zeta_from`.
    pub fn volume_between(&self, mesh: &Mesh1D, zeta_from: f64) -> f64 {
        let zeta = mesh.ref_coords();
        let mut v = 0.0;
        for e in 0..mesh.n_elements() {
            let (a, b) = (zeta[e].max(zeta_from), zeta[e + 1]);
            if b <= a {
                continue;
            }
            let ha = mesh.interpolate(&self.h, a);
            let hb = self.h[e + 1];
            v += (b - a) * self.length * (ha * ha + ha * hb + hb * hb) / 3.0;
        }
        std::f64::consts::PI * v
    }
}

/// Body forcing added to the strong equations, used by manufactured
/// solutions. Both terms are subtracted from the residual.
pub trait Forcing {
    fn momentum(&self, z: f64, t: f64) -> f64;
    fn interface(&self, z: f64, t: f64) -> f64;
}

/// Residual, banded Jacobian with respect to the nodal unknowns, and the
/// Jacobian column with respect to the droplet length.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub residual: Vec<f64>,
    pub jacobian: BandedMatrix,
    pub d_length: Vec<f64>,
}

/// Treatment of the h row at the droplet tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TipModel {
    /// h(tip) = ε_tip.
    Pinned { eps_tip: f64 },
    /// No essential condition at the tip.
    Free,
}

/// Inputs that stay fixed across Newton iterations of one step.
pub struct StepContext<'a> {
    pub mesh: &'a Mesh1D,
    pub old: &'a State,
    pub dt: f64,
    pub fp: &'a FluidPair,
    pub rule: GaussRule,
    pub forcing: Option<&'a dyn Forcing>,
    coeffs: Coefficients,
}

#[derive(Debug, Clone, Copy)]
struct Coefficients {
    capillary: f64,
    nu: f64,
    a1: f64,
    a2: f64,
    /// Pressure forcing minus net gravity, m/s².
    source: f64,
}

impl<'a> StepContext<'a> {
    pub fn new(
        mesh: &'a Mesh1D,
        old: &'a State,
        dt: f64,
        fp: &'a FluidPair,
        quad_order: usize,
        forcing: Option<&'a dyn Forcing>,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        if old.n_nodes() != mesh.n_nodes() {
            return Err(Error::Mesh(format!(
                "old state has {} nodes, mesh has {}",
                old.n_nodes(),
                mesh.n_nodes()
            )));
        }
        let (a1, a2) = viscosity_ratio_terms(fp);
        let coeffs = Coefficients {
            capillary: fp.capillary_coefficient(),
            nu: fp.nu_d,
            a1,
            a2,
            source: fp.pressure_forcing()? - fp.body_acceleration(),
        };
        Ok(StepContext { mesh, old, dt, fp, rule: GaussRule::new(quad_order), forcing, coeffs })
    }

    /// Element residual contributions, ordered (u0, h0, s0, u1, h1, s1).
    /// `dofs` are the element's nodal unknowns in the same order.
    fn element<T: Scalar>(&self, e: usize, dofs: &[T; 6], length: T, t_new: f64) -> Result<[T; 6]> {
        let c = &self.coeffs;
        let zeta = self.mesh.ref_coords();
        let (z0, z1) = (zeta[e], zeta[e + 1]);
        let width = length * (z1 - z0);
        let inv_w = T::cst(1.0) / width;
        let dldt = (length - self.old.length) / self.dt;
        let inv_dt = 1.0 / self.dt;
        let [u0, h0, s0, u1, h1, s1] = *dofs;
        let uz = (u1 - u0) * inv_w;
        let hz = (h1 - h0) * inv_w;
        let sz = (s1 - s0) * inv_w;
        let o = self.old;
        let (uo0, uo1, ho0, ho1) = (o.u[e], o.u[e + 1], o.h[e], o.h[e + 1]);

        let mut r = [T::cst(0.0); 6];
        for (xi, wq) in self.rule.iter() {
            let (pa, pb) = (1.0 - xi, xi);
            let u = u0 * pa + u1 * pb;
            let h = h0 * pa + h1 * pb;
            let s = s0 * pa + s1 * pb;
            if !(h.value() > 0.0) {
                let zq = (z0 + xi * (z1 - z0)) * length.value();
                return Err(Error::SingularCurvature { z: zq, h: h.value() });
            }
            let zeta_q = z0 + xi * (z1 - z0);
            let w_mesh = dldt * zeta_q;
            let u_old = uo0 * pa + uo1 * pb;
            let h_old = ho0 * pa + ho1 * pb;
            let ut = (u - u_old) * inv_dt - w_mesh * uz;
            let ht = (h - h_old) * inv_dt - w_mesh * hz;

            let mut bulk = ut + u * uz - (s * uz / h) * (6.0 * c.nu * c.a1)
                + curvature_bulk(h, s, sz) * c.capillary
                + c.source;
            let flux = uz * (3.0 * c.nu * c.a2) + curvature_flux(s, sz) * c.capillary;
            let mut kin = ht + u * hz + h * uz * 0.5;
            if let Some(f) = self.forcing {
                let zq = zeta_q * length.value();
                bulk = bulk - f.momentum(zq, t_new);
                kin = kin - f.interface(zq, t_new);
            }
            let proj = s - hz;

            let dv = width * wq;
            r[0] = r[0] + (bulk * pa - flux * inv_w) * dv;
            r[3] = r[3] + (bulk * pb + flux * inv_w) * dv;
            r[1] = r[1] + kin * pa * dv;
            r[4] = r[4] + kin * pb * dv;
            r[2] = r[2] + proj * pa * dv;
            r[5] = r[5] + proj * pb * dv;
        }
        Ok(r)
    }

    /// Boundary flux of the momentum equation at the tip, evaluated from the
    /// last element. Subtracted from the tip momentum row.
    fn tip_flux<T: Scalar>(&self, dofs: &[T; 6], length: T) -> T {
        let c = &self.coeffs;
        let e = self.mesh.n_elements() - 1;
        let inv_w = T::cst(1.0) / (length * self.mesh.ref_width(e));
        let [u0, _, s0, u1, _, s1] = *dofs;
        let uz = (u1 - u0) * inv_w;
        let sz = (s1 - s0) * inv_w;
        uz * (3.0 * c.nu * c.a2) + curvature_flux(s1, sz) * c.capillary
    }

    fn element_dofs(state: &State, e: usize) -> [f64; 6] {
        [state.u[e], state.h[e], state.s[e], state.u[e + 1], state.h[e + 1], state.s[e + 1]]
    }

    fn check(&self, state: &State) -> Result<()> {
        if state.n_nodes() != self.mesh.n_nodes() || state.u.len() != state.h.len() || state.s.len() != state.h.len() {
            return Err(Error::Mesh("state and mesh node counts differ".into()));
        }
        Ok(())
    }

    /// Residual only.
    pub fn residual(&self, state: &State) -> Result<Vec<f64>> {
        self.check(state)?;
        let ne = self.mesh.n_elements();
        let mut res = vec![0.0; FIELDS * self.mesh.n_nodes()];
        for e in 0..ne {
            let dofs = Self::element_dofs(state, e);
            let r = self.element(e, &dofs, state.length, state.t)?;
            for (k, v) in r.iter().enumerate() {
                res[FIELDS * e + k] += v;
            }
        }
        let dofs = Self::element_dofs(state, ne - 1);
        res[State::dof(ne, MOMENTUM)] -= self.tip_flux(&dofs, state.length);
        Ok(res)
    }

    /// Residual with the exact Jacobian.
    pub fn assemble(&self, state: &State) -> Result<DiscreteSystem> {
        self.check(state)?;
        let ne = self.mesh.n_elements();
        let n = FIELDS * self.mesh.n_nodes();
        let mut residual = vec![0.0; n];
        let mut jacobian = BandedMatrix::zeros(n, BANDWIDTH, BANDWIDTH);
        let mut d_length = vec![0.0; n];
        let lvar = Dual::<7>::var(state.length, 6);
        let seed = |e: usize| -> [Dual<7>; 6] {
            let v = Self::element_dofs(state, e);
            std::array::from_fn(|k| Dual::var(v[k], k))
        };
        for e in 0..ne {
            let r = self.element(e, &seed(e), lvar, state.t)?;
            let base = FIELDS * e;
            for (k, rk) in r.iter().enumerate() {
                residual[base + k] += rk.v;
                for j in 0..6 {
                    if rk.d[j] != 0.0 {
                        jacobian.add(base + k, base + j, rk.d[j]);
                    }
                }
                d_length[base + k] += rk.d[6];
            }
        }
        let tip = self.tip_flux(&seed(ne - 1), lvar);
        let row = State::dof(ne, MOMENTUM);
        residual[row] -= tip.v;
        let base = FIELDS * (ne - 1);
        for j in 0..6 {
            if tip.d[j] != 0.0 {
                jacobian.add(row, base + j, -tip.d[j]);
            }
        }
        d_length[row] -= tip.d[6];
        Ok(DiscreteSystem { residual, jacobian, d_length })
    }
}

/// Assembles the system for `state` given the previous level `old` on the
/// same mesh.
pub fn assemble(
    state: &State,
    old: &State,
    dt: f64,
    mesh: &Mesh1D,
    fp: &FluidPair,
    quad_order: usize,
) -> Result<DiscreteSystem> {
    StepContext::new(mesh, old, dt, fp, quad_order, None)?.assemble(state)
}

/// Replaces row `dof` by the essential condition x[dof] = value.
pub fn impose_dirichlet(sys: &mut DiscreteSystem, state: &State, dof: usize, value: f64) {
    let node = dof / FIELDS;
    let current = match dof % FIELDS {
        MOMENTUM => state.u[node],
        INTERFACE => state.h[node],
        _ => state.s[node],
    };
    sys.residual[dof] = current - value;
    sys.jacobian.clear_row(dof);
    sys.jacobian.set(dof, dof, 1.0);
    sys.d_length[dof] = 0.0;
}

/// Dirichlet degrees of freedom for the droplet problem: inlet velocity and
/// radius, plus the tip radius under [`TipModel::Pinned`]. The slope has no
/// essential condition anywhere.
pub fn droplet_dirichlet(n_nodes: usize, fp: &FluidPair, tip: TipModel) -> Vec<(usize, f64)> {
    let mut bc = vec![(State::dof(0, MOMENTUM), fp.u_in), (State::dof(0, INTERFACE), fp.h_in)];
    if let TipModel::Pinned { eps_tip } = tip {
        bc.push((State::dof(n_nodes - 1, INTERFACE), eps_tip));
    }
    bc
}

pub fn apply_boundary_conditions(mut sys: DiscreteSystem, state: &State, fp: &FluidPair, tip: TipModel) -> DiscreteSystem {
    for (dof, v) in droplet_dirichlet(state.n_nodes(), fp, tip) {
        impose_dirichlet(&mut sys, state, dof, v);
    }
    sys
}

/// Residual-only counterpart of [`apply_boundary_conditions`].
pub fn apply_boundary_residual(residual: &mut [f64], state: &State, bcs: &[(usize, f64)]) {
    for &(dof, v) in bcs {
        let node = dof / FIELDS;
        let current = match dof % FIELDS {
            MOMENTUM => state.u[node],
            INTERFACE => state.h[node],
            _ => state.s[node],
        };
        residual[dof] = current - v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fluid() -> FluidPair {
        FluidPair::glycerol85()
    }

    fn cylinder(n: usize, h0: f64, length: f64) -> (Mesh1D, State) {
        let mesh = Mesh1D::build_uniform(n, length).unwrap();
        let st = State { u: vec![0.0; n + 1], h: vec![h0; n + 1], s: vec![0.0; n + 1], length, t: 0.0 };
        (mesh, st)
    }

    #[test]
    fn static_cylinder_is_in_equilibrium() {
        let mut fp = fluid();
        fp.g = 0.0;
        fp.dpdz_c = 0.0;
        let (mesh, st) = cylinder(12, 2.5e-3, 1e-2);
        let sys = assemble(&st, &st, 1e-3, &mesh, &fp, 3).unwrap();
        for i in 1..12 {
            for f in 0..FIELDS {
                assert!(sys.residual[State::dof(i, f)].abs() < 1e-15, "node {i} field {f}");
            }
        }
    }

    #[test]
    fn slope_rows_vanish_for_linear_profile() {
        let fp = fluid();
        let n = 10;
        let mesh = Mesh1D::build_uniform(n, 2e-3).unwrap();
        let m = -0.3;
        let h: Vec<f64> = mesh.node_positions().iter().map(|z| 2.5e-3 + m * z).collect();
        let st = State { u: vec![1e-3; n + 1], h, s: vec![m; n + 1], length: 2e-3, t: 0.0 };
        let sys = assemble(&st, &st, 1e-3, &mesh, &fp, 3).unwrap();
        for i in 0..=n {
            assert!(sys.residual[State::dof(i, SLOPE)].abs() < 1e-18);
        }
    }

    fn random_state(rng: &mut ChaCha8Rng, mesh: &Mesh1D, length: f64) -> State {
        let n = mesh.n_nodes();
        let zeta = mesh.ref_coords();
        State {
            u: (0..n).map(|i| 5e-3 + 2e-2 * zeta[i] + rng.gen_range(-1e-3..1e-3)).collect(),
            h: (0..n).map(|i| 2.5e-3 * (1.0 - 0.6 * zeta[i]) * (1.0 + rng.gen_range(-0.05..0.05))).collect(),
            s: (0..n).map(|_| rng.gen_range(-1.5..0.5)).collect(),
            length,
            t: 0.1,
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let fp = fluid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mesh = Mesh1D::from_parts(
            vec![0.0, 0.1, 0.25, 0.3, 0.5, 0.55, 0.7, 0.9, 1.0],
            4e-3,
            vec![0; 8],
        )
        .unwrap();
        for trial in 0..5 {
            let old = random_state(&mut rng, &mesh, 4e-3);
            let mut st = random_state(&mut rng, &mesh, 4.1e-3);
            st.t = old.t + 1e-3;
            let ctx = StepContext::new(&mesh, &old, 1e-3, &fp, 3, None).unwrap();
            let sys = ctx.assemble(&st).unwrap();
            let x0 = st.pack();
            let dir: Vec<f64> = x0.iter().map(|x| rng.gen_range(-1.0..1.0) * x.abs().max(1e-4)).collect();
            let dl = rng.gen_range(-1.0..1.0) * 1e-4;
            let eps = 1e-7;
            let eval = |sgn: f64| {
                let mut s2 = st.clone();
                let x: Vec<f64> = x0.iter().zip(&dir).map(|(a, d)| a + sgn * eps * d).collect();
                s2.unpack(&x);
                s2.length += sgn * eps * dl;
                ctx.residual(&s2).unwrap()
            };
            let (rp, rm) = (eval(1.0), eval(-1.0));
            let jv = sys.jacobian.mul_vec(&dir);
            let scale = jv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..x0.len() {
                let fd = (rp[i] - rm[i]) / (2.0 * eps);
                let an = jv[i] + sys.d_length[i] * dl;
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(fd.abs()) + 1e-7 * scale,
                    "trial {trial} row {i}: fd {fd:e} vs jac {an:e}"
                );
            }
            let r = ctx.residual(&st).unwrap();
            let rscale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in r.iter().zip(&sys.residual) {
                assert!((a - b).abs() <= 1e-13 * rscale);
            }
        }
    }

    #[test]
    fn singular_radius_is_reported() {
        let fp = fluid();
        let (mesh, mut st) = cylinder(6, 1e-3, 1e-2);
        st.h[3] = -1e-3;
        let err = assemble(&st, &st, 1e-3, &mesh, &fp, 3).unwrap_err();
        assert!(matches!(err, Error::SingularCurvature { .. }));
    }

    #[test]
    fn boundary_conditions_replace_rows() {
        let fp = fluid();
        let (mesh, st) = cylinder(6, 1e-3, 1e-2);
        let sys = assemble(&st, &st, 1e-3, &mesh, &fp, 3).unwrap();
        let sys = apply_boundary_conditions(sys, &st, &fp, TipModel::Pinned { eps_tip: 2.5e-6 });
        assert_eq!(sys.residual[0], 0.0 - fp.u_in);
        assert_eq!(sys.residual[1], 1e-3 - fp.h_in);
        assert_eq!(sys.residual[State::dof(6, INTERFACE)], 1e-3 - 2.5e-6);
        assert_eq!(sys.jacobian.get(1, 1), 1.0);
        assert_eq!(sys.jacobian.get(1, 4), 0.0);
    }

    #[test]
    fn volume_of_cylinder_and_cone() {
        let (mesh, st) = cylinder(7, 2.0, 3.0);
        assert!((st.volume(&mesh) - std::f64::consts::PI * 4.0 * 3.0).abs() < 1e-12);
        let mesh = Mesh1D::build_uniform(5, 1.0).unwrap();
        let h: Vec<f64> = mesh.ref_coords().iter().map(|z| 1.0 - z).collect();
        let st = State { u: vec![0.0; 6], h, s: vec![-1.0; 6], length: 1.0, t: 0.0 };
        assert!((st.volume(&mesh) - std::f64::consts::PI / 3.0).abs() < 1e-14);
        let upper = st.volume_between(&mesh, 0.5);
        assert!((upper - std::f64::consts::PI * 0.125 / 3.0).abs() < 1e-14);
    }
}
