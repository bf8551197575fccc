//! Material and flow parameters of the dispersed/continuous fluid pair.
//!
//! All quantities are SI. The dispersed phase is the droplet-forming liquid
//! issuing from the nozzle; the continuous phase co-flows around it.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FluidPair {
    /// Surface-tension coefficient, N/m.
    pub gamma: f64,
    /// Dispersed-phase density, kg/m³.
    pub rho_d: f64,
    /// Continuous-phase density, kg/m³.
    pub rho_c: f64,
    /// Dispersed-phase dynamic viscosity, Pa·s.
    pub mu_d: f64,
    /// Continuous-phase dynamic viscosity, Pa·s.
    pub mu_c: f64,
    /// Dispersed-phase kinematic viscosity, m²/s. Must equal `mu_d / rho_d`.
    pub nu_d: f64,
    /// Inlet velocity of the dispersed phase, m/s.
    pub u_in: f64,
    /// Co-flow velocity of the continuous phase, m/s.
    pub u_c: f64,
    /// Nozzle inlet radius, m.
    pub h_in: f64,
    /// Outer capillary tube radius, m.
    pub r_tube: f64,
    /// Shear-layer parameter C; the shear layer is (C - 1)h thick.
    pub c_shear: f64,
    /// Axial pressure gradient of the continuous phase, Pa/m.
    pub dpdz_c: f64,
    /// Gravitational acceleration along +z (downstream), m/s².
    pub g: f64,
    /// Also apply the `2/rho_d dp/dz` pressure term of the strong momentum
    /// equation. Off by default: the discretized weak form omits it.
    pub full_pressure_term: bool,
}

impl FluidPair {
    /// 85% glycerol dripping into co-flowing air. Geometry and velocities are
    /// the reference scenario; the material constants are handbook values at
    /// about 20 °C and are approximations, not calibrated data.
    pub fn glycerol85() -> Self {
        let rho_d = 1222.0;
        let mu_d = 0.109;
        let mut fp = FluidPair {
            gamma: 0.0655,
            rho_d,
            rho_c: 1.2,
            mu_d,
            mu_c: 1.8e-5,
            nu_d: mu_d / rho_d,
            u_in: 5e-3,
            u_c: 1.0,
            h_in: 2.5e-3,
            r_tube: 2.5e-2,
            c_shear: 1.5,
            dpdz_c: 0.0,
            g: 9.81,
            full_pressure_term: false,
        };
        fp.dpdz_c = annular_pressure_gradient(fp.mu_c, fp.u_c, fp.h_in, fp.r_tube);
        fp
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("rho_d", self.rho_d),
            ("mu_d", self.mu_d),
            ("nu_d", self.nu_d),
            ("h_in", self.h_in),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("rho_c", self.rho_c), ("mu_c", self.mu_c)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("u_in", self.u_in), ("u_c", self.u_c), ("dpdz_c", self.dpdz_c), ("g", self.g)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if !(self.r_tube > self.h_in) {
            return Err(invalid("r_tube", format!("must exceed h_in = {}, got {}", self.h_in, self.r_tube)));
        }
        if !(self.c_shear > 1.0) {
            return Err(invalid("c_shear", format!("must be > 1 so that ln(C) > 0, got {}", self.c_shear)));
        }
        let nu = self.mu_d / self.rho_d;
        if ((self.nu_d - nu) / nu).abs() > 1e-12 {
            return Err(invalid("nu_d", format!("must equal mu_d/rho_d = {nu:e}, got {:e}", self.nu_d)));
        }
        Ok(())
    }

    /// γ/ρ_d, m³/s².
    pub fn capillary_coefficient(&self) -> f64 {
        self.gamma / self.rho_d
    }

    /// Net body force per unit mass along +z, m/s².
    pub fn body_acceleration(&self) -> f64 {
        buoyancy_factor(self) * self.g
    }

    /// Forcing from the continuous-phase pressure gradient, m/s². Enters the
    /// momentum residual with a positive sign.
    pub fn pressure_forcing(&self) -> Result<f64> {
        let mut f = shear_pressure_coefficient(self)? * self.dpdz_c;
        if self.full_pressure_term {
            f += 2.0 / self.rho_d * self.dpdz_c;
        }
        Ok(f)
    }
}

/// 1 - ρ_c/ρ_d.
pub fn buoyancy_factor(fp: &FluidPair) -> f64 {
    1.0 - fp.rho_c / fp.rho_d
}

/// (1 + μ_c/μ_d, 1 + (2/3) μ_c/μ_d), the viscous coupling factors.
pub fn viscosity_ratio_terms(fp: &FluidPair) -> (f64, f64) {
    let r = fp.mu_c / fp.mu_d;
    (1.0 + r, 1.0 + 2.0 / 3.0 * r)
}

/// 1 / (2 ρ_d ln C), in m³/kg.
pub fn shear_pressure_coefficient(fp: &FluidPair) -> Result<f64> {
    if !(fp.c_shear > 1.0) {
        return Err(invalid("c_shear", format!("ln(C) must be positive, got C = {}", fp.c_shear)));
    }
    Ok(1.0 / (2.0 * fp.rho_d * fp.c_shear.ln()))
}

/// Axial pressure gradient (Pa/m, negative for flow along +z) that drives
/// fully developed laminar flow with mean velocity `u_mean` through the
/// annulus between radii `inner` and `outer`.
pub fn annular_pressure_gradient(mu: f64, u_mean: f64, inner: f64, outer: f64) -> f64 {
    let (a2, b2) = (inner * inner, outer * outer);
    let shape = b2 * b2 - a2 * a2 - (b2 - a2) * (b2 - a2) / (outer / inner).ln();
    -8.0 * mu * u_mean * (b2 - a2) / shape
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FluidPair {
        FluidPair::glycerol85()
    }

    #[test]
    fn buoyancy_limits() {
        let mut fp = base();
        fp.rho_c = 0.0;
        assert_eq!(buoyancy_factor(&fp), 1.0);
        fp.rho_c = fp.rho_d;
        assert_eq!(buoyancy_factor(&fp), 0.0);
        fp.rho_c = 1.2;
        fp.rho_d = 1222.0;
        assert!((buoyancy_factor(&fp) - (1.0 - 1.2 / 1222.0)).abs() < 1e-15);
        assert!((buoyancy_factor(&fp) - 0.999018).abs() < 1e-6);
    }

    #[test]
    fn viscosity_terms() {
        let mut fp = base();
        fp.mu_c = 0.0;
        assert_eq!(viscosity_ratio_terms(&fp), (1.0, 1.0));
        fp.mu_c = fp.mu_d;
        let (a1, a2) = viscosity_ratio_terms(&fp);
        assert_eq!(a1, 2.0);
        assert!((a2 - 5.0 / 3.0).abs() < 1e-15);
        fp.mu_c = 1.8e-5;
        fp.mu_d = 0.109;
        let (a1, a2) = viscosity_ratio_terms(&fp);
        assert!((a1 - 1.000165).abs() < 1e-6);
        assert!((a2 - 1.000110).abs() < 1e-6);
    }

    #[test]
    fn shear_coefficient_values() {
        let mut fp = base();
        fp.c_shear = std::f64::consts::E.powi(2);
        fp.rho_d = 1.0;
        assert!((shear_pressure_coefficient(&fp).unwrap() - 0.25).abs() < 1e-15);
        fp.c_shear = std::f64::consts::E;
        fp.rho_d = 2.0;
        assert!((shear_pressure_coefficient(&fp).unwrap() - 0.25).abs() < 1e-15);
        fp.c_shear = 1.5;
        fp.rho_d = 1222.0;
        let v = shear_pressure_coefficient(&fp).unwrap();
        assert!((v - 1.0 / (2.0 * 1222.0 * 1.5f64.ln())).abs() < 1e-18);
        assert!((v - 1.00913e-3).abs() < 1e-8);
    }

    #[test]
    fn shear_coefficient_rejects_small_c() {
        let mut fp = base();
        for c in [1.0, 0.5, -2.0] {
            fp.c_shear = c;
            assert!(shear_pressure_coefficient(&fp).is_err());
        }
    }

    #[test]
    fn shear_coefficient_decreases_in_c() {
        let mut fp = base();
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            fp.c_shear = 1.0 + 1e-3 * (k as f64).powf(1.7);
            let v = shear_pressure_coefficient(&fp).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn preset_is_valid() {
        let fp = base();
        fp.validate().unwrap();
        assert!((fp.u_in / fp.u_c - 5e-3).abs() < 1e-15);
        assert!((fp.r_tube / fp.h_in - 10.0).abs() < 1e-12);
        assert!(fp.dpdz_c < 0.0);
    }

    #[test]
    fn validation_catches_bad_inputs() {
        let mut fp = base();
        fp.nu_d *= 1.0 + 1e-9;
        assert!(fp.validate().is_err());
        let mut fp = base();
        fp.r_tube = fp.h_in;
        assert!(fp.validate().is_err());
        let mut fp = base();
        fp.gamma = 0.0;
        assert!(fp.validate().is_err());
    }

    #[test]
    fn annular_gradient_matches_flow_rate() {
        // Integrate the annular Poiseuille profile numerically and check the mean velocity.
        let (mu, a, b) = (1.8e-5, 2.5e-3, 2.5e-2);
        let dpdz = annular_pressure_gradient(mu, 1.0, a, b);
        let k = -dpdz / (4.0 * mu);
        let ln = (b / a).ln();
        let u = |r: f64| k * (b * b - r * r) - k * (b * b - a * a) * (b / r).ln() / ln;
        let n = 20000;
        let dr = (b - a) / n as f64;
        let q: f64 = (0..n)
            .map(|i| {
                let r = a + (i as f64 + 0.5) * dr;
                2.0 * std::f64::consts::PI * r * u(r) * dr
            })
            .sum();
        let mean = q / (std::f64::consts::PI * (b * b - a * a));
        assert!((mean - 1.0).abs() < 1e-6, "{mean}");
    }
}
