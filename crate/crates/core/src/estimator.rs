//! Flux-recovery error estimate.
//!
//! The mixed slope `s` is continuous while the gradient of the P1 radius is
//! piecewise constant. Their element-wise L² mismatch,
//! η_K = ‖s − ∂h/∂z‖_{L²(K)}, estimates the true slope error; if
//! ‖∂h̄/∂z − s‖ ≤ c ‖∂h̄/∂z − ∂h/∂z‖ for some c in (0, 1), the true error is
//! bracketed by η/(1 + c) and η/(1 − c).

use crate::assembly::State;
use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh1D;
use crate::quadrature::GaussRule;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorField {
    /// η_K per element, m^{1/2}.
    pub eta: Vec<f64>,
    /// √(Σ η_K²).
    pub eta_global: f64,
    /// Time of the estimated state, s.
    pub t: f64,
}

impl ErrorField {
    pub fn from_indicators(eta: Vec<f64>, t: f64) -> Self {
        // Fixed-order reduction keeps the global value reproducible.
        let eta_global = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
        ErrorField { eta, eta_global, t }
    }

    pub fn max(&self) -> f64 {
        self.eta.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &e) in self.eta.iter().enumerate() {
            if e > self.eta[best] {
                best = i;
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

/// Element indicators for the slope mismatch. With P1 fields the integrand is
/// quadratic, so any rule of order ≥ 2 is exact.
pub fn estimate(state: &State, mesh: &Mesh1D, quad_order: usize) -> ErrorField {
    let rule = GaussRule::new(quad_order.max(2));
    let eta = (0..mesh.n_elements())
        .map(|e| {
            let width = mesh.ref_width(e) * state.length;
            let broken = (state.h[e + 1] - state.h[e]) / width;
            let (s0, s1) = (state.s[e], state.s[e + 1]);
            let sq: f64 = rule
                .iter()
                .map(|(x, w)| {
                    let d = s0 + (s1 - s0) * x - broken;
                    w * d * d
                })
                .sum();
            (sq * width).sqrt()
        })
        .collect();
    ErrorField::from_indicators(eta, state.t)
}

/// Bounds (η/(1 + c), η/(1 − c)) on the true slope error.
pub fn error_bounds(eta_global: f64, c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(invalid("c", format!("must lie in (0, 1), got {c}")));
    }
    Ok((eta_global / (1.0 + c), eta_global / (1.0 - c)))
}

/// Estimator quality against a known slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effectivity {
    /// η / ‖truth − ∂h/∂z‖.
    pub index: f64,
    /// ‖truth − s‖ / ‖truth − ∂h/∂z‖, the empirical c.
    pub c: f64,
    /// ‖truth − ∂h/∂z‖.
    pub true_error: f64,
    pub eta_global: f64,
}

/// Compares the estimate with the true error for a known slope profile.
/// A zero estimate with nonzero true error (for example when `s` is forced
/// to equal the broken gradient) yields effectivity 0: the estimator cannot
/// see error that the slope field does not smooth out.
pub fn effectivity(state: &State, mesh: &Mesh1D, truth_slope: impl Fn(f64) -> f64, quad_order: usize) -> Result<Effectivity> {
    let rule = GaussRule::new(quad_order.max(4));
    let (mut true_sq, mut s_sq) = (0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let z0 = mesh.ref_coords()[e] * state.length;
        let width = mesh.ref_width(e) * state.length;
        let broken = (state.h[e + 1] - state.h[e]) / width;
        let (s0, s1) = (state.s[e], state.s[e + 1]);
        for (x, w) in rule.iter() {
            let exact = truth_slope(z0 + x * width);
            let s = s0 + (s1 - s0) * x;
            true_sq += w * width * (exact - broken).powi(2);
            s_sq += w * width * (exact - s).powi(2);
        }
    }
    if true_sq == 0.0 {
        return Err(Error::ZeroTrueError);
    }
    let eta_global = estimate(state, mesh, 3).eta_global;
    let true_error = true_sq.sqrt();
    Ok(Effectivity { index: eta_global / true_error, c: s_sq.sqrt() / true_error, true_error, eta_global })
}
