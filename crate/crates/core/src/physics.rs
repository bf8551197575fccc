//! Pointwise interface geometry: mean curvature in mixed form and pinch-off
//! detection.

use crate::assembly::State;
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

/// Interface sample: radius `h` (m), mixed slope `s` ≈ ∂h/∂z, and its
/// derivative `dsdz` (1/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub h: f64,
    pub s: f64,
    pub dsdz: f64,
}

impl InterfacePoint {
    pub fn new(h: f64, s: f64, dsdz: f64) -> Self {
        InterfacePoint { h, s, dsdz }
    }
}

fn check_radius(h: f64) -> Result<()> {
    if h > 0.0 {
        Ok(())
    } else {
        Err(Error::SingularCurvature { z: f64::NAN, h })
    }
}

/// Mean curvature 1/(h√(1+s²)) − s_z/(1+s²)^{3/2}, with the mixed slope in
/// place of ∂h/∂z and its derivative in place of ∂²h/∂z².
pub fn curvature(p: InterfacePoint) -> Result<f64> {
    check_radius(p.h)?;
    Ok(curvature_of(p.h, p.s, p.dsdz))
}

/// The two groupings of ∂K/∂z that appear in the weak momentum equation:
/// the bulk part (derivative of the azimuthal term, kept under the test
/// function) and the flux part (integrated by parts against its gradient).
pub fn curvature_gradient_terms(p: InterfacePoint) -> Result<(f64, f64)> {
    check_radius(p.h)?;
    Ok((curvature_bulk(p.h, p.s, p.dsdz), curvature_flux(p.s, p.dsdz)))
}

#[inline]
pub(crate) fn curvature_of<T: Scalar>(h: T, s: T, dsdz: T) -> T {
    let r = (s * s + 1.0).sqrt();
    T::cst(1.0) / (h * r) - dsdz / (r * r * r)
}

#[inline]
pub(crate) fn curvature_bulk<T: Scalar>(h: T, s: T, dsdz: T) -> T {
    let r = (s * s + 1.0).sqrt();
    -(s * dsdz) / (h * r * r * r) - s / (h * h * r)
}

#[inline]
pub(crate) fn curvature_flux<T: Scalar>(s: T, dsdz: T) -> T {
    let r = (s * s + 1.0).sqrt();
    dsdz / (r * r * r)
}

/// A detected neck: position, reference coordinate, and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neck {
    pub node: usize,
    pub zeta: f64,
    pub z: f64,
    pub h_min: f64,
}

/// Smallest interior local minimum of h with ζ in
/// [exclusion_fraction, 1 − exclusion_fraction], if any.
pub fn find_neck(state: &State, mesh: &Mesh1D, exclusion_fraction: f64) -> Option<Neck> {
    let zeta = mesh.ref_coords();
    let h = &state.h;
    let n = h.len();
    let (lo, hi) = (exclusion_fraction, 1.0 - exclusion_fraction);
    (1..n - 1)
        .filter(|&i| zeta[i] >= lo && zeta[i] <= hi)
        .filter(|&i| h[i] <= h[i - 1] && h[i] <= h[i + 1] && (h[i] < h[i - 1] || h[i] < h[i + 1]))
        .min_by(|&a, &b| h[a].partial_cmp(&h[b]).unwrap().then(a.cmp(&b)))
        .map(|i| Neck { node: i, zeta: zeta[i], z: zeta[i] * state.length, h_min: h[i] })
}

/// Returns the neck if its radius has fallen below `threshold`.
pub fn detect_pinch(state: &State, mesh: &Mesh1D, exclusion_fraction: f64, threshold: f64) -> Option<Neck> {
    assert!((0.0..0.5).contains(&exclusion_fraction), "exclusion fraction must lie in [0, 0.5)");
    find_neck(state, mesh, exclusion_fraction).filter(|n| n.h_min < threshold)
}

/// Nodal mean curvature for output. The slope derivative at a node is the
/// average of the adjacent element values.
pub fn nodal_curvature(state: &State, mesh: &Mesh1D) -> Vec<f64> {
    let n = mesh.n_nodes();
    let ne = mesh.n_elements();
    let ds: Vec<f64> = (0..ne).map(|e| (state.s[e + 1] - state.s[e]) / (mesh.ref_width(e) * state.length)).collect();
    (0..n)
        .map(|i| {
            let d = match i {
                0 => ds[0],
                i if i == ne => ds[ne - 1],
                _ => 0.5 * (ds[i - 1] + ds[i]),
            };
            if state.h[i] > 0.0 {
                curvature_of(state.h[i], state.s[i], d)
            } else {
                f64::NAN
            }
        })
        .collect()
}
