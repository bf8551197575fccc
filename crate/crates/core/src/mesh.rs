//! Moving 1D mesh on [0, L(t)] built from fixed reference coordinates.
//!
//! Nodes sit at z_i = ζ_i · L. Growing the droplet stretches every node
//! affinely, so nodal fields keep their reference-coordinate profiles.

use crate::error::{invalid, Error, Result};

/// Smallest admissible spacing between reference coordinates.
pub const MIN_SPACING: f64 = 1e-12;
pub const MIN_ELEMENTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    ref_coords: Vec<f64>,
    length: f64,
    generation: Vec<u32>,
}

impl Mesh1D {
    pub fn build_uniform(n_elements: usize, length: f64) -> Result<Self> {
        if n_elements < MIN_ELEMENTS {
            return Err(invalid("n_elements", format!("need at least {MIN_ELEMENTS}, got {n_elements}")));
        }
        let n = n_elements as f64;
        let ref_coords = (0..=n_elements).map(|i| i as f64 / n).collect();
        Self::from_parts(ref_coords, length, vec![0; n_elements])
    }

    /// Mesh from explicit reference coordinates. Validates every invariant.
    pub fn from_parts(ref_coords: Vec<f64>, length: f64, generation: Vec<u32>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid("length", format!("must be positive, got {length}")));
        }
        if ref_coords.len() < MIN_ELEMENTS + 1 {
            return Err(Error::Mesh(format!("{} nodes is fewer than {}", ref_coords.len(), MIN_ELEMENTS + 1)));
        }
        if generation.len() + 1 != ref_coords.len() {
            return Err(Error::Mesh("generation array must have one entry per element".into()));
        }
        if ref_coords[0] != 0.0 || *ref_coords.last().unwrap() != 1.0 {
            return Err(Error::Mesh("reference coordinates must span [0, 1]".into()));
        }
        if let Some(w) = ref_coords.windows(2).find(|w| !(w[1] - w[0] >= MIN_SPACING)) {
            return Err(Error::Mesh(format!("spacing {:e} below minimum at ζ = {}", w[1] - w[0], w[0])));
        }
        Ok(Mesh1D { ref_coords, length, generation })
    }

    pub fn ref_coords(&self) -> &[f64] {
        &self.ref_coords
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn generations(&self) -> &[u32] {
        &self.generation
    }

    pub fn n_nodes(&self) -> usize {
        self.ref_coords.len()
    }

    pub fn n_elements(&self) -> usize {
        self.ref_coords.len() - 1
    }

    pub fn z(&self, i: usize) -> f64 {
        self.ref_coords[i] * self.length
    }

    pub fn node_positions(&self) -> Vec<f64> {
        self.ref_coords.iter().map(|zeta| zeta * self.length).collect()
    }

    /// Reference width of element `e`.
    pub fn ref_width(&self, e: usize) -> f64 {
        self.ref_coords[e + 1] - self.ref_coords[e]
    }

    /// Physical width of element `e`, m.
    pub fn width(&self, e: usize) -> f64 {
        self.ref_width(e) * self.length
    }

    pub fn min_width(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.width(e)).fold(f64::INFINITY, f64::min)
    }

    /// Element containing reference coordinate `zeta` (clamped to [0, 1]).
    pub fn locate(&self, zeta: f64) -> usize {
        let zeta = zeta.clamp(0.0, 1.0);
        match self.ref_coords.binary_search_by(|c| c.partial_cmp(&zeta).unwrap()) {
            Ok(i) => i.min(self.n_elements() - 1),
            Err(i) => (i - 1).min(self.n_elements() - 1),
        }
    }

    /// Evaluates the piecewise-linear interpolant of a nodal field at `zeta`.
    pub fn interpolate(&self, field: &[f64], zeta: f64) -> f64 {
        let e = self.locate(zeta);
        let t = (zeta.clamp(0.0, 1.0) - self.ref_coords[e]) / self.ref_width(e);
        field[e] * (1.0 - t) + field[e + 1] * t
    }

    /// Splits each marked element at its reference midpoint and transfers
    /// nodal fields by linear interpolation. Unmarked elements and their
    /// nodal values are carried over unchanged.
    pub fn bisect(&self, marked: &[usize], fields: &[&[f64]]) -> Result<(Mesh1D, Vec<Vec<f64>>)> {
        let ne = self.n_elements();
        let mut flag = vec![false; ne];
        for &e in marked {
            if e >= ne {
                return Err(invalid("marked", format!("element {e} out of range (mesh has {ne})")));
            }
            flag[e] = true;
        }
        for f in fields {
            if f.len() != self.n_nodes() {
                return Err(invalid("fields", format!("expected {} nodal values, got {}", self.n_nodes(), f.len())));
            }
        }
        let extra = flag.iter().filter(|&&m| m).count();
        let mut coords = Vec::with_capacity(self.n_nodes() + extra);
        let mut generation = Vec::with_capacity(ne + extra);
        let mut out: Vec<Vec<f64>> = fields.iter().map(|_| Vec::with_capacity(self.n_nodes() + extra)).collect();
        for e in 0..ne {
            coords.push(self.ref_coords[e]);
            for (o, f) in out.iter_mut().zip(fields) {
                o.push(f[e]);
            }
            if flag[e] {
                let mid = 0.5 * (self.ref_coords[e] + self.ref_coords[e + 1]);
                if mid - self.ref_coords[e] < MIN_SPACING || self.ref_coords[e + 1] - mid < MIN_SPACING {
                    return Err(Error::Mesh(format!("bisecting element {e} would violate the minimum spacing")));
                }
                coords.push(mid);
                for (o, f) in out.iter_mut().zip(fields) {
                    o.push(0.5 * (f[e] + f[e + 1]));
                }
                generation.push(self.generation[e] + 1);
                generation.push(self.generation[e] + 1);
            } else {
                generation.push(self.generation[e]);
            }
        }
        coords.push(1.0);
        for (o, f) in out.iter_mut().zip(fields) {
            o.push(f[ne]);
        }
        Ok((Mesh1D { ref_coords: coords, length: self.length, generation }, out))
    }

    /// Stretches the mesh to a new length; reference coordinates are kept.
    pub fn grow_domain(&self, new_length: f64) -> Result<Mesh1D> {
        if !(new_length > 0.0 && new_length.is_finite()) {
            return Err(invalid("new_length", format!("must be positive, got {new_length}")));
        }
        Ok(Mesh1D { length: new_length, ..self.clone() })
    }

    /// Node velocities w_i = ζ_i · dL/dt induced by the scaled map.
    pub fn mesh_velocity(&self, dldt: f64) -> Vec<f64> {
        self.ref_coords.iter().map(|zeta| zeta * dldt).collect()
    }
}
