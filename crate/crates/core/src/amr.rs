//! Element marking and the estimate → mark → bisect → transfer cycle.

use std::fmt;
use std::str::FromStr;

use crate::assembly::State;
use crate::error::{Error, Result};
use crate::estimator::{estimate, ErrorField};
use crate::mesh::Mesh1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    None,
    MaxThreshold,
    Doerfler,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Strategy::None),
            "max" | "max_threshold" => Ok(Strategy::MaxThreshold),
            "doerfler" | "dorfler" => Ok(Strategy::Doerfler),
            other => Err(format!("unknown strategy `{other}` (expected none, max or doerfler)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::None => "none",
            Strategy::MaxThreshold => "max",
            Strategy::Doerfler => "doerfler",
        })
    }
}

/// How the Dörfler bulk criterion accumulates indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DoerflerAccounting {
    /// Σ_marked η_K ≥ θ Σ η_K.
    Sum,
    /// Σ_marked η_K² ≥ θ² Σ η_K².
    #[default]
    SumOfSquares,
}

impl FromStr for DoerflerAccounting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sum" => Ok(DoerflerAccounting::Sum),
            "sum_of_squares" => Ok(DoerflerAccounting::SumOfSquares),
            other => Err(format!("unknown accounting `{other}` (expected sum or sum_of_squares)")),
        }
    }
}

impl fmt::Display for DoerflerAccounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DoerflerAccounting::Sum => "sum",
            DoerflerAccounting::SumOfSquares => "sum_of_squares",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkSet {
    /// Marked element indices, ascending.
    pub marked: Vec<usize>,
    pub strategy: Strategy,
    pub parameter: f64,
}

/// Marks every element with η_K ≥ λ · max η.
pub fn mark_max(err: &ErrorField, lambda: f64) -> MarkSet {
    assert!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1]");
    let threshold = lambda * err.max();
    let marked = if err.eta_global > 0.0 || lambda == 0.0 {
        (0..err.len()).filter(|&k| err.eta[k] >= threshold).collect()
    } else {
        Vec::new()
    };
    MarkSet { marked, strategy: Strategy::MaxThreshold, parameter: lambda }
}

/// Minimal Dörfler set: the largest indicators (ties by lower index) until
/// the marked share reaches θ of the total.
pub fn mark_doerfler(err: &ErrorField, theta: f64, accounting: DoerflerAccounting) -> MarkSet {
    assert!(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    let weight = |e: f64| match accounting {
        DoerflerAccounting::Sum => e,
        DoerflerAccounting::SumOfSquares => e * e,
    };
    let target_fraction = match accounting {
        DoerflerAccounting::Sum => theta,
        DoerflerAccounting::SumOfSquares => theta * theta,
    };
    let mut order: Vec<usize> = (0..err.len()).collect();
    order.sort_by(|&a, &b| err.eta[b].partial_cmp(&err.eta[a]).unwrap().then(a.cmp(&b)));
    let total: f64 = err.eta.iter().map(|&e| weight(e)).sum();
    let target = target_fraction * total;
    let mut marked = Vec::new();
    if total > 0.0 {
        let mut acc = 0.0;
        for &k in &order {
            if acc >= target || err.eta[k] == 0.0 {
                break;
            }
            acc += weight(err.eta[k]);
            marked.push(k);
        }
    }
    marked.sort_unstable();
    MarkSet { marked, strategy: Strategy::Doerfler, parameter: theta }
}

/// Outcome of one refinement cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRecord {
    pub strategy: Strategy,
    pub n_marked: usize,
    /// Marked elements skipped because they reached the depth limit.
    pub n_capped: usize,
    pub elements_before: usize,
    pub elements_after: usize,
    pub eta_global_before: f64,
    /// Error field that drove the marking.
    pub error: ErrorField,
    /// Marked element indices on the pre-refinement mesh.
    pub marked: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineParams {
    pub strategy: Strategy,
    /// λ for max-threshold, θ for Dörfler.
    pub parameter: f64,
    pub accounting: DoerflerAccounting,
    pub max_generation: u32,
    pub quad_order: usize,
}

pub fn mark(err: &ErrorField, p: &RefineParams) -> MarkSet {
    match p.strategy {
        Strategy::None => MarkSet { marked: Vec::new(), strategy: Strategy::None, parameter: p.parameter },
        Strategy::MaxThreshold => mark_max(err, p.parameter),
        Strategy::Doerfler => mark_doerfler(err, p.parameter, p.accounting),
    }
}

/// Estimate, mark, bisect, and transfer (u, h, s). The caller re-solves.
/// Marked elements already at `max_generation` are left alone; if that
/// leaves nothing to refine while error remains, the cycle reports
/// [`Error::RefinementExhausted`].
pub fn refine_cycle(state: &State, mesh: &Mesh1D, p: &RefineParams) -> Result<(State, Mesh1D, RefinementRecord)> {
    let err = estimate(state, mesh, p.quad_order);
    let set = mark(&err, p);
    let gens = mesh.generations();
    let (eligible, capped): (Vec<usize>, Vec<usize>) = set.marked.iter().partition(|&&k| gens[k] < p.max_generation);
    if eligible.is_empty() && !capped.is_empty() {
        return Err(Error::RefinementExhausted(format!(
            "all {} marked elements are at the depth limit {}",
            capped.len(),
            p.max_generation
        )));
    }
    let (fine, fields) = mesh.bisect(&eligible, &[&state.u, &state.h, &state.s]).map_err(|e| match e {
        Error::Mesh(m) => Error::RefinementExhausted(m),
        other => other,
    })?;
    let mut it = fields.into_iter();
    let new_state = State {
        u: it.next().unwrap(),
        h: it.next().unwrap(),
        s: it.next().unwrap(),
        length: state.length,
        t: state.t,
    };
    let record = RefinementRecord {
        strategy: p.strategy,
        n_marked: eligible.len(),
        n_capped: capped.len(),
        elements_before: mesh.n_elements(),
        elements_after: fine.n_elements(),
        eta_global_before: err.eta_global,
        error: err,
        marked: eligible,
    };
    Ok((new_state, fine, record))
}
