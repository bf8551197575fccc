//! One-dimensional droplet pinch-off simulator.
//!
//! A slender-jet model of a liquid column issuing from a nozzle into a
//! co-flowing fluid is discretized with mixed P1 finite elements for the
//! axial velocity `u`, the interface radius `h`, and the slope `s ≈ ∂h/∂z`.
//! The domain follows the droplet tip. Because `s` is continuous while the
//! gradient of `h` is not, their mismatch gives an element-wise error
//! estimate that drives adaptive bisection of the mesh.
//!
//! Modules, bottom-up:
//! - [`properties`]: fluid pair parameters and derived coefficients
//! - [`mesh`]: moving reference-coordinate mesh with bisection
//! - [`physics`]: mixed-form curvature and pinch detection
//! - [`assembly`]: residual and Jacobian of the weak form
//! - [`estimator`]: flux-recovery indicators and error bounds
//! - [`amr`]: max-threshold and Dörfler marking, refinement cycle
//! - [`timeloop`]: Newton steps, length tracking, refinement triggers
//! - [`mms`]: manufactured-solution convergence study
//! - [`config`], [`output`], [`cli`]: configuration files, CSV snapshots,
//!   reports and the command-line driver

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amr;
pub mod assembly;
pub mod banded;
pub mod cli;
pub mod config;
pub mod dual;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod mms;
pub mod output;
pub mod physics;
pub mod properties;
pub mod quadrature;
pub mod timeloop;

pub use amr::{mark_doerfler, mark_max, refine_cycle, DoerflerAccounting, MarkSet, Strategy};
pub use assembly::{assemble, apply_boundary_conditions, DiscreteSystem, State, TipModel};
pub use error::{Error, Result};
pub use estimator::{effectivity, error_bounds, estimate, ErrorField};
pub use mesh::Mesh1D;
pub use physics::{curvature, curvature_gradient_terms, detect_pinch, InterfacePoint};
pub use properties::FluidPair;
pub use timeloop::{run, run_with, RunConfig, RunReport};
