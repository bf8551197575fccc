//! Flux-recovery error indicators on the initial hemispherical droplet and
//! on a smooth profile with a known slope.

use std::f64::consts::PI;

use dropletfem::estimator::{effectivity, error_bounds, estimate};
use dropletfem::mesh::Mesh1D;
use dropletfem::properties::FluidPair;
use dropletfem::timeloop::{initial_state, project_gradient};
use dropletfem::State;

fn main() -> dropletfem::Result<()> {
    let fp = FluidPair::glycerol85();
    let mesh = Mesh1D::build_uniform(40, fp.h_in)?;
    let state = initial_state(&mesh, &fp, 1e-3 * fp.h_in)?;
    let err = estimate(&state, &mesh, 3);
    println!("hemisphere, 40 elements: eta_global = {:.4e}", err.eta_global);
    let mut order: Vec<usize> = (0..err.len()).collect();
    order.sort_by(|a, b| err.eta[*b].total_cmp(&err.eta[*a]));
    for &e in order.iter().take(5) {
        println!("  element {e:>2} at z/L = {:.3}: eta = {:.4e}", mesh.ref_coords()[e], err.eta[e]);
    }

    let length = 1.0;
    println!("\nsmooth profile h = 2 + sin(pi z), s = L2 projection of the broken gradient");
    println!("{:>6} {:>12} {:>12} {:>10} {:>8}  bounds", "n", "eta", "true", "index", "c");
    for n in [8, 16, 32, 64, 128] {
        let mesh = Mesh1D::build_uniform(n, length)?;
        let h: Vec<f64> = mesh.node_positions().iter().map(|z| 2.0 + (PI * z).sin()).collect();
        let s = project_gradient(&mesh, &h)?;
        let st = State { u: vec![0.0; h.len()], h, s, length, t: 0.0 };
        let eff = effectivity(&st, &mesh, |z| PI * (PI * z).cos(), 3)?;
        let (lo, hi) = error_bounds(eff.eta_global, eff.c)?;
        println!(
            "{n:>6} {:>12.4e} {:>12.4e} {:>10.4} {:>8.4}  [{lo:.3e}, {hi:.3e}]",
            eff.eta_global, eff.true_error, eff.index, eff.c
        );
    }
    Ok(())
}
