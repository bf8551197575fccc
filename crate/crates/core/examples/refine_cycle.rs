//! Repeated estimate-mark-bisect cycles on the initial droplet profile.
//!
//! Run with an optional strategy argument: `none`, `max` or `doerfler`.

use dropletfem::amr::{refine_cycle, DoerflerAccounting, RefineParams, Strategy};
use dropletfem::estimator::estimate;
use dropletfem::mesh::Mesh1D;
use dropletfem::properties::FluidPair;
use dropletfem::timeloop::initial_state;

fn main() -> dropletfem::Result<()> {
    let strategy: Strategy = std::env::args().nth(1).as_deref().unwrap_or("doerfler").parse().map_err(|m: String| {
        dropletfem::Error::InvalidParameter { name: "strategy", reason: m }
    })?;
    let fp = FluidPair::glycerol85();
    let mut mesh = Mesh1D::build_uniform(20, fp.h_in)?;
    let mut state = initial_state(&mesh, &fp, 1e-3 * fp.h_in)?;
    let params = RefineParams {
        strategy,
        parameter: if strategy == Strategy::Doerfler { 0.9 } else { 0.1 },
        accounting: DoerflerAccounting::SumOfSquares,
        max_generation: 12,
        quad_order: 3,
    };
    println!("{strategy}: {:>6} {:>8} {:>12} {:>12}", "cycle", "marked", "elements", "eta_global");
    for cycle in 0..8 {
        let (st, m, rec) = refine_cycle(&state, &mesh, &params)?;
        println!("{:>16} {:>8} {:>12} {:>12.4e}", cycle, rec.n_marked, rec.elements_after, rec.eta_global_before);
        // Re-seat the hemispherical profile on the new nodes.
        state = initial_state(&m, &fp, 1e-3 * fp.h_in)?;
        state.u = st.u;
        mesh = m;
    }
    println!("final: {} elements, min width {:.3e} m, eta_global {:.4e}", mesh.n_elements(), mesh.min_width(), estimate(&state, &mesh, 3).eta_global);
    Ok(())
}
