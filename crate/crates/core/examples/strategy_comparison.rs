//! Unrefined, max-threshold and Dörfler runs side by side, with error
//! fields compared at common probe times.

use dropletfem::amr::Strategy;
use dropletfem::properties::FluidPair;
use dropletfem::timeloop::{run, RunConfig};

fn main() -> dropletfem::Result<()> {
    let fp = FluidPair::glycerol85();
    let probes = vec![0.1, 0.3, 0.45];
    println!("{:>9} {:>10} {:>12} {:>7} {:>8} {:>9}", "strategy", "pinch t", "volume", "steps", "refines", "refined");
    let mut reports = Vec::new();
    for strategy in [Strategy::None, Strategy::MaxThreshold, Strategy::Doerfler] {
        let cfg = RunConfig { amr_strategy: strategy, probe_times: probes.clone(), ..RunConfig::default() };
        let rep = run(&cfg, &fp)?;
        let (t, v) = rep.pinch.as_ref().map_or((f64::NAN, f64::NAN), |p| (p.t, p.droplet_volume));
        println!(
            "{:>9} {t:>10.4} {v:>12.4e} {:>7} {:>8} {:>9}",
            strategy.to_string(),
            rep.n_steps,
            rep.n_refinements(),
            rep.elements_refined()
        );
        reports.push((strategy, rep));
    }
    for &t in &probes {
        println!("t = {t}");
        for (strategy, rep) in &reports {
            if let Some(p) = rep.probe_at(t) {
                let e = p.error.argmax();
                println!(
                    "  {:>9}: {:>5} elements, max eta {:.3e} at z/L = {:.3}",
                    strategy.to_string(),
                    p.mesh.n_elements(),
                    p.error.max(),
                    p.mesh.ref_coords()[e]
                );
            }
        }
    }
    Ok(())
}
