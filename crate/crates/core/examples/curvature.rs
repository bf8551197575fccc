//! Mixed-form mean curvature against closed-form shapes.

use dropletfem::physics::{curvature, curvature_gradient_terms, InterfacePoint};

fn main() -> dropletfem::Result<()> {
    let h0 = 2.5e-3;
    let k = curvature(InterfacePoint::new(h0, 0.0, 0.0))?;
    println!("cylinder h = {h0:e}: K = {k:.6e}, 1/h = {:.6e}", 1.0 / h0);

    let a = 1.5e-3;
    println!("sphere a = {a:e}, 2/a = {:.6e}", 2.0 / a);
    println!("{:>12} {:>14} {:>10}", "z/a", "K", "rel err");
    for k in 0..9 {
        let z = a * (-0.8 + 0.2 * k as f64);
        let h = (a * a - z * z).sqrt();
        let p = InterfacePoint::new(h, -z / h, -a * a / h.powi(3));
        let kz = curvature(p)?;
        println!("{:>12.2} {:>14.8e} {:>10.1e}", z / a, kz, (kz - 2.0 / a).abs() * a / 2.0);
    }

    let (bulk, flux) = curvature_gradient_terms(InterfacePoint::new(1.0, 0.5, 0.2))?;
    println!("gradient terms at h = 1, s = 0.5, s_z = 0.2: bulk {bulk:.6}, flux {flux:.6}");
    Ok(())
}
