//! Manufactured-solution convergence table.

use dropletfem::mms::{convergence_study, format_table, Manufactured};

fn main() -> dropletfem::Result<()> {
    let levels = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let problem = Manufactured::standard();
    println!(
        "domain {:.3e} m, {} backward Euler steps to t = {} s",
        problem.length, problem.n_steps, problem.t_final
    );
    print!("{}", format_table(&convergence_study(&problem, levels, 16)?));
    Ok(())
}
