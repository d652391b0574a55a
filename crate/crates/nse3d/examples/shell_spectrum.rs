//! Decompose a field into dyadic shells and print the per-shell norm
//! table that the `spectrum` subcommand emits as CSV.

use nse3d::dyadic::{lambda_q, ShellDecomposition};
use nse3d::solver::random_divergence_free;
use nse3d::TorusGrid;

fn main() {
    let grid = TorusGrid::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let u = random_divergence_free(&grid, 42, 0.5, 3.0);
    let mut dec = ShellDecomposition::new(&u);

    let r = 2.5;
    let l2 = dec.norms(2.0).unwrap();
    let lr = dec.norms(r).unwrap();
    let linf = dec.norms(f64::INFINITY).unwrap();

    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "q", "lambda_q", "L2", "L2.5", "Linf");
    for i in 0..l2.len() {
        let q = i as i64 - 1;
        println!(
            "{:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            q,
            lambda_q(&grid, q),
            l2[i],
            lr[i],
            linf[i]
        );
    }

    let rec = dec.reconstruct();
    println!(
        "\nreconstruction error ||sum u_q - u|| / ||u|| = {:.3e}",
        rec.sub(&u).l2_norm() / u.l2_norm()
    );
    let sum_sq: f64 = l2.iter().map(|v| v * v).sum();
    println!(
        "almost-orthogonality: sum_q ||u_q||^2 / ||u||^2 = {:.4}",
        sum_sq / u.l2_norm().powi(2)
    );
}
