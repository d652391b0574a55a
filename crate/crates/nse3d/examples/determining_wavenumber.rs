//! Track the determining and dissipation wavenumbers along a decaying
//! trajectory.  The run starts energetic enough that the grid cannot
//! resolve the determining wavenumber (saturated records) and relaxes
//! into the resolvable regime.

use nse3d::diagnostics::{analyze_snapshot, calibrated_c0, DiagnosticThresholds};
use nse3d::solver::{random_divergence_free, Etdrk4, ForcingSpec, SolverState};
use nse3d::TorusGrid;

fn main() {
    let grid = TorusGrid::new(24, 2.0 * std::f64::consts::PI).unwrap();
    let nu = 0.2;
    let thresholds = DiagnosticThresholds {
        r: 2.5,
        c_r: 0.05,
        c0: calibrated_c0(0.05, 2.5),
        nu,
    };
    let forcing = ForcingSpec::SteadyLowMode {
        amplitude: 5e-4,
        k_f: 1,
    }
    .build(&grid);
    let stepper = Etdrk4::new(grid, nu, 0.05);
    let mut state = SolverState::new(random_divergence_free(&grid, 3, 0.15, 2.5));

    println!(
        "{:>6} {:>10} {:>4} {:>10} {:>4} {:>12} {:>5}",
        "t", "Lambda", "Q", "Lam_dis", "Qd", "enstrophy", "sat"
    );
    for step in 0..=200u32 {
        if step % 10 == 0 {
            let snap = analyze_snapshot(state.t, &state.u, &thresholds).unwrap();
            let r = &snap.record;
            println!(
                "{:>6.2} {:>10.4} {:>4} {:>10.4} {:>4} {:>12.4e} {:>5}",
                r.t, r.lambda, r.q, r.lambda_dis, r.q_dis, r.enstrophy, r.saturated
            );
        }
        let (s, _) = stepper.step(&state, &forcing).unwrap();
        state = s;
    }
}
