//! Windowed averages and bound ratios for a short decaying run: the
//! averaged determining wavenumber against the enstrophy, Kolmogorov
//! (intermittency-corrected), and Grashof expressions.

use nse3d::diagnostics::{
    analyze_snapshot, averaged_diagnostics, bound_reports, calibrated_c0, DiagnosticThresholds,
};
use nse3d::report::analysis_report_txt;
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
    let spec = ForcingSpec::SteadyLowMode {
        amplitude: 5e-4,
        k_f: 1,
    };
    let forcing = spec.build(&grid);
    let stepper = Etdrk4::new(grid, nu, 0.05);
    let mut state = SolverState::new(random_divergence_free(&grid, 17, 0.1, 2.5));

    let mut records = Vec::new();
    let mut shells = Vec::new();
    for step in 0..=240u32 {
        if step % 2 == 0 {
            let snap = analyze_snapshot(state.t, &state.u, &thresholds).unwrap();
            records.push(snap.record);
            shells.push(snap.shells);
        }
        let (s, _) = stepper.step(&state, &forcing).unwrap();
        state = s;
    }

    let avg = averaged_diagnostics(
        &records,
        &shells,
        thresholds.r,
        nu,
        &grid,
        Some(&forcing),
        None,
    )
    .unwrap();
    let bounds = bound_reports(&records, &avg, thresholds.r, nu, &grid);
    print!("{}", analysis_report_txt(&avg, &bounds, thresholds.r, nu, &grid));
}
