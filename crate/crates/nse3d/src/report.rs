//! Deterministic text emitters: CSV series and human-readable reports.
//!
//! Every CSV carries a header row naming columns and units; floats print
//! with 17 significant digits ('.' decimal separator, '\n' endings) so
//! files round-trip doubles exactly and identical runs produce identical
//! bytes.

use crate::diagnostics::{AveragedDiagnostics, BoundReport, WavenumberRecord};
use crate::grid::TorusGrid;
use crate::sync::DecayReport;

/// 17 significant digits: lossless for f64.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn w_norm_csv(report: &DecayReport) -> String {
    let mut s = String::from(
        "t[time],w_L2[velocity*length^1.5],w_H1[velocity*length^0.5],Q,Lambda_u[1/length],Lambda_v[1/length],saturated\n",
    );
    for sample in &report.samples {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f(sample.t),
            fmt_f(sample.w_l2),
            fmt_f(sample.w_h1),
            sample.q,
            fmt_f(sample.lambda_u),
            fmt_f(sample.lambda_v),
            u8::from(sample.saturated),
        ));
    }
    s
}

pub fn decay_report_txt(report: &DecayReport, experiment: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!("experiment: {experiment}\n"));
    s.push_str(&format!("r = {}\n", report.r));
    s.push_str(&format!("c_r = {}\n", report.c_r));
    s.push_str(&format!("w0_L2 = {}\n", fmt_f(report.w0_l2)));
    s.push_str(&format!(
        "final w_L2 / w0_L2 = {}\n",
        fmt_f(report.final_ratio())
    ));
    match report.sigma {
        Some(sig) => s.push_str(&format!("fitted sigma (rate of ||w||_2^2) = {}\n", fmt_f(sig))),
        None => s.push_str("fitted sigma (rate of ||w||_2^2) = n/a (insufficient samples)\n"),
    }
    s.push_str(&format!(
        "dissipative envelope rate = {}\n",
        fmt_f(report.envelope)
    ));
    if let Some(sig) = report.sigma {
        s.push_str(&format!(
            "sigma / envelope = {}\n",
            fmt_f(sig / report.envelope)
        ));
    }
    s.push_str(&format!(
        "fit window = [{}, {}]\n",
        fmt_f(report.fit_window.0),
        fmt_f(report.fit_window.1)
    ));
    s.push_str(&format!("saturated enforcement steps = {}\n", report.n_saturated));
    s.push_str(&format!("cfl violations = {}\n", report.cfl_violations));
    s
}

pub fn wavenumbers_csv(records: &[WavenumberRecord]) -> String {
    let mut s = String::from(
        "t[time],Lambda[1/length],Q,Lambda_dis[1/length],enstrophy[velocity^2*length],energy[velocity^2*length^3],saturated\n",
    );
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f(r.t),
            fmt_f(r.lambda),
            r.q,
            fmt_f(r.lambda_dis),
            fmt_f(r.enstrophy),
            fmt_f(r.energy),
            u8::from(r.saturated),
        ));
    }
    s
}

/// Columns `q, lambda_q, shell_L2, shell_Lr, shell_Linf` for one snapshot.
pub fn spectrum_csv(
    grid: &TorusGrid,
    r: f64,
    l2: &[f64],
    lr: &[f64],
    linf: &[f64],
) -> String {
    let mut s = format!(
        "q,lambda_q[1/length],shell_L2[velocity*length^1.5],shell_Lr[velocity*length^{:.3}],shell_Linf[velocity]\n",
        3.0 / r
    );
    for i in 0..l2.len() {
        let q = i as i64 - 1;
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            q,
            fmt_f(crate::dyadic::lambda_q(grid, q)),
            fmt_f(l2[i]),
            fmt_f(lr[i]),
            fmt_f(linf[i]),
        ));
    }
    s
}

pub fn series_csv(rows: &[(f64, f64, f64, f64)]) -> String {
    let mut s = String::from(
        "t[time],energy[velocity^2*length^3],enstrophy[velocity^2*length],injection[velocity^2*length^3/time]\n",
    );
    for (t, e, z, inj) in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f(*t),
            fmt_f(*e),
            fmt_f(*z),
            fmt_f(*inj)
        ));
    }
    s
}

pub fn analysis_report_txt(
    avg: &AveragedDiagnostics,
    bounds: &BoundReport,
    r: f64,
    nu: f64,
    grid: &TorusGrid,
) -> String {
    let mut s = String::new();
    s.push_str("# wavenumber analysis report\n");
    s.push_str(
        "# note: the Grashof number uses the kappa_0^{1/2} normalization;\n\
         #       the lambda_0^{1/2} variant differs by a factor (2 pi)^{1/2}.\n",
    );
    s.push_str(&format!("N = {}, L = {}\n", grid.n(), grid.length()));
    s.push_str(&format!("nu = {nu}\nr = {r}\n"));
    s.push_str(&format!("samples = {}\n", avg.n_samples));
    s.push_str(&format!(
        "saturated samples (excluded from averages) = {}\n",
        avg.n_saturated
    ));
    s.push_str(&format!("averaging window T = {}\n", fmt_f(avg.window)));
    s.push_str(&format!("<Lambda> = {}\n", fmt_f(avg.mean_lambda)));
    s.push_str(&format!(
        "<Lambda> - lambda_0 = {}\n",
        fmt_f(avg.mean_lambda_excess)
    ));
    s.push_str(&format!("<enstrophy> = {}\n", fmt_f(avg.mean_enstrophy)));
    s.push_str(&format!("eps = {}\n", fmt_f(avg.eps)));
    s.push_str(&format!("kappa_d = {}\n", fmt_f(avg.kappa_d)));
    s.push_str(&format!(
        "intermittency d = {} (measured constant {}{})\n",
        avg.intermittency.d,
        fmt_f(avg.intermittency.ratio),
        if avg.intermittency.clamped_high {
            ", clamped at 3"
        } else {
            ""
        }
    ));
    match avg.grashof {
        Some(g) => s.push_str(&format!("Grashof G = {}\n", fmt_f(g))),
        None => s.push_str("Grashof G = n/a (forcing unknown)\n"),
    }
    s.push_str(&format!(
        "pointwise max Lambda nu^2 / ||grad u||^2 = {}\n",
        fmt_f(bounds.pointwise_max_ratio)
    ));
    s.push_str("bound table (lhs = <Lambda> - lambda_0; rhs constant-free):\n");
    s.push_str("name,lhs,rhs,ratio\n");
    for row in &bounds.rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            row.name,
            fmt_f(row.lhs),
            fmt_f(row.rhs),
            fmt_f(row.ratio)
        ));
    }
    s
}
