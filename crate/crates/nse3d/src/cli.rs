//! Command-line entry points: `simulate`, `sync`, `analyze`, `spectrum`.
//!
//! Flags mirror config keys and override the file.  Exit codes:
//! 0 success, 1 usage error, 2 validation error, 3 runtime divergence.

use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::diagnostics::{
    analyze_snapshot, averaged_diagnostics, bound_reports, DiagnosticThresholds,
};
use crate::dyadic::ShellDecomposition;
use crate::error::Error;
use crate::report;
use crate::snapshot::{read_snapshot, write_snapshot, SnapshotHeader};
use crate::solver::{energy_budget, random_divergence_free, Etdrk4, SolverState};
use crate::sync::{run_steady_reference_experiment, run_twin_experiment};
use crate::TorusGrid;

const USAGE: &str = "\
usage: nse3d <simulate|sync|analyze|spectrum> [flags]

  simulate --config PATH [--key value ...]
      advance the flow, writing snap_NNNNNN.bin and series.csv
      to output_dir

  sync --config PATH [--steady] [--key value ...]
      twin synchronization run (or steady-reference variant),
      writing w_norm.csv and decay_report.txt to output_dir

  analyze --input DIR [--config PATH] [--out DIR] [--key value ...]
      per-snapshot wavenumber diagnostics over snap_*.bin,
      writing wavenumbers.csv and report.txt

  spectrum --snapshot PATH [--r R] [--out FILE]
      dyadic shell norms of one snapshot (CSV to stdout by default)

  config keys usable as flags: nu L N dt T_total snapshot_interval r
  c_r c0 forcing seed_u seed_v output_dir T_avg d_override ic_rms ic_k0
";

pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            1
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Divergence(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

enum CliError {
    Usage(String),
    Validation(String),
    Divergence(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteState { .. } => CliError::Divergence(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<crate::error::ConfigError> for CliError {
    fn from(e: crate::error::ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<crate::error::SnapshotError> for CliError {
    fn from(e: crate::error::SnapshotError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

type CliResult = Result<i32, CliError>;

struct Flags {
    /// (key, value) pairs in order.
    pairs: Vec<(String, String)>,
    /// bare switches (--steady)
    switches: Vec<String>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        let mut switches = Vec::new();
        let mut it = args.iter().peekable();
        while let Some(a) = it.next() {
            let key = a
                .strip_prefix("--")
                .ok_or_else(|| CliError::Usage(format!("unexpected argument '{a}'")))?;
            if key == "steady" {
                switches.push(key.to_string());
                continue;
            }
            let value = it
                .next()
                .ok_or_else(|| CliError::Usage(format!("flag --{key} needs a value")))?;
            pairs.push((key.to_string(), value.clone()));
        }
        Ok(Self { pairs, switches })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let pos = self.pairs.iter().position(|(k, _)| k == key)?;
        Some(self.pairs.remove(pos).1)
    }

    fn has_switch(&self, key: &str) -> bool {
        self.switches.iter().any(|s| s == key)
    }
}

fn dispatch(args: &[String]) -> CliResult {
    let Some(cmd) = args.first() else {
        return Err(CliError::Usage("missing subcommand".into()));
    };
    let rest = &args[1..];
    match cmd.as_str() {
        "simulate" => simulate(rest),
        "sync" => sync(rest),
        "analyze" => analyze(rest),
        "spectrum" => spectrum(rest),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(0)
        }
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

/// Load --config (required) and apply remaining flags as key overrides.
fn config_from(flags: &mut Flags) -> Result<ExperimentConfig, CliError> {
    let path = flags
        .take("config")
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("cannot read config '{path}': {e}")))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    for (key, value) in flags.pairs.drain(..) {
        cfg.apply_override(&key, &value)?;
    }
    Ok(cfg)
}

fn ensure_dir(dir: &str) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(dir);
    fs::create_dir_all(&path)?;
    Ok(path)
}

fn snap_path(dir: &Path, index: u64) -> PathBuf {
    dir.join(format!("snap_{index:06}.bin"))
}

fn simulate(args: &[String]) -> CliResult {
    let mut flags = Flags::parse(args)?;
    let cfg = config_from(&mut flags)?;
    let out = ensure_dir(&cfg.output_dir)?;

    let grid = TorusGrid::new(cfg.n, cfg.l)?;
    let forcing = cfg.forcing.build(&grid);
    let stepper = Etdrk4::new(grid, cfg.nu, cfg.dt);
    let mut state = SolverState::new(random_divergence_free(
        &grid, cfg.seed_u, cfg.ic_rms, cfg.ic_k0,
    ));

    let n_steps = (cfg.t_total / cfg.dt).round().max(1.0) as u64;
    let every = (cfg.snapshot_interval / cfg.dt).round().max(1.0) as u64;
    let mut series = Vec::new();
    let mut snap_index = 0u64;
    let mut cfl_violations = 0u64;

    let emit = |state: &SolverState, snap_index: &mut u64, series: &mut Vec<_>| -> Result<(), CliError> {
        let header = SnapshotHeader {
            n: grid.n() as u32,
            l: grid.length(),
            nu: cfg.nu,
            t: state.t,
            seed: cfg.seed_u,
        };
        write_snapshot(&snap_path(&out, *snap_index), &header, &state.u)?;
        *snap_index += 1;
        let eb = energy_budget(&state.u, &forcing);
        series.push((state.t, eb.energy, eb.enstrophy, eb.injection));
        Ok(())
    };

    emit(&state, &mut snap_index, &mut series)?;
    for step in 1..=n_steps {
        match stepper.step(&state, &forcing) {
            Ok((next, info)) => {
                state = next;
                if info.cfl_violated {
                    cfl_violations += 1;
                    if cfl_violations == 1 {
                        eprintln!(
                            "warning: dt = {} exceeds the advective CFL bound {:.3e} (|u|_max = {:.3e})",
                            cfg.dt, info.cfl_dt, info.u_max
                        );
                    }
                }
            }
            Err(e) => {
                // dump the last good state for post-mortem analysis
                let header = SnapshotHeader {
                    n: grid.n() as u32,
                    l: grid.length(),
                    nu: cfg.nu,
                    t: state.t,
                    seed: cfg.seed_u,
                };
                let dump = out.join("snap_diverged_last_good.bin");
                let _ = write_snapshot(&dump, &header, &state.u);
                fs::write(out.join("series.csv"), report::series_csv(&series))?;
                return Err(CliError::Divergence(format!(
                    "{e}; last good state dumped to {}",
                    dump.display()
                )));
            }
        }
        if step % every == 0 || step == n_steps {
            emit(&state, &mut snap_index, &mut series)?;
        }
    }
    fs::write(out.join("series.csv"), report::series_csv(&series))?;

    // resolution check: classical Kolmogorov wavenumber vs resolved band
    let times: Vec<f64> = series.iter().map(|r| r.0).collect();
    let enst: Vec<f64> = series.iter().map(|r| r.2).collect();
    if let Ok(eps) =
        crate::diagnostics::energy_dissipation_rate(&times, &enst, 3.0, cfg.nu, &grid)
    {
        let kd = crate::diagnostics::kolmogorov_wavenumber(eps, cfg.nu, 3.0);
        let band_top = grid.k_max() as f64 * grid.kappa0();
        println!(
            "resolution check: kappa_d(d=3) = {kd:.4e}, resolved band top = {band_top:.4e}{}",
            if kd > band_top { "  [UNDER-RESOLVED]" } else { "" }
        );
    }
    println!(
        "simulate: {} steps to t = {}, {} snapshots in {}, cfl violations = {}",
        n_steps,
        state.t,
        snap_index,
        out.display(),
        cfl_violations
    );
    Ok(0)
}

fn sync(args: &[String]) -> CliResult {
    let mut flags = Flags::parse(args)?;
    let cfg = config_from(&mut flags)?;
    let steady = flags.has_switch("steady");
    let out = ensure_dir(&cfg.output_dir)?;

    let (report_data, label) = if steady {
        (run_steady_reference_experiment(&cfg)?, "steady-reference")
    } else {
        (run_twin_experiment(&cfg)?, "twin")
    };

    fs::write(out.join("w_norm.csv"), report::w_norm_csv(&report_data))?;
    fs::write(
        out.join("decay_report.txt"),
        report::decay_report_txt(&report_data, label),
    )?;
    println!(
        "sync ({label}): w0 = {:.6e}, final ratio = {:.6e}, sigma = {}, envelope = {:.6e}",
        report_data.w0_l2,
        report_data.final_ratio(),
        report_data
            .sigma
            .map(|s| format!("{s:.6e}"))
            .unwrap_or_else(|| "n/a".into()),
        report_data.envelope
    );
    Ok(0)
}

fn analyze(args: &[String]) -> CliResult {
    let mut flags = Flags::parse(args)?;
    let cfg = match flags.take("config") {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Validation(format!("cannot read config '{path}': {e}")))?;
            Some(ExperimentConfig::parse(&text)?)
        }
        None => None,
    };
    let input = flags
        .take("input")
        .or_else(|| cfg.as_ref().map(|c| c.output_dir.clone()))
        .ok_or_else(|| CliError::Usage("--input DIR (or --config with output_dir) required".into()))?;
    let out_dir = flags.take("out").unwrap_or_else(|| input.clone());

    // threshold knobs: config values, overridable by bare flags
    let mut r = cfg.as_ref().map(|c| c.r).unwrap_or(2.5);
    let mut c_r = cfg.as_ref().map(|c| c.c_r).unwrap_or(0.05);
    let mut c0 = cfg.as_ref().map(|c| c.c0).unwrap_or(0.05);
    let mut d_override = cfg.as_ref().and_then(|c| c.d_override);
    if let Some(v) = flags.take("r") {
        r = v
            .parse()
            .map_err(|_| CliError::Validation(format!("cannot parse r = '{v}'")))?;
    }
    if let Some(v) = flags.take("c_r") {
        c_r = v
            .parse()
            .map_err(|_| CliError::Validation(format!("cannot parse c_r = '{v}'")))?;
    }
    if let Some(v) = flags.take("c0") {
        c0 = v
            .parse()
            .map_err(|_| CliError::Validation(format!("cannot parse c0 = '{v}'")))?;
    }
    if let Some(v) = flags.take("d_override") {
        d_override = Some(
            v.parse()
                .map_err(|_| CliError::Validation(format!("cannot parse d_override = '{v}'")))?,
        );
    }
    if let Some((k, _)) = flags.pairs.first() {
        return Err(CliError::Usage(format!("unknown flag --{k} for analyze")));
    }

    let mut files: Vec<PathBuf> = fs::read_dir(&input)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|s| s.to_str())
                .map(|s| s.starts_with("snap_") && s.ends_with(".bin"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Validation(format!(
            "no snap_*.bin files in '{input}'"
        )));
    }

    // fan out across snapshot files; the deterministic merge below sorts
    // by timestamp
    let loaded: Result<Vec<_>, CliError> = files
        .par_iter()
        .map(|path| -> Result<_, CliError> {
            let (header, field) = read_snapshot(path)?;
            let th = DiagnosticThresholds {
                r,
                c_r,
                c0,
                nu: header.nu,
            };
            let snap = analyze_snapshot(header.t, &field, &th)?;
            Ok((header, snap))
        })
        .collect();
    let mut loaded = loaded?;
    loaded.sort_by(|a, b| a.0.t.partial_cmp(&b.0.t).unwrap());

    let first = &loaded[0].0;
    let nu = first.nu;
    let grid = TorusGrid::new(first.n as usize, first.l)?;
    for (h, _) in &loaded {
        if h.n != first.n || h.l != first.l || h.nu != first.nu {
            return Err(CliError::Validation(
                "snapshot directory mixes incompatible runs (N, L, nu differ)".into(),
            ));
        }
    }
    if let Some(c) = &cfg {
        if (c.nu - nu).abs() > 1e-15 * nu.abs() {
            eprintln!(
                "warning: config nu = {} differs from snapshot nu = {}; using snapshot value",
                c.nu, nu
            );
        }
    }

    let records: Vec<_> = loaded.iter().map(|(_, s)| s.record.clone()).collect();
    let shells: Vec<_> = loaded.iter().map(|(_, s)| s.shells.clone()).collect();
    let forcing_field = cfg.as_ref().map(|c| c.forcing.build(&grid));
    let avg = averaged_diagnostics(
        &records,
        &shells,
        r,
        nu,
        &grid,
        forcing_field.as_ref(),
        d_override,
    )?;
    let bounds = bound_reports(&records, &avg, r, nu, &grid);

    let out = ensure_dir(&out_dir)?;
    fs::write(out.join("wavenumbers.csv"), report::wavenumbers_csv(&records))?;
    fs::write(
        out.join("report.txt"),
        report::analysis_report_txt(&avg, &bounds, r, nu, &grid),
    )?;
    println!(
        "analyze: {} snapshots, <Lambda> = {:.6e}, d = {:.3}, outputs in {}",
        records.len(),
        avg.mean_lambda,
        avg.d_used,
        out.display()
    );
    Ok(0)
}

fn spectrum(args: &[String]) -> CliResult {
    let mut flags = Flags::parse(args)?;
    let snap = flags
        .take("snapshot")
        .ok_or_else(|| CliError::Usage("--snapshot PATH is required".into()))?;
    let r: f64 = match flags.take("r") {
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Validation(format!("cannot parse r = '{v}'")))?,
        None => 2.5,
    };
    if !(r > 1.0) {
        return Err(CliError::Validation(format!(
            "r = {r} out of range for shell norms (need r > 1)"
        )));
    }
    let out = flags.take("out");
    if let Some((k, _)) = flags.pairs.first() {
        return Err(CliError::Usage(format!("unknown flag --{k} for spectrum")));
    }

    let (_, field) = read_snapshot(Path::new(&snap))?;
    let field = field.dealias();
    let mut dec = ShellDecomposition::new(&field);
    let l2 = dec.norms(2.0).map_err(CliError::from)?;
    let lr = dec.norms(r).map_err(CliError::from)?;
    let linf = dec.norms(f64::INFINITY).map_err(CliError::from)?;
    let csv = report::spectrum_csv(field.grid(), r, &l2, &lr, &linf);
    match out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}
