use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use contractive_core::evolution::{com_evolve, contraction_minimum, epr_invariance_check, omega_sq_closed,
    uniform_grid};
use contractive_core::gaussian::{apply_local_transform, make_stms};
use contractive_core::grid::{entropy_numeric, GridSpec};
use contractive_core::measures::{eof_of, eof_stms, epr_stms, omega_of};
use contractive_core::restore::{transformed_coefficients, SolverOptions};
use contractive_core::trajectory::{run_trajectory, TrajectoryRecord, TrajectoryRun};
use contractive_core::{LocalTransform, StmsParams};
use serde::Serialize;

use crate::config::{angle_label, RunConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, format_float, partial_path, write_json, write_series_csv,
    write_trajectory_csv};

pub fn solver_options(cfg: &RunConfig) -> SolverOptions {
    match cfg.tol_residual {
        Some(tol) => SolverOptions::default().with_target_residual(tol),
        None => SolverOptions::default(),
    }
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    uniform_grid(cfg.t_max, cfg.t_steps)
}

fn s0_label(s0: f64) -> String {
    format!("{s0}")
}

/// Last good time and the partial file written for a diverged run.
type Failure = (f64, PathBuf);

/// Writes a run, or its `.partial` version when it stopped early.
/// Returns the divergence time in the latter case.
fn write_run<T: Serialize>(
    csv_path: &Path,
    json_value: &T,
    run: &[(f64, Vec<TrajectoryRecord>)],
    single: bool,
    cfg: &RunConfig,
    failed: Option<f64>,
) -> Result<(Vec<PathBuf>, Option<Failure>), CliError> {
    let wrap = |p: PathBuf| if failed.is_some() { partial_path(&p) } else { p };
    let mut written = Vec::new();
    if cfg.format.csv() {
        let p = wrap(csv_path.to_path_buf());
        if single {
            write_trajectory_csv(&p, &run[0].1)?;
        } else {
            write_series_csv(&p, run)?;
        }
        written.push(p);
    }
    if cfg.format.json() {
        let p = wrap(csv_path.with_extension("json"));
        write_json(&p, json_value)?;
        written.push(p);
    }
    Ok((written.clone(), failed.map(|t| (t, written[0].clone()))))
}

fn divergence_time(run: &TrajectoryRun) -> Result<Option<f64>, CliError> {
    match &run.error {
        None => Ok(None),
        Some(contractive_core::Error::SolverDiverged { last_good_t }) => Ok(Some(*last_good_t)),
        Some(e) => Err(e.clone().into()),
    }
}

/// One trajectory file per `(s0, phi0)`.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let grid = time_grid(cfg);
    let opts = solver_options(cfg);
    let mut written = Vec::new();
    let mut first_failure = None;
    for &s0 in &cfg.s0 {
        for &phi0 in &cfg.phi0 {
            let params = StmsParams::new(s0, phi0)?;
            let run = run_trajectory(params, &grid, opts)?;
            let failed = divergence_time(&run)?;
            let path = cfg
                .out
                .join(format!("traj_s0-{}_phi0-{}.csv", s0_label(s0), angle_label(phi0)));
            let (files, fail) =
                write_run(&path, &run.records, &[(phi0, run.records.clone())], true, cfg, failed)?;
            written.extend(files);
            if first_failure.is_none() {
                first_failure = fail;
            }
        }
    }
    match first_failure {
        Some((last_good_t, partial)) => Err(CliError::Diverged { last_good_t, partial }),
        None => Ok(written),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Entanglement of formation over time
    Fig1,
    /// Rotation angle and squeezing of the restoring transform
    Fig2,
    /// Restored phase
    Fig3a,
    /// Restored squeezing strength
    Fig3b,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
        }
    }

    /// Defaults for this figure: `s0 = 0.5` on a fine grid up to `t = 5`.
    pub fn defaults(self) -> RunConfig {
        let phi0 = match self {
            Figure::Fig1 | Figure::Fig2 => vec![PI / 4.0, PI / 2.0, PI],
            Figure::Fig3a => vec![PI / 4.0, 0.4 * PI, PI / 2.0],
            Figure::Fig3b => vec![PI / 4.0, 0.4 * PI, PI / 2.0, PI],
        };
        RunConfig { phi0, t_steps: 500, ..RunConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub phi0: f64,
    pub records: Vec<TrajectoryRecord>,
    /// Last good time if the restoration diverged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub figure: Figure,
    pub s0: f64,
    pub series: Vec<Series>,
}

pub fn figure_data(which: Figure, cfg: &RunConfig) -> Result<FigureData, CliError> {
    let [s0] = cfg.s0[..] else {
        return Err(CliError::Usage("figures take a single s0".into()));
    };
    let grid = time_grid(cfg);
    let opts = solver_options(cfg);
    let mut series = Vec::new();
    for &phi0 in &cfg.phi0 {
        let run = run_trajectory(StmsParams::new(s0, phi0)?, &grid, opts)?;
        series.push(Series { phi0, diverged_after: divergence_time(&run)?, records: run.records });
    }
    Ok(FigureData { figure: which, s0, series })
}

pub fn cmd_figure(which: Figure, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let data = figure_data(which, cfg)?;
    let failed = data.series.iter().find_map(|s| s.diverged_after);
    let rows: Vec<(f64, Vec<TrajectoryRecord>)> =
        data.series.iter().map(|s| (s.phi0, s.records.clone())).collect();
    let path = cfg.out.join(format!("{}.csv", which.name()));
    let (written, fail) = write_run(&path, &data, &rows, false, cfg, failed)?;
    match fail {
        Some((last_good_t, partial)) => Err(CliError::Diverged { last_good_t, partial }),
        None => Ok(written),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s0: f64,
    pub phi0: f64,
    pub f0: f64,
    pub contractive: bool,
    pub t_min: Option<f64>,
    pub var_min: Option<f64>,
    pub t_separable: Option<f64>,
    pub eof_start: f64,
    pub eof_min: f64,
    pub t_eof_min: f64,
    pub eof_end: f64,
    pub s_end: f64,
}

const SWEEP_COLUMNS: [&str; 12] = [
    "s0", "phi0", "F0", "contractive", "t_min", "var_min", "t_separable", "eof_start", "eof_min",
    "t_eof_min", "eof_end", "s_end",
];

pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let grid = time_grid(cfg);
    let opts = solver_options(cfg);
    let mut rows = Vec::new();
    for &s0 in &cfg.s0 {
        for &phi0 in &cfg.phi0 {
            let params = StmsParams::new(s0, phi0)?;
            let rep = contraction_minimum(params);
            let run = run_trajectory(params, &grid, opts)?;
            if let Some(e) = run.error {
                return Err(e.into());
            }
            let recs = &run.records;
            let min = recs
                .iter()
                .min_by(|a, b| a.eof.total_cmp(&b.eof))
                .expect("grid has at least three points");
            let last = recs.last().expect("non-empty");
            rows.push(SweepRow {
                s0,
                phi0,
                f0: epr_stms(params),
                contractive: rep.contractive,
                t_min: rep.t_min,
                var_min: rep.var_min,
                t_separable: rep.t_separable,
                eof_start: recs[0].eof,
                eof_min: min.eof,
                t_eof_min: min.t,
                eof_end: last.eof,
                s_end: last.s,
            });
        }
    }
    Ok(rows)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>9} {:>8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "s0", "phi0", "F0", "contr", "t_min", "var_min", "t_sep", "E_min", "E_end", "s_end"
    );
    let short = |v: Option<f64>| v.map(|x| format!("{x:.5}")).unwrap_or_else(|| "-".into());
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>9} {:>8.4} {:>5} {:>8} {:>8} {:>8} {:>8.5} {:>8.5} {:>8.5}",
            r.s0,
            angle_label(r.phi0),
            r.f0,
            if r.contractive { "yes" } else { "no" },
            short(r.t_min),
            short(r.var_min),
            short(r.t_separable),
            r.eof_min,
            r.eof_end,
            r.s_end,
        );
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(Vec<PathBuf>, String), CliError> {
    ensure_dir(&cfg.out)?;
    let rows = sweep_rows(cfg)?;
    let mut written = Vec::new();
    if cfg.format.csv() {
        let path = cfg.out.join("sweep.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e.into()))?;
        let write = |w: &mut csv::Writer<_>| -> csv::Result<()> {
            w.write_record(SWEEP_COLUMNS)?;
            for r in &rows {
                w.write_record([
                    format_float(r.s0),
                    format_float(r.phi0),
                    format_float(r.f0),
                    r.contractive.to_string(),
                    opt_cell(r.t_min),
                    opt_cell(r.var_min),
                    opt_cell(r.t_separable),
                    format_float(r.eof_start),
                    format_float(r.eof_min),
                    format_float(r.t_eof_min),
                    format_float(r.eof_end),
                    format_float(r.s_end),
                ])?;
            }
            w.flush()?;
            Ok(())
        };
        write(&mut w).map_err(|e| CliError::io(&path, e.into()))?;
        written.push(path);
    }
    if cfg.format.json() {
        let path = cfg.out.join("sweep.json");
        write_json(&path, &rows)?;
        written.push(path);
    }
    Ok((written, sweep_table(&rows)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("max deviation {worst:.3e} (limit {tol:.0e})"),
    }
}

fn failure(name: &'static str, err: impl std::fmt::Display) -> CheckResult {
    CheckResult { name, passed: false, detail: err.to_string() }
}

fn params_list(cfg: &RunConfig) -> Result<Vec<StmsParams>, CliError> {
    let mut out = Vec::new();
    for &s0 in &cfg.s0 {
        for &phi0 in &cfg.phi0 {
            out.push(StmsParams::new(s0, phi0)?);
        }
    }
    Ok(out)
}

fn phases(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * PI * k as f64 / n as f64)
}

fn check_stms_identity(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let mut worst = 0.0f64;
    for &s0 in &cfg.s0 {
        for phi in phases(64) {
            let st = make_stms(StmsParams::new(s0, phi)?);
            let scale = 1f64.max(st.alpha().norm_sqr() + st.gamma().norm_sqr());
            worst = worst.max((st.stms_invariant() - 1.0).norm() / scale);
        }
    }
    Ok(check("stms_identity", worst, 1e-14))
}

fn check_phase_independence(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let mut worst = 0.0f64;
    for &s0 in &cfg.s0 {
        let eofs = phases(64)
            .map(|phi| Ok(eof_of(&make_stms(StmsParams::new(s0, phi)?))?.eof))
            .collect::<Result<Vec<_>, CliError>>()?;
        let hi = eofs.iter().copied().fold(f64::MIN, f64::max);
        let lo = eofs.iter().copied().fold(f64::MAX, f64::min);
        worst = worst.max(hi - lo);
    }
    Ok(check("phase_independence", worst, 1e-12))
}

fn check_epr_invariance(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let grid = time_grid(cfg);
    let mut worst = 0.0f64;
    for p in params_list(cfg)? {
        worst = worst.max(epr_invariance_check(p, &grid)?);
    }
    Ok(check("epr_invariance", worst, 1e-10))
}

fn check_omega_closed_form(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let mut worst = 0.0f64;
    for p in params_list(cfg)? {
        for t in time_grid(cfg) {
            let omega = omega_of(&com_evolve(p, t)?)?;
            let closed = omega_sq_closed(p, t);
            worst = worst.max((4.0 * omega * omega - closed).abs() / closed);
        }
    }
    Ok(check("omega_closed_form", worst, 1e-10))
}

fn check_transform_oracle(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let mut worst = 0.0f64;
    for p in params_list(cfg)? {
        for t in [0.0, 0.5 * cfg.t_max, cfg.t_max] {
            for theta in [-2.0, -0.5, 1.0, 2.5] {
                for r in [-1.0, 0.3, 1.2] {
                    let xf = LocalTransform::new(theta, r);
                    let a = transformed_coefficients(p, t, &xf)?;
                    let b = apply_local_transform(&com_evolve(p, t)?, &xf)?;
                    worst = worst
                        .max((a.alpha() - b.alpha()).norm())
                        .max((a.gamma() - b.gamma()).norm());
                }
            }
        }
    }
    Ok(check("transform_oracle", worst, 1e-9))
}

fn check_restore(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    const NAME: &str = "restore_consistency";
    let grid = time_grid(cfg);
    let mut residual = 0.0f64;
    let mut mismatch = 0.0f64;
    let mut start = 0.0f64;
    let mut r_drop = 0.0f64;
    for p in params_list(cfg)? {
        let run = run_trajectory(p, &grid, solver_options(cfg))?;
        if let Some(e) = run.error {
            return Ok(failure(NAME, e));
        }
        for (i, rec) in run.records.iter().enumerate() {
            residual = residual.max(rec.residual);
            mismatch = mismatch.max((eof_stms(rec.s) - rec.eof).abs());
            if i > 0 {
                r_drop = r_drop.max(run.records[i - 1].r - rec.r);
            }
        }
        start = start.max(run.records[0].theta.abs()).max(run.records[0].r.abs());
    }
    let passed = residual <= 1e-10 && mismatch <= 1e-8 && start <= 1e-9 && r_drop <= 1e-7;
    Ok(CheckResult {
        name: NAME,
        passed,
        detail: format!(
            "residual {residual:.3e}, entanglement mismatch {mismatch:.3e}, start {start:.1e}, r decrease {r_drop:.1e}"
        ),
    })
}

fn check_grid(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    const NAME: &str = "grid_battery";
    let mut worst = 0.0f64;
    for p in params_list(cfg)? {
        let mut times = vec![0.0, 0.5, 1.0, (2.0 * p.s0()).tanh()];
        times.sort_by(f64::total_cmp);
        times.dedup();
        for t in times {
            let st = com_evolve(p, t)?;
            let grid = GridSpec::auto_with(&st, cfg.grid_n)?;
            match entropy_numeric(&st, &grid) {
                Ok(e) => worst = worst.max((e - eof_of(&st)?.eof).abs()),
                Err(e) => return Ok(failure(NAME, e)),
            }
        }
    }
    Ok(check(NAME, worst, 1e-4))
}

pub fn run_checks(cfg: &RunConfig) -> Result<Vec<CheckResult>, CliError> {
    Ok(vec![
        check_stms_identity(cfg)?,
        check_phase_independence(cfg)?,
        check_epr_invariance(cfg)?,
        check_omega_closed_form(cfg)?,
        check_transform_oracle(cfg)?,
        check_restore(cfg)?,
        check_grid(cfg)?,
    ])
}

pub fn check_table(results: &[CheckResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "{}  {:<20} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    s
}

pub fn cmd_check(cfg: &RunConfig) -> Result<String, CliError> {
    let results = run_checks(cfg)?;
    let table = check_table(&results);
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.name.to_string()).collect();
    if failed.is_empty() {
        Ok(table)
    } else {
        print!("{table}");
        Err(CliError::CheckFailed(failed))
    }
}
