//! Pipeline stages driven by an [`ExperimentConfig`]: design, simulate,
//! verify, report, and one-axis sweeps. Every stage reads its predecessors'
//! artifacts from the output directory and fails fast when one is missing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::amplify::{
    calibrate_constants, holder_c1half_norm, mvt_chain_diagnostic, select_params, verify_snapshot, ConstructionParams,
    FieldSamples, PilotMeasurement, Problem, ReportHeader, VerificationReport, VerifyOptions,
};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry::{place_centers, AmplificationSites, Point, SetExpr};
use crate::herglotz::{
    ball_collocation, domain_collocation, exact_single_ball_kernel_2d, fit_kernel_sweep, make_u0, read_kernel,
    residuals, write_kernel, FitOptions, FitReport, FitTarget, HerglotzKernel, SetResidual, U0,
};
use crate::schrodinger::{
    assemble_f1, assemble_f2, assemble_hat_c, solve_linear_auxiliary, solve_linear_ibvp, solve_nonlinear_auxiliary,
    solve_nonlinear_cauchy, Boundary, CoefficientSet, ComplexField, Grid2D, SolveOptions, Trajectory,
};
use crate::transmission::{peak_2d, TransmissionMode};
use crate::Complex64;

pub const DESIGN_FILE: &str = "design.json";
pub const KERNEL_FILE: &str = "kernel.txt";
pub const SIMULATE_FILE: &str = "simulate.json";
pub const AUX_DIR: &str = "auxiliary";
pub const DIRECT_DIR: &str = "direct";
pub const REPORT_STEM: &str = "report";
/// Solver tolerance of the homogeneous conservation run.
const CONSERVATION_SOLVE_TOL: f64 = 1e-12;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignArtifacts {
    /// Parameters in use, after any configured overrides.
    pub params: ConstructionParams,
    /// r₀ and m as the selection formulas gave them.
    pub selected_r0: f64,
    pub selected_m: u32,
    pub sites: AmplificationSites,
    pub modes: Vec<TransmissionMode>,
    pub exact_kernel: bool,
    pub fit: Option<FitReport>,
    pub residuals: Vec<SetResidual>,
    /// Largest per-set residual.
    pub eps_hat: f64,
    /// eps_hat ≤ ε required by the formulas.
    pub eps_feasible: bool,
}

impl DesignArtifacts {
    pub fn eps_domain(&self) -> f64 {
        self.residuals.iter().filter(|r| r.name == "domain").map(|r| r.eps).fold(0.0, f64::max)
    }

    pub fn eps_ball(&self) -> f64 {
        self.residuals.iter().filter(|r| r.name != "domain").map(|r| r.eps).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub artifacts: DesignArtifacts,
    pub kernel: HerglotzKernel,
}

impl Design {
    pub fn load(out: &Path) -> Result<Self> {
        let artifacts = read_json(&out.join(DESIGN_FILE))?;
        let kernel = read_kernel(&out.join(KERNEL_FILE))?;
        Ok(Design { artifacts, kernel })
    }

    pub fn u0(&self) -> U0 {
        make_u0(self.kernel.clone())
    }
}

fn fit_targets(cfg: &ExperimentConfig, modes: &[TransmissionMode], r0: f64) -> Result<FitTarget> {
    let f = &cfg.fitter;
    let mut sets = modes
        .iter()
        .map(|m| ball_collocation(m, f.n_radial, f.n_angular, f.ball_weight))
        .collect::<Result<Vec<_>>>()?;
    sets.push(domain_collocation(&cfg.geometry.d, r0, f.domain_h, f.domain_weight)?);
    Ok(FitTarget::new(sets))
}

/// Parameter selection, site placement, modes and the kernel fit.
///
/// Artifacts are written before an infeasible residual is reported, so the
/// failed design can still be inspected.
pub fn run_design(cfg: &ExperimentConfig, out: &Path) -> Result<Design> {
    cfg.validate()?;
    let g = &cfg.geometry;
    let omega = match cfg.problem {
        Problem::Linear => g.omega.as_ref(),
        Problem::Nonlinear => None,
    };
    let selected = select_params(cfg.m_target, &g.points, &g.d, omega, &cfg.design.constants, 2, cfg.horizon)?;
    let mut params = selected.clone();
    if let Some(r0) = cfg.design.r0 {
        params = params.with_r0(r0)?;
    }
    if let Some(m) = cfg.design.m {
        params.m = m;
    }
    let sites = place_centers(&g.points, params.r0, &g.d, omega)?;
    let modes = sites
        .centers_y
        .iter()
        .map(|y| TransmissionMode::new_2d(params.m, params.r0, *y))
        .collect::<Result<Vec<_>>>()?;
    let targets = fit_targets(cfg, &modes, params.r0)?;
    let (kernel, fit) = if cfg.design.exact_kernel {
        (exact_single_ball_kernel_2d(&modes[0], cfg.fitter.n_nodes)?, None)
    } else {
        let opts = FitOptions { lambdas: cfg.fitter.lambdas.clone(), ..FitOptions::default() };
        let (k, r) = fit_kernel_sweep(&targets, cfg.fitter.n_nodes, &opts)?;
        (k, Some(r))
    };
    let residuals = match &fit {
        Some(r) => r.sets.clone(),
        None => residuals(&targets, &kernel)?,
    };
    let eps_hat = residuals.iter().map(|r| r.eps).fold(0.0, f64::max);
    let artifacts = DesignArtifacts {
        eps_feasible: eps_hat <= params.eps,
        params,
        selected_r0: selected.r0,
        selected_m: selected.m,
        sites,
        modes,
        exact_kernel: cfg.design.exact_kernel,
        fit,
        residuals,
        eps_hat,
    };
    ensure_dir(out)?;
    write_json(&out.join(DESIGN_FILE), &artifacts)?;
    write_kernel(&kernel, &out.join(KERNEL_FILE))?;
    if cfg.design.enforce_eps {
        artifacts.params.check_achieved(eps_hat)?;
    }
    Ok(Design { artifacts, kernel })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_snapshots: usize,
    pub max_linear_iterations: usize,
    pub max_picard: usize,
    pub wall_seconds: f64,
}

impl RunSummary {
    fn of(traj: &Trajectory, start: Instant) -> Self {
        RunSummary {
            n_snapshots: traj.snapshots.len(),
            max_linear_iterations: traj.max_linear_iterations(),
            max_picard: traj.max_picard(),
            wall_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub problem: Problem,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub direct: RunSummary,
    pub auxiliary: RunSummary,
    pub homogeneous: RunSummary,
    /// Relative mass drift of the homogeneous Hermitian sub-run.
    pub conservation_drift: f64,
    /// (t, ‖u_direct − (u₀ + 𝒰)‖/‖u_direct‖) at each stored step.
    pub discrepancy: Vec<(f64, f64)>,
    pub decomposition_discrepancy: f64,
}

fn snapshot_name(k: usize) -> String {
    format!("snap_{k:05}.txt")
}

fn dump(dir: &Path, traj: &Trajectory) -> Result<()> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    ensure_dir(dir)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        s.write_snapshot(&dir.join(snapshot_name(k)))?;
    }
    Ok(())
}

/// Sorted snapshot files of one trajectory directory.
pub fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingArtifact(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("snap_")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::MissingArtifact(dir.join(snapshot_name(0))));
    }
    Ok(files)
}

fn rel_gap(direct: &ComplexField, aux: &ComplexField, h: &[Complex64]) -> f64 {
    let f = U0::time_factor(direct.t);
    let (mut num, mut den) = (0.0, 0.0);
    for ((d, a), h) in direct.values.iter().zip(&aux.values).zip(h) {
        num += (d - (a + h * f)).norm_sqr();
        den += d.norm_sqr();
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Gaussian packet at the centroid of D, negligible on the box boundary.
fn packet(grid: &Grid2D, c: Point) -> ComplexField {
    ComplexField::from_fn(grid, 0.0, |p| {
        let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
        Complex64::from_polar((-r2 / 0.02).exp(), 3.0 * p[0])
    })
}

/// Homogeneous Hermitian run with the A₁ contrast: the discrete mass must stay put.
pub fn conservation_run(coeffs: &CoefficientSet, grid: &Grid2D, centroid: Point, stride: usize) -> Result<Trajectory> {
    let opts = SolveOptions { stride, tol: CONSERVATION_SOLVE_TOL, ..SolveOptions::default() };
    let linear = CoefficientSet {
        b: crate::schrodinger::BSpec::Identity,
        c: crate::schrodinger::CSpec::Zero,
        alphas: vec![],
        ..coeffs.clone()
    };
    solve_linear_ibvp(&linear, grid, &packet(grid, centroid), &Boundary::Zero, &opts)
}

/// Direct and auxiliary solves plus the conservation sub-run.
pub fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulationSummary> {
    cfg.validate()?;
    let design = Design::load(out)?;
    let u0 = design.u0();
    let grid = cfg.grid()?;
    let coeffs = cfg.coefficient_set()?;
    coeffs.validate(&cfg.geometry.d, &grid, cfg.seed)?;
    let opts = SolveOptions { stride: cfg.stride, ..SolveOptions::default() };
    let h = u0.kernel.sample_grid(&grid.sample_grid(), 0, 0);
    let phi = ComplexField::from_values(&grid, 0.0, h.clone());
    let psi = Boundary::Harmonic { spatial: h.clone(), omega: 1.0 };

    let start = Instant::now();
    let aux = match cfg.problem {
        Problem::Linear => solve_linear_auxiliary(&coeffs, &grid, &assemble_f1(&coeffs, &u0), &opts)?,
        Problem::Nonlinear => {
            solve_nonlinear_auxiliary(&coeffs, &grid, &assemble_f2(&coeffs, &u0), &assemble_hat_c(&coeffs, &u0), &opts)?
        }
    };
    let aux_summary = RunSummary::of(&aux, start);
    let start = Instant::now();
    let direct = match cfg.problem {
        Problem::Linear => solve_linear_ibvp(&coeffs, &grid, &phi, &psi, &opts)?,
        Problem::Nonlinear => solve_nonlinear_cauchy(&coeffs, &grid, &phi, &psi, &opts)?,
    };
    let direct_summary = RunSummary::of(&direct, start);
    let start = Instant::now();
    let homog = conservation_run(&coeffs, &grid, cfg.geometry.d.centroid(), cfg.stride)?;
    let homog_summary = RunSummary::of(&homog, start);

    dump(&out.join(AUX_DIR), &aux)?;
    dump(&out.join(DIRECT_DIR), &direct)?;
    let discrepancy: Vec<(f64, f64)> =
        direct.snapshots.iter().zip(&aux.snapshots).map(|(d, a)| (d.t, rel_gap(d, a, &h))).collect();
    let summary = SimulationSummary {
        problem: cfg.problem,
        nx: grid.nx,
        ny: grid.ny,
        dt: grid.dt,
        t_end: grid.t_end,
        stride: cfg.stride,
        direct: direct_summary,
        auxiliary: aux_summary,
        homogeneous: homog_summary,
        conservation_drift: homog.mass_drift(),
        decomposition_discrepancy: discrepancy.iter().map(|d| d.1).fold(0.0, f64::max),
        discrepancy,
    };
    write_json(&out.join(SIMULATE_FILE), &summary)?;
    Ok(summary)
}

fn verify_options(cfg: &ExperimentConfig) -> VerifyOptions {
    VerifyOptions {
        m_target: cfg.m_target,
        level: cfg.verify.level,
        ratio_target: cfg.verify.ratio_target,
        pair_budget: cfg.verify.pair_budget,
        mvt_slack: cfg.verify.mvt_slack,
    }
}

/// Every amplification measurement at every stored step of u = u₀ + 𝒰.
pub fn run_verify(cfg: &ExperimentConfig, out: &Path) -> Result<VerificationReport> {
    cfg.validate()?;
    let design = Design::load(out)?;
    let sim: SimulationSummary = read_json(&out.join(SIMULATE_FILE))?;
    let files = snapshot_files(&out.join(AUX_DIR))?;
    let u0 = design.u0();
    let art = &design.artifacts;
    let d = &cfg.geometry.d;
    let dbar: SetExpr = d.clone().into();
    let opts = verify_options(cfg);
    let jet = |p: Point| {
        let j = u0.jet2(p, 0.0);
        (j.v, [j.dx, j.dy])
    };

    let mut steps = Vec::with_capacity(files.len());
    let mut aux_sup = 0.0f64;
    let mut u0_dbar = 0.0f64;
    for f in &files {
        let field = ComplexField::read_snapshot(f)?;
        steps.push(verify_snapshot(&field, Some(&u0), &art.sites, d, &opts)?);
        aux_sup = aux_sup.max(holder_c1half_norm(&FieldSamples::from_grid(&field, &dbar)?, opts.pair_budget)?);
        if u0_dbar == 0.0 {
            // |u₀| and its derivatives have time-independent moduli.
            let zero = ComplexField { values: vec![Complex64::new(0.0, 0.0); field.values.len()], ..field.clone() };
            u0_dbar = holder_c1half_norm(&FieldSamples::from_grid_with(&zero, &dbar, jet)?, opts.pair_budget)?;
        }
    }
    let dbar_u0 = FieldSamples::from_u0(&u0, 0.0, &dbar, art.sites.r0 / 8.0)?;
    let u0_peak = art
        .sites
        .centers_y
        .iter()
        .map(|y| mvt_chain_diagnostic(&jet, *y, art.sites.r0, d, &dbar_u0).peak)
        .fold(f64::INFINITY, f64::min);
    let pilot = PilotMeasurement {
        eps_domain: art.eps_domain(),
        eps_ball: art.eps_ball(),
        u0_c1half_dbar: u0_dbar,
        peak_deficit: (peak_2d(art.params.m, art.params.r0) - u0_peak).max(0.0),
        aux_linear: (cfg.problem == Problem::Linear).then_some(aux_sup),
        aux_nonlinear: (cfg.problem == Problem::Nonlinear).then_some(aux_sup),
        horizon: cfg.horizon,
    };
    let header = ReportHeader {
        problem: cfg.problem,
        m: art.params.m,
        eps_hat: art.residuals.iter().map(|r| (r.name.clone(), r.eps)).collect(),
        constants: calibrate_constants(&[pilot]),
        conservation_drift: Some(sim.conservation_drift),
        decomposition_discrepancy: Some(sim.decomposition_discrepancy),
    };
    let report = VerificationReport::assemble(header, &art.sites, &opts, steps)?;
    report.write(out, REPORT_STEM)?;
    Ok(report)
}

/// Human summary of a finished run plus any sweep tables in `out`.
pub fn run_report(out: &Path) -> Result<String> {
    let report = VerificationReport::read(&out.join(format!("{REPORT_STEM}.json")))?;
    let mut s = report.summary();
    let mut tables: Vec<PathBuf> = std::fs::read_dir(out)
        .map_err(|e| Error::io(out, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("sweep_") && n.ends_with(".csv"))
        })
        .collect();
    tables.sort();
    for t in tables {
        let _ = writeln!(s, "\n{}:", t.display());
        s += &std::fs::read_to_string(&t).map_err(|e| Error::io(&t, e))?;
    }
    Ok(s)
}

/// Max-norm error of the Crank–Nicolson plane-wave run on the unit square,
/// n nodes per side, dt = dt_ratio·dx, T = 1.
pub fn plane_wave_error(n: usize, dt_ratio: f64) -> Result<f64> {
    let th = [0.3f64.cos(), 0.3f64.sin()];
    let dx = 1.0 / (n - 1) as f64;
    let g = Grid2D::new([0.0, 0.0], [1.0, 1.0], n, n, dt_ratio * dx, 1.0)?;
    let coeffs = CoefficientSet::free(crate::schrodinger::Bump { center: [0.5, 0.5], radius: 0.1 });
    let spatial = ComplexField::from_fn(&g, 0.0, |p| Complex64::from_polar(1.0, th[0] * p[0] + th[1] * p[1]));
    let psi = Boundary::Harmonic { spatial: spatial.values.clone(), omega: 1.0 };
    let traj = solve_linear_ibvp(&coeffs, &g, &spatial, &psi, &SolveOptions::default())?;
    let f = U0::time_factor(1.0);
    Ok(traj.last.values.iter().zip(&spatial.values).map(|(u, s)| (u - s * f).norm()).fold(0.0, f64::max))
}

/// dt/dx used by the grid-axis plane-wave column.
pub const PLANE_WAVE_DT_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    M,
    Lambda,
    NNodes,
    Grid,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(SweepAxis::M),
            "lambda" => Ok(SweepAxis::Lambda),
            "n_nodes" | "n-nodes" => Ok(SweepAxis::NNodes),
            "grid" => Ok(SweepAxis::Grid),
            _ => Err(Error::Validation(format!("unknown sweep axis {s:?}; use m, lambda, n_nodes or grid"))),
        }
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::Lambda => "lambda",
            SweepAxis::NNodes => "n_nodes",
            SweepAxis::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// "ok" or the error that stopped this row.
    pub status: String,
    pub eps_hat: Option<f64>,
    /// Smallest grad_sup over stored steps, per site.
    pub grad_sup: Vec<f64>,
    pub ratio: Option<f64>,
    pub area: Option<f64>,
    pub discrepancy: Option<f64>,
    pub plane_wave_error: Option<f64>,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let o = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6e}"));
        let mut s =
            format!("{},status,eps_hat,grad_sup,ratio,area,discrepancy,plane_wave_error,order\n", self.axis.name());
        for r in &self.rows {
            let g: Vec<String> = r.grad_sup.iter().map(|x| format!("{x:.6e}")).collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.value,
                r.status.replace(',', ";"),
                o(r.eps_hat),
                g.join(" "),
                o(r.ratio),
                o(r.area),
                o(r.discrepancy),
                o(r.plane_wave_error),
                o(r.order)
            );
        }
        s
    }
}

fn sweep_point(cfg: &ExperimentConfig, dir: &Path) -> Result<SweepRow> {
    let design = run_design(cfg, dir)?;
    let sim = run_simulate(cfg, dir)?;
    let rep = run_verify(cfg, dir)?;
    let n = design.artifacts.sites.n();
    let grad_sup =
        (0..n).map(|i| rep.steps.iter().map(|s| s.sites[i].grad_sup).fold(f64::INFINITY, f64::min)).collect();
    Ok(SweepRow {
        value: 0.0,
        status: "ok".into(),
        eps_hat: Some(design.artifacts.eps_hat),
        grad_sup,
        ratio: Some(rep.min_ratio()),
        area: Some(rep.max_area()),
        discrepancy: Some(sim.decomposition_discrepancy),
        plane_wave_error: None,
        order: None,
    })
}

/// Repeats the pipeline over the configured values of one axis. A failing
/// point becomes a marked row and the sweep moves on.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path, axis: SweepAxis) -> Result<SweepTable> {
    cfg.validate()?;
    let s = &cfg.sweep;
    let values: Vec<f64> = match axis {
        SweepAxis::M => s.m.iter().map(|&v| v as f64).collect(),
        SweepAxis::Lambda => s.lambda.clone(),
        SweepAxis::NNodes => s.n_nodes.iter().map(|&v| v as f64).collect(),
        SweepAxis::Grid => s.grid.iter().map(|&v| v as f64).collect(),
    };
    if values.is_empty() {
        return Err(Error::Validation(format!("no values configured for sweep axis {}", axis.name())));
    }
    let root = out.join(format!("sweep_{}", axis.name()));
    let mut rows = Vec::with_capacity(values.len());
    for (k, &v) in values.iter().enumerate() {
        let mut c = cfg.clone();
        match axis {
            SweepAxis::M => c.design.m = Some(v as u32),
            SweepAxis::Lambda => c.fitter.lambdas = vec![v],
            SweepAxis::NNodes => c.fitter.n_nodes = v as usize,
            SweepAxis::Grid => {
                c.grid.nx = v as usize;
                c.grid.ny = v as usize;
            }
        }
        let dir = root.join(format!("{k:03}"));
        c.output = dir.clone();
        let mut row = match c.validate().and_then(|_| sweep_point(&c, &dir)) {
            Ok(r) => r,
            Err(e) => SweepRow {
                value: v,
                status: format!("error: {e}"),
                eps_hat: None,
                grad_sup: vec![],
                ratio: None,
                area: None,
                discrepancy: None,
                plane_wave_error: None,
                order: None,
            },
        };
        row.value = v;
        if axis == SweepAxis::Grid {
            row.plane_wave_error = plane_wave_error(v as usize, PLANE_WAVE_DT_RATIO).ok();
            if let (Some(prev), Some(e)) =
                (rows.last().and_then(|r: &SweepRow| r.plane_wave_error), row.plane_wave_error)
            {
                let h_prev = 1.0 / (values[k - 1] - 1.0);
                let h = 1.0 / (v - 1.0);
                row.order = Some((prev / e).ln() / (h_prev / h).ln());
            }
        }
        rows.push(row);
    }
    let table = SweepTable { axis, rows };
    ensure_dir(out)?;
    let path = out.join(format!("sweep_{}.csv", axis.name()));
    std::fs::write(&path, table.to_csv()).map_err(|e| Error::io(&path, e))?;
    write_json(&out.join(format!("sweep_{}.json", axis.name())), &table)?;
    Ok(table)
}
