//! Experiment drivers: spatial and temporal convergence ladders, report
//! serialization, and the reference values the check mode compares against.

use crate::dg::{Solver, TimeMesh};
use crate::error::{Error, Result};
use crate::norms::{
    discrete_max_error, rate_table, structured_fine_nodes, ErrorReport, LevelReport,
};
use crate::problems::ManufacturedProblem;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Spatial,
    Temporal,
    Single,
}

/// Full description of an experiment; every CLI flag mirrors one field and
/// overrides the value loaded from a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub alpha: f64,
    /// time-mesh grading; None picks 2/alpha in spatial and single modes
    pub gamma: Option<f64>,
    pub t_final: f64,
    /// spatial subdivision ladder (spatial mode; single mode uses the first)
    pub m_ladder: Vec<usize>,
    /// time-step ladder (temporal mode; single mode uses the first)
    pub n_ladder: Vec<usize>,
    /// grading parameters for the temporal study
    pub gammas: Vec<f64>,
    /// fixed spatial subdivision for the temporal study
    pub spatial_m: usize,
    /// per-interval subsample count of the discrete max norm
    pub subsamples: usize,
    /// coupling ratio r in (0,1): spatial mode picks the smallest N with
    /// (max time step)^(1+alpha) / h^2 <= r
    pub ratio: f64,
    pub out_dir: Option<PathBuf>,
    pub deterministic: bool,
    pub solver_tol: f64,
    /// abort before running anything costlier than this many flops
    pub cost_ceiling: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Single,
            alpha: 0.5,
            gamma: None,
            t_final: 1.0,
            m_ladder: vec![10, 20, 40, 80],
            n_ladder: vec![10, 20, 40],
            gammas: vec![1.0, 2.0, 3.4],
            spatial_m: 128,
            subsamples: 10,
            ratio: 0.5,
            out_dir: None,
            deterministic: true,
            solver_tol: 1e-10,
            cost_ceiling: 5e13,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        let increasing = |v: &[usize]| v.windows(2).all(|w| w[1] > w[0]);
        match self.mode {
            Mode::Spatial => {
                if self.m_ladder.is_empty() || !increasing(&self.m_ladder) {
                    return Err(Error::InvalidParameter(
                        "spatial mode needs a nonempty increasing M ladder".into(),
                    ));
                }
                if !(self.ratio > 0.0 && self.ratio < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "coupling ratio must lie in (0,1), got {}",
                        self.ratio
                    )));
                }
            }
            Mode::Temporal => {
                if self.n_ladder.is_empty() || !increasing(&self.n_ladder) {
                    return Err(Error::InvalidParameter(
                        "temporal mode needs a nonempty increasing N ladder".into(),
                    ));
                }
                if self.gammas.is_empty() {
                    return Err(Error::InvalidParameter("no grading parameters".into()));
                }
            }
            Mode::Single => {
                if self.m_ladder.is_empty() || self.n_ladder.is_empty() {
                    return Err(Error::InvalidParameter(
                        "single mode needs one M and one N".into(),
                    ));
                }
            }
        }
        if self.subsamples < 1 {
            return Err(Error::InvalidParameter("subsamples must be >= 1".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tol must be positive".into()));
        }
        Ok(())
    }

    pub fn spatial_grading(&self) -> f64 {
        self.gamma.unwrap_or(2.0 / self.alpha)
    }
}

/// Smallest N whose graded max step satisfies (max step)^(1+alpha) <= r h^2.
pub fn choose_steps(alpha: f64, gamma: f64, t_final: f64, m: usize, ratio: f64) -> Result<usize> {
    let h2 = 2.0 / (m as f64 * m as f64); // h = sqrt(2)/M
    let target = ratio * h2;
    let max_step = |n: usize| -> f64 {
        t_final * (1.0 - ((n as f64 - 1.0) / n as f64).powf(gamma))
    };
    let ok = |n: usize| max_step(n).powf(1.0 + alpha) <= target;
    let mut hi = 1usize;
    while !ok(hi) {
        hi *= 2;
        if hi > 1 << 26 {
            return Err(Error::ResourceLimit {
                estimate: hi as f64,
                ceiling: (1 << 26) as f64,
                hint: "coupling ratio demands an absurd step count".into(),
            });
        }
    }
    let mut lo = hi / 2; // lo fails (or is 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Rough flop count of one run, for the resource guard.
fn run_cost(m: usize, n_steps: usize, fine_nodes: usize, subsamples: usize) -> f64 {
    let nu = ((m - 1) * (m - 1)) as f64;
    let n = n_steps as f64;
    let memory = 8.0 * n * n * nu;
    let factorizations = 4.0 * n * nu * (m as f64) * (m as f64);
    let evaluation = n * (subsamples as f64 + 1.0) * (nu + 6.0 * fine_nodes as f64);
    memory + factorizations + evaluation
}

fn guard(total: f64, ceiling: f64) -> Result<()> {
    if total > ceiling {
        return Err(Error::ResourceLimit {
            estimate: total,
            ceiling,
            hint: "shrink the ladder, relax the coupling ratio, or raise cost_ceiling".into(),
        });
    }
    Ok(())
}

/// Spatial convergence study: for each M the step count is coupled to h
/// through the ratio, so the time error stays subordinate.
pub fn run_spatial_experiment(cfg: &ExperimentConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let gamma = cfg.spatial_grading();
    let fine_m = 2 * cfg.m_ladder.last().unwrap();
    let fine = structured_fine_nodes(fine_m);
    let plan: Vec<(usize, usize)> = cfg
        .m_ladder
        .iter()
        .map(|&m| choose_steps(cfg.alpha, gamma, cfg.t_final, m, cfg.ratio).map(|n| (m, n)))
        .collect::<Result<_>>()?;
    let total: f64 = plan
        .iter()
        .map(|&(m, n)| run_cost(m, n, fine.len(), cfg.subsamples))
        .sum();
    guard(total, cfg.cost_ceiling)?;
    let mut levels = Vec::new();
    for &(m, n_steps) in &plan {
        let start = Instant::now();
        let mut problem = ManufacturedProblem::sine_power(cfg.alpha)?;
        problem.final_time = cfg.t_final;
        let solver = Solver::on_unit_square(problem.clone(), m)?;
        let tm = TimeMesh::graded(n_steps, gamma, cfg.t_final)?;
        let sol = solver.run(&tm, cfg.solver_tol)?;
        let error = discrete_max_error(&sol, &solver.mesh, &problem, &fine, cfg.subsamples)?;
        levels.push(LevelReport {
            spatial_m: m,
            steps: n_steps,
            grading: gamma,
            error,
            rate: None,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    rate_table(
        format!("spatial convergence, alpha={}", cfg.alpha),
        "M",
        levels,
    )
}

/// Temporal convergence study at fixed spatial resolution, one report per
/// grading parameter.
pub fn run_temporal_experiment(cfg: &ExperimentConfig) -> Result<Vec<(f64, ErrorReport)>> {
    cfg.validate()?;
    let fine = structured_fine_nodes(2 * cfg.spatial_m);
    let total: f64 = cfg
        .gammas
        .iter()
        .flat_map(|_| {
            cfg.n_ladder
                .iter()
                .map(|&n| run_cost(cfg.spatial_m, n, fine.len(), cfg.subsamples))
        })
        .sum();
    guard(total, cfg.cost_ceiling)?;
    let problem = {
        let mut p = ManufacturedProblem::sine_power(cfg.alpha)?;
        p.final_time = cfg.t_final;
        p
    };
    // one spatial assembly for the whole study
    let solver = Solver::on_unit_square(problem.clone(), cfg.spatial_m)?;
    let mut out = Vec::new();
    for &gamma in &cfg.gammas {
        let mut levels = Vec::new();
        for &n_steps in &cfg.n_ladder {
            let start = Instant::now();
            let tm = TimeMesh::graded(n_steps, gamma, cfg.t_final)?;
            let sol = solver.run(&tm, cfg.solver_tol)?;
            let error =
                discrete_max_error(&sol, &solver.mesh, &problem, &fine, cfg.subsamples)?;
            levels.push(LevelReport {
                spatial_m: cfg.spatial_m,
                steps: n_steps,
                grading: gamma,
                error,
                rate: None,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        out.push((
            gamma,
            rate_table(
                format!("temporal convergence, alpha={}, gamma={gamma}", cfg.alpha),
                "N",
                levels,
            )?,
        ));
    }
    Ok(out)
}

/// Result of a single run.
#[derive(Debug, Clone, Serialize)]
pub struct SingleRun {
    pub m: usize,
    pub n: usize,
    pub gamma: f64,
    pub max_error: f64,
    pub l2_error_final: f64,
    pub seconds: f64,
}

pub fn run_single(cfg: &ExperimentConfig) -> Result<SingleRun> {
    cfg.validate()?;
    let m = cfg.m_ladder[0];
    let n = cfg.n_ladder[0];
    let gamma = cfg.spatial_grading();
    let fine = structured_fine_nodes(2 * m);
    guard(run_cost(m, n, fine.len(), cfg.subsamples), cfg.cost_ceiling)?;
    let start = Instant::now();
    let mut problem = ManufacturedProblem::sine_power(cfg.alpha)?;
    problem.final_time = cfg.t_final;
    let solver = Solver::on_unit_square(problem.clone(), m)?;
    let tm = TimeMesh::graded(n, gamma, cfg.t_final)?;
    let sol = solver.run(&tm, cfg.solver_tol)?;
    let max_error = discrete_max_error(&sol, &solver.mesh, &problem, &fine, cfg.subsamples)?;
    let l2_error_final =
        crate::norms::l2_error_at(&sol, &solver.mesh, &problem, cfg.t_final)?;
    Ok(SingleRun {
        m,
        n,
        gamma,
        max_error,
        l2_error_final,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn fmt_rate(rate: Option<f64>) -> String {
    rate.map(|r| format!("{r:.4}")).unwrap_or_default()
}

/// CSV rendering: `X,error,rate` with deterministic formatting.
pub fn render_csv(report: &ErrorReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("{},error,rate\n", report.x_name));
    for level in &report.levels {
        let x = if report.x_name == "N" {
            level.steps
        } else {
            level.spatial_m
        };
        out.push_str(&format!(
            "{x},{:.6e},{}\n",
            level.error,
            fmt_rate(level.rate)
        ));
    }
    out
}

/// Markdown rendering for humans.
pub fn render_markdown(report: &ErrorReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("### {}\n\n", report.label));
    out.push_str(&format!("| {} | N | error | rate | seconds |\n", report.x_name));
    out.push_str("|---|---|---|---|---|\n");
    for level in &report.levels {
        let x = if report.x_name == "N" {
            level.steps
        } else {
            level.spatial_m
        };
        out.push_str(&format!(
            "| {x} | {} | {:.4e} | {} | {:.2} |\n",
            level.steps,
            level.error,
            fmt_rate(level.rate),
            level.seconds
        ));
    }
    out
}

/// Plot data: whitespace-separated x y pairs on a log-log-friendly scale
/// (x is h for spatial ladders, the max time step for temporal ones).
pub fn render_plotdat(report: &ErrorReport) -> String {
    let mut out = String::new();
    for level in &report.levels {
        let x = if report.x_name == "N" {
            TimeMesh::graded(level.steps, level.grading, 1.0)
                .map(|tm| tm.max_width())
                .unwrap_or(1.0 / level.steps as f64)
        } else {
            std::f64::consts::SQRT_2 / level.spatial_m as f64
        };
        out.push_str(&format!("{x:.9e} {:.9e}\n", level.error));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write csv/markdown/plotdat renderings of each named report plus a JSON
/// metadata sidecar describing the configuration that produced them.
/// Returns the created paths.
pub fn emit_reports(
    reports: &[(String, ErrorReport)],
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("no reports to emit".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, report) in reports {
        for (ext, contents) in [
            ("csv", render_csv(report)),
            ("md", render_markdown(report)),
            ("plotdat", render_plotdat(report)),
        ] {
            let path = out_dir.join(format!("{name}.{ext}"));
            write_file(&path, &contents)?;
            written.push(path);
        }
    }
    let meta = serde_json::json!({
        "config": cfg,
        "reports": reports.iter().map(|(n, _)| n).collect::<Vec<_>>(),
    });
    let meta_path = out_dir.join("metadata.json");
    write_file(&meta_path, &serde_json::to_string_pretty(&meta).unwrap())?;
    written.push(meta_path);
    Ok(written)
}

/// Published reference values for the benchmark problem
/// u = t^alpha sin(pi x) sin(pi y): discrete max errors of the spatial
/// ladder at alpha = 0.4 and 0.75, and of the temporal ladders at
/// alpha = 0.6. Check mode compares fresh runs against these.
pub mod reference {
    pub const SPATIAL_M: [usize; 6] = [10, 20, 40, 80, 120, 160];
    pub const SPATIAL_ALPHA: [f64; 2] = [0.4, 0.75];
    pub const SPATIAL_ERRORS: [[f64; 6]; 2] = [
        [3.6522e-2, 9.6096e-3, 2.4235e-3, 5.8239e-4, 2.4903e-4, 1.3923e-4],
        [3.1396e-2, 8.2601e-3, 2.0831e-3, 5.0059e-4, 2.3145e-4, 1.2713e-4],
    ];

    pub const TEMPORAL_ALPHA: f64 = 0.6;
    pub const TEMPORAL_N: [usize; 5] = [10, 20, 40, 60, 80];
    pub const TEMPORAL_GAMMAS: [f64; 3] = [1.0, 2.0, 3.4];
    /// gamma = 3.4 has no published N = 80 entry
    pub const TEMPORAL_ERRORS: [[f64; 5]; 3] = [
        [1.0313e-2, 7.2124e-3, 5.0788e-3, 4.1411e-3, 3.5604e-3],
        [3.2357e-3, 1.5719e-3, 7.3189e-4, 4.6047e-4, 3.2953e-4],
        [2.0414e-3, 6.2591e-4, 1.7878e-4, 8.4038e-5, f64::NAN],
    ];
}

/// Violations of the spatial acceptance thresholds: each error within a
/// factor 2 of the reference and each observed rate within 0.15.
pub fn check_spatial(report: &ErrorReport, alpha: f64) -> Vec<String> {
    let mut violations = Vec::new();
    let Some(col) = reference::SPATIAL_ALPHA.iter().position(|&a| a == alpha) else {
        return vec![format!("no reference column for alpha={alpha}")];
    };
    let ref_levels: Vec<(usize, f64)> = reference::SPATIAL_M
        .iter()
        .copied()
        .zip(reference::SPATIAL_ERRORS[col])
        .collect();
    let ref_xs: Vec<f64> = report
        .levels
        .iter()
        .map(|l| l.spatial_m as f64)
        .collect();
    let ref_errors: Vec<f64> = report
        .levels
        .iter()
        .map(|l| {
            ref_levels
                .iter()
                .find(|(m, _)| *m == l.spatial_m)
                .map(|(_, e)| *e)
                .unwrap_or(f64::NAN)
        })
        .collect();
    let ref_rates = crate::norms::compute_rates(&ref_xs, &ref_errors);
    for (i, level) in report.levels.iter().enumerate() {
        if ref_errors[i].is_nan() {
            violations.push(format!("M={} has no reference value", level.spatial_m));
            continue;
        }
        let ratio = level.error / ref_errors[i];
        if !(0.5..=2.0).contains(&ratio) {
            violations.push(format!(
                "M={}: error {:.4e} vs reference {:.4e} (ratio {ratio:.2} outside [0.5, 2])",
                level.spatial_m, level.error, ref_errors[i]
            ));
        }
        if let (Some(got), Some(want)) = (level.rate, ref_rates[i]) {
            if (got - want).abs() > 0.15 {
                violations.push(format!(
                    "M={}: rate {got:.4} vs reference {want:.4} (off by more than 0.15)",
                    level.spatial_m
                ));
            }
        }
    }
    violations
}

/// Violations of the temporal acceptance thresholds: rates within 0.2 and
/// errors within a factor 3 of the reference columns.
pub fn check_temporal(reports: &[(f64, ErrorReport)]) -> Vec<String> {
    let mut violations = Vec::new();
    for (gamma, report) in reports {
        let Some(row) = reference::TEMPORAL_GAMMAS
            .iter()
            .position(|g| g == gamma)
        else {
            violations.push(format!("no reference column for gamma={gamma}"));
            continue;
        };
        let ref_errors_all: Vec<(usize, f64)> = reference::TEMPORAL_N
            .iter()
            .copied()
            .zip(reference::TEMPORAL_ERRORS[row])
            .collect();
        let xs: Vec<f64> = report.levels.iter().map(|l| l.steps as f64).collect();
        let ref_errors: Vec<f64> = report
            .levels
            .iter()
            .map(|l| {
                ref_errors_all
                    .iter()
                    .find(|(n, _)| *n == l.steps)
                    .map(|(_, e)| *e)
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let ref_rates = crate::norms::compute_rates(&xs, &ref_errors);
        for (i, level) in report.levels.iter().enumerate() {
            if ref_errors[i].is_nan() {
                violations.push(format!(
                    "gamma={gamma}, N={}: no reference value",
                    level.steps
                ));
                continue;
            }
            let ratio = level.error / ref_errors[i];
            if !(1.0 / 3.0..=3.0).contains(&ratio) {
                violations.push(format!(
                    "gamma={gamma}, N={}: error {:.4e} vs reference {:.4e} (ratio {ratio:.2} outside [1/3, 3])",
                    level.steps, level.error, ref_errors[i]
                ));
            }
            if let (Some(got), Some(want)) = (level.rate, ref_rates[i]) {
                if (got - want).abs() > 0.2 {
                    violations.push(format!(
                        "gamma={gamma}, N={}: rate {got:.4} vs reference {want:.4} (off by more than 0.2)",
                        level.steps
                    ));
                }
            }
        }
    }
    violations
}
