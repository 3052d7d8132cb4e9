//! Experiment runner for the fractional subdiffusion solver.
//!
//! Subcommands: `solve` (single run), `table1` (spatial convergence with
//! coupled step counts), `table2` (temporal convergence on graded meshes),
//! `verify` (built-in property suite). Exit codes: 0 success, 2 acceptance
//! threshold violated in a `--check` run, 1 any other error.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use subdiff::experiment::{
    check_spatial, check_temporal, emit_reports, run_single, run_spatial_experiment,
    run_temporal_experiment, ExperimentConfig, Mode,
};

#[derive(Parser)]
#[command(name = "subdiff", version, about = "Finite volume / DG solver for 2D fractional subdiffusion")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem instance and report its errors
    Solve(CommonArgs),
    /// Spatial convergence ladder (step counts coupled to the mesh ratio)
    Table1(CommonArgs),
    /// Temporal convergence ladders over the grading parameters
    Table2(CommonArgs),
    /// Run the built-in property suite
    Verify,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// fractional order(s); table1 accepts a comma list
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// time-mesh grading parameter(s); table2 accepts a comma list
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// spatial subdivision(s): ladder for table1, fixed value otherwise
    #[arg(long = "M", value_delimiter = ',')]
    big_m: Option<Vec<usize>>,
    /// time step count(s): ladder for table2, fixed value for solve
    #[arg(long = "N", value_delimiter = ',')]
    big_n: Option<Vec<usize>>,
    /// per-interval subsamples of the discrete max norm
    #[arg(long = "m")]
    subsamples: Option<usize>,
    /// coupling ratio r in (0,1) for table1
    #[arg(long)]
    ratio: Option<f64>,
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// directory for csv/md/plotdat/metadata outputs
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// pin the deterministic reduction mode (runs are bit-reproducible)
    #[arg(long)]
    deterministic: bool,
    /// relative residual tolerance of the per-step solver
    #[arg(long)]
    tol: Option<f64>,
    /// compare against the published reference values; exit 2 on violation
    #[arg(long)]
    check: bool,
}

impl CommonArgs {
    fn into_config(self, mode: Mode) -> Result<ExperimentConfig, subdiff::Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| subdiff::Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        cfg.mode = mode;
        if let Some(alphas) = &self.alpha {
            if let Some(&first) = alphas.first() {
                cfg.alpha = first;
            }
        }
        if let Some(gammas) = &self.gamma {
            match mode {
                Mode::Temporal => cfg.gammas = gammas.clone(),
                _ => cfg.gamma = gammas.first().copied(),
            }
        }
        if let Some(ms) = &self.big_m {
            match mode {
                Mode::Temporal => cfg.spatial_m = ms[0],
                _ => cfg.m_ladder = ms.clone(),
            }
        }
        if let Some(ns) = &self.big_n {
            cfg.n_ladder = ns.clone();
        }
        if let Some(m) = self.subsamples {
            cfg.subsamples = m;
        }
        if let Some(r) = self.ratio {
            cfg.ratio = r;
        }
        if let Some(t) = self.tol {
            cfg.solver_tol = t;
        }
        if self.deterministic {
            cfg.deterministic = true;
        }
        if let Some(dir) = &self.out_dir {
            cfg.out_dir = Some(dir.clone());
        }
        Ok(cfg)
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32, subdiff::Error> {
    match cli.cmd {
        Command::Solve(args) => cmd_solve(args),
        Command::Table1(args) => cmd_table1(args),
        Command::Table2(args) => cmd_table2(args),
        Command::Verify => Ok(verify::run()),
    }
}

fn cmd_solve(args: CommonArgs) -> Result<i32, subdiff::Error> {
    let cfg = args.into_config(Mode::Single)?;
    let run = run_single(&cfg)?;
    println!(
        "M={} N={} gamma={:.4} max_error={:.6e} l2_error(T)={:.6e} seconds={:.2}",
        run.m, run.n, run.gamma, run.max_error, run.l2_error_final, run.seconds
    );
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| subdiff::Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let path = dir.join("solve.json");
        let text = serde_json::to_string_pretty(&run).expect("serializable");
        std::fs::write(&path, text).map_err(|source| subdiff::Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn cmd_table1(args: CommonArgs) -> Result<i32, subdiff::Error> {
    let alphas = args.alpha.clone().unwrap_or_else(|| vec![0.4, 0.75]);
    let check = args.check;
    let base = args.into_config(Mode::Spatial)?;
    let mut reports = Vec::new();
    let mut violations = Vec::new();
    for &alpha in &alphas {
        let cfg = ExperimentConfig {
            alpha,
            gamma: base.gamma,
            ..base.clone()
        };
        eprintln!(
            "table1: alpha={alpha}, M ladder {:?}, ratio {}, grading {}",
            cfg.m_ladder,
            cfg.ratio,
            cfg.spatial_grading()
        );
        let report = run_spatial_experiment(&cfg)?;
        print!("{}", subdiff::experiment::render_markdown(&report));
        if check {
            violations.extend(
                check_spatial(&report, alpha)
                    .into_iter()
                    .map(|v| format!("alpha={alpha}: {v}")),
            );
        }
        reports.push((format!("table1_alpha{alpha}"), report));
    }
    if let Some(dir) = &base.out_dir {
        let written = emit_reports(&reports, &base, dir)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    finish_check(check, violations)
}

fn cmd_table2(args: CommonArgs) -> Result<i32, subdiff::Error> {
    let check = args.check;
    let alpha_given = args.alpha.is_some();
    let mut cfg = args.into_config(Mode::Temporal)?;
    if !alpha_given {
        cfg.alpha = 0.6;
    }
    eprintln!(
        "table2: alpha={}, M={}, N ladder {:?}, gammas {:?}",
        cfg.alpha, cfg.spatial_m, cfg.n_ladder, cfg.gammas
    );
    let by_gamma = run_temporal_experiment(&cfg)?;
    let mut reports = Vec::new();
    for (gamma, report) in &by_gamma {
        print!("{}", subdiff::experiment::render_markdown(report));
        reports.push((format!("table2_gamma{gamma}"), report.clone()));
    }
    let violations = if check { check_temporal(&by_gamma) } else { Vec::new() };
    if let Some(dir) = &cfg.out_dir {
        let written = emit_reports(&reports, &cfg, dir)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    finish_check(check, violations)
}

fn finish_check(check: bool, violations: Vec<String>) -> Result<i32, subdiff::Error> {
    if !check {
        return Ok(0);
    }
    if violations.is_empty() {
        println!("check: all values within the acceptance thresholds");
        Ok(0)
    } else {
        for v in &violations {
            eprintln!("check violation: {v}");
        }
        Ok(2)
    }
}

mod verify {
    //! Self-contained property suite: every check prints one PASS/FAIL line.

    use subdiff::dg::{self, TimeMesh};
    use subdiff::fem;
    use subdiff::fv;
    use subdiff::kernel::FracKernel;
    use subdiff::linalg;
    use subdiff::mesh::{DualMesh, PrimalMesh};
    use subdiff::problems::ManufacturedProblem;

    /// splitmix64: deterministic probe values without an RNG dependency
    struct Probe(u64);

    impl Probe {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }

        fn vector(&mut self, n: usize) -> Vec<f64> {
            (0..n).map(|_| self.next_f64()).collect()
        }
    }

    pub fn run() -> i32 {
        let mut failures = 0;
        let mut check = |name: &str, result: Result<bool, subdiff::Error>| {
            match result {
                Ok(true) => println!("PASS {name}"),
                Ok(false) => {
                    println!("FAIL {name}");
                    failures += 1;
                }
                Err(e) => {
                    println!("FAIL {name}: {e}");
                    failures += 1;
                }
            }
        };

        check("dual mesh partitions the domain (M=8)", dual_partition());
        check("stiffness equals the conforming P1 operator (M=4,8,16)", stiffness_identity());
        check("fv mass is symmetric positive definite (M=8,16)", mass_spd());
        check("dual interpolant is L2-stable with constant <= 2", interpolant_stability());
        check("kernel self-moments satisfy the difference identity", kernel_identities());
        check("fractional quadratic form is nonnegative", positivity());
        check("graded meshes satisfy the width inequalities", graded_inequalities());
        check("zero data yields the zero trajectory", zero_run());
        check("repeated runs are bitwise identical", determinism());
        check("global space-time identity holds on a completed run", global_identity());

        if failures == 0 {
            println!("verify: all checks passed");
            0
        } else {
            println!("verify: {failures} check(s) failed");
            1
        }
    }

    fn dual_partition() -> Result<bool, subdiff::Error> {
        let mesh = PrimalMesh::uniform_unit_square(8)?;
        let dual = DualMesh::build(&mesh)?;
        let mut ok = (dual.total_area() - 1.0).abs() < 1e-12;
        for (u, &v) in mesh.interior_nodes.iter().enumerate() {
            let incident: f64 = (0..mesh.triangles.len())
                .filter(|&t| mesh.triangles[t].contains(&v))
                .map(|t| mesh.triangle_area(t))
                .sum();
            ok &= (dual.cv_area[u] - incident / 3.0).abs() < 1e-12;
        }
        Ok(ok)
    }

    fn stiffness_identity() -> Result<bool, subdiff::Error> {
        for m in [4, 8, 16] {
            let mesh = PrimalMesh::uniform_unit_square(m)?;
            let dual = DualMesh::build(&mesh)?;
            let s_fv = fv::assemble_stiffness(&mesh, &dual)?;
            let s_fem = fem::stiffness_matrix(&mesh)?;
            for i in 0..mesh.n_interior() {
                let (cols, vals) = s_fem.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    if (s_fv.get(i, j) - v).abs() > 1e-12 {
                        return Ok(false);
                    }
                }
                let (cols_fv, vals_fv) = s_fv.row(i);
                for (&j, &v) in cols_fv.iter().zip(vals_fv) {
                    if (s_fem.get(i, j) - v).abs() > 1e-12 {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    fn mass_spd() -> Result<bool, subdiff::Error> {
        for m in [8, 16] {
            let mesh = PrimalMesh::uniform_unit_square(m)?;
            let dual = DualMesh::build(&mesh)?;
            let mass = fv::assemble_fv_mass(&mesh, &dual)?;
            if mass.max_abs_asymmetry() > 1e-14 {
                return Ok(false);
            }
            if linalg::banded_cholesky_check(&mass).is_err() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn interpolant_stability() -> Result<bool, subdiff::Error> {
        let mut probe = Probe(7);
        for m in [8, 16] {
            let mesh = PrimalMesh::uniform_unit_square(m)?;
            let dual = DualMesh::build(&mesh)?;
            let fem_mass = fem::mass_matrix(&mesh)?;
            let mut worst: f64 = 0.0;
            for _ in 0..50 {
                let chi = probe.vector(mesh.n_interior());
                let l2 = linalg::dot(&chi, &fem_mass.spmv(&chi)?).sqrt();
                let dual_l2 = fem::dual_interpolant_l2_norm(&dual, &chi);
                worst = worst.max(dual_l2 / l2);
            }
            if worst > 2.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn kernel_identities() -> Result<bool, subdiff::Error> {
        for alpha in [0.2, 0.5, 0.8] {
            let kern = FracKernel::new(alpha)?;
            for kn in [0.02, 0.5, 1.3] {
                let j0 = kern.jump_moment(0.0, (0.0, kn), 0)?;
                let j1 = kern.jump_moment(0.0, (0.0, kn), 1)?;
                let s0 = kern.slope_moment((0.0, kn), (0.0, kn), 0)?;
                if (s0 - (j0 - j1)).abs() > 1e-13 * j0.max(1.0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn positivity() -> Result<bool, subdiff::Error> {
        let mut probe = Probe(42);
        let ops = fv::FvOperators {
            stiff: linalg::CsrMatrix::identity(1),
            mass: linalg::CsrMatrix::identity(1),
        };
        for alpha in [0.3, 0.6, 0.9] {
            let kern = FracKernel::new(alpha)?;
            for _ in 0..20 {
                let n = 6;
                let gamma = 1.0 + 2.5 * (probe.next_f64() + 1.0) / 2.0;
                let tm = TimeMesh::graded(n, gamma, 1.0)?;
                let w: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                    .map(|_| (vec![probe.next_f64()], vec![probe.next_f64()]))
                    .collect();
                let form = dg::memory_quadratic_form(&ops, &kern, &tm, &w)?;
                if form < -1e-12 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn graded_inequalities() -> Result<bool, subdiff::Error> {
        for gamma in [1.0, 2.0, 3.4] {
            let tm = TimeMesh::graded(40, gamma, 1.0)?;
            let k = tm.max_width();
            for n in 2..=40 {
                let tn = tm.nodes()[n];
                if tm.width(n) > gamma * k * tn.powf(1.0 - 1.0 / gamma) * (1.0 + 1e-12) {
                    return Ok(false);
                }
                if tn > 2f64.powf(gamma) * tm.nodes()[n - 1] * (1.0 + 1e-12) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn zero_run() -> Result<bool, subdiff::Error> {
        let problem = ManufacturedProblem::zero(0.5)?;
        let (_, sol) = dg::run(problem, 4, 5, 2.0, 1e-10)?;
        Ok(sol
            .intervals
            .iter()
            .all(|(a, b)| a.iter().all(|&v| v == 0.0) && b.iter().all(|&v| v == 0.0)))
    }

    fn determinism() -> Result<bool, subdiff::Error> {
        let p = ManufacturedProblem::sine_power(0.6)?;
        let (_, s1) = dg::run(p.clone(), 4, 6, 2.0, 1e-10)?;
        let (_, s2) = dg::run(p, 4, 6, 2.0, 1e-10)?;
        Ok(s1
            .intervals
            .iter()
            .zip(&s2.intervals)
            .all(|(a, b)| a.0 == b.0 && a.1 == b.1))
    }

    fn global_identity() -> Result<bool, subdiff::Error> {
        let mut probe = Probe(11);
        let problem = ManufacturedProblem::sine_power(0.4)?;
        let solver = dg::Solver::on_unit_square(problem, 4)?;
        let tm = TimeMesh::graded(6, 2.0, 1.0)?;
        let sol = solver.run(&tm, 1e-12)?;
        let nu = solver.ops.n_unknowns();
        let test: Vec<(Vec<f64>, Vec<f64>)> = (0..6)
            .map(|_| (probe.vector(nu), probe.vector(nu)))
            .collect();
        let residual = dg::global_identity_residual(
            &solver.ops,
            &solver.kernel,
            &tm,
            solver.loads(),
            &sol,
            &test,
        )?;
        Ok(residual <= 1e-8)
    }
}
