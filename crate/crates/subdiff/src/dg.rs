//! Piecewise-linear discontinuous Galerkin time stepping on graded meshes.
//!
//! On each interval I_n = (t_{n-1}, t_n] the solution is
//! U(t) = a_n + b_n psi_1(t) with psi_1(t) = (t - t_{n-1})/k_n and spatial
//! coefficient vectors a_n, b_n over interior unknowns. Testing against
//! {1, psi_1} times the dual indicator functions gives, per step, a 2x2
//! block system in (a_n, b_n) whose blocks combine the mass and stiffness
//! operators with kernel moments of the current interval; all earlier
//! intervals enter through the fractional memory term on the right-hand
//! side. The trajectory inside B^alpha starts at the unknown left trace
//! U(0+) = a_1, while the prescribed initial value U^0 enters only through
//! the upwind jump pairing of the first step.

use crate::error::{Error, Result};
use crate::fv::FvOperators;
use crate::kernel::FracKernel;
use crate::linalg::BlockSystem;
use crate::mesh::{DualMesh, PrimalMesh};
use crate::problems::{rhs_time_moments, ManufacturedProblem};

/// Graded partition t_n = (n/N)^gamma T of [0, T].
#[derive(Debug, Clone)]
pub struct TimeMesh {
    nodes: Vec<f64>,
    grading: f64,
}

impl TimeMesh {
    pub fn graded(n: usize, gamma: f64, t_final: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("need at least one interval".into()));
        }
        if gamma < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "grading parameter must be >= 1, got {gamma}"
            )));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        let nodes: Vec<f64> = (0..=n)
            .map(|i| (i as f64 / n as f64).powf(gamma) * t_final)
            .collect();
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "graded nodes are not strictly increasing near t = {}",
                    w[0]
                )));
            }
        }
        Ok(Self {
            nodes,
            grading: gamma,
        })
    }

    pub fn n_intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn final_time(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Interval n (1-based) as (t_{n-1}, t_n).
    pub fn interval(&self, n: usize) -> (f64, f64) {
        (self.nodes[n - 1], self.nodes[n])
    }

    pub fn width(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    pub fn max_width(&self) -> f64 {
        (1..=self.n_intervals())
            .map(|n| self.width(n))
            .fold(0.0, f64::max)
    }

    /// 1-based interval containing t under the half-open convention
    /// (t_{n-1}, t_n].
    pub fn locate(&self, t: f64) -> Result<usize> {
        let t_final = self.final_time();
        if !(t > 0.0) || t > t_final * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!(
                "time {t} outside (0, {t_final}]"
            )));
        }
        let n = self.nodes.partition_point(|&node| node < t);
        Ok(n.min(self.n_intervals()))
    }
}

/// Per-run operation counters.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    /// history terms visited per step; step n touches exactly n-1
    pub history_terms: Vec<usize>,
    /// worst relative residual reported by the block solver
    pub max_solver_residual: f64,
}

impl RunStats {
    pub fn total_history_terms(&self) -> usize {
        self.history_terms.iter().sum()
    }
}

/// The computed trajectory: interval coefficient pairs plus the initial
/// vector. Trace conventions: U^{n-1}_+ = a_n, U^n = a_n + b_n, and
/// evaluation at a node takes the left limit.
#[derive(Debug, Clone)]
pub struct DgSolution {
    pub time_mesh: TimeMesh,
    pub initial: Vec<f64>,
    pub intervals: Vec<(Vec<f64>, Vec<f64>)>,
    pub stats: RunStats,
}

impl DgSolution {
    /// Left-limit trace U^n (n = 0 returns the initial vector).
    pub fn trace(&self, n: usize) -> Vec<f64> {
        if n == 0 {
            return self.initial.clone();
        }
        let (a, b) = &self.intervals[n - 1];
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    /// Jump [U]^n = U^n_+ - U^n at node n (0-based node, n < N).
    pub fn jump(&self, n: usize) -> Vec<f64> {
        let plus = &self.intervals[n].0;
        let minus = self.trace(n);
        plus.iter().zip(&minus).map(|(p, m)| p - m).collect()
    }

    /// Interior coefficient vector at time t (left limit at nodes).
    pub fn coeffs_at(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.time_mesh.locate(t)?;
        let (t0, _) = self.time_mesh.interval(n);
        let theta = ((t - t0) / self.time_mesh.width(n)).min(1.0);
        let (a, b) = &self.intervals[n - 1];
        Ok(a.iter().zip(b).map(|(x, y)| x + y * theta).collect())
    }
}

/// Point evaluation of the trajectory: spatial P1 evaluation of the
/// interval's linear-in-time coefficients, left limit at time nodes.
pub fn eval_solution(sol: &DgSolution, mesh: &PrimalMesh, x: [f64; 2], t: f64) -> Result<f64> {
    let coeffs = sol.coeffs_at(t)?;
    mesh.eval_p1(&coeffs, x)
}

/// Known-history part of the memory term at step n: the coefficient-space
/// combination of all jumps and slopes up to t_{n-1}, mapped through the
/// stiffness operator, tested against {psi_0, psi_1} on I_n.
///
/// The trajectory's initial value inside B^alpha is U(0+) = a_1, so the
/// expansion carries a_1 at source time 0, the genuine jumps at t_1..t_{n-2},
/// the known part -U^{n-1} of the jump at t_{n-1}, and every history slope.
/// Step n visits exactly n-1 history intervals.
pub fn memory_rhs(
    n: usize,
    time_mesh: &TimeMesh,
    history: &[(Vec<f64>, Vec<f64>)],
    prev_trace: &[f64],
    ops: &FvOperators,
    kern: &FracKernel,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nu = ops.mass.n_rows();
    if history.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: history.len(),
        });
    }
    if n == 1 {
        return Ok((vec![0.0; nu], vec![0.0; nu]));
    }
    let test = time_mesh.interval(n);
    let accumulate = |js: std::ops::Range<usize>| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut v0 = vec![0.0; nu];
        let mut v1 = vec![0.0; nu];
        for j in js {
            let source = time_mesh.interval(j);
            let j0 = kern.jump_moment(source.0, test, 0)?;
            let j1 = kern.jump_moment(source.0, test, 1)?;
            let s0 = kern.slope_moment(source, test, 0)?;
            let s1 = kern.slope_moment(source, test, 1)?;
            let (a, b) = &history[j - 1];
            if j == 1 {
                for i in 0..nu {
                    let jc = a[i];
                    v0[i] += j0 * jc + s0 * b[i];
                    v1[i] += j1 * jc + s1 * b[i];
                }
            } else {
                let (a_prev, b_prev) = &history[j - 2];
                for i in 0..nu {
                    let jc = a[i] - a_prev[i] - b_prev[i];
                    v0[i] += j0 * jc + s0 * b[i];
                    v1[i] += j1 * jc + s1 * b[i];
                }
            }
        }
        Ok((v0, v1))
    };

    // fixed chunking with in-order combination: the floating-point grouping
    // is the same with and without rayon, so results are bitwise identical
    // across builds and thread counts
    const CHUNK: usize = 128;
    let (mut v0, mut v1) = if n > 2 * CHUNK {
        let chunks: Vec<(usize, usize)> = (1..n)
            .step_by(CHUNK)
            .map(|lo| (lo, (lo + CHUNK).min(n)))
            .collect();
        let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                chunks.par_iter().map(|&(lo, hi)| accumulate(lo..hi)).collect()
            }
            #[cfg(not(feature = "parallel"))]
            chunks.iter().map(|&(lo, hi)| accumulate(lo..hi)).collect()
        };
        let mut v0 = vec![0.0; nu];
        let mut v1 = vec![0.0; nu];
        for partial in partials {
            let (p0, p1) = partial?;
            for i in 0..nu {
                v0[i] += p0[i];
                v1[i] += p1[i];
            }
        }
        (v0, v1)
    } else {
        accumulate(1..n)?
    };

    // known part of the jump at t_{n-1}: the unknown a_n stays on the left,
    // -U^{n-1} lands here
    let jcur0 = kern.jump_moment(test.0, test, 0)?;
    let jcur1 = kern.jump_moment(test.0, test, 1)?;
    for i in 0..nu {
        v0[i] -= jcur0 * prev_trace[i];
        v1[i] -= jcur1 * prev_trace[i];
    }
    Ok((ops.stiff.spmv(&v0)?, ops.stiff.spmv(&v1)?))
}

/// Full memory vectors of a completed trajectory at test interval n
/// (coefficient space, before the stiffness map): every jump and every slope
/// through interval n itself.
fn memory_vectors_full(
    n: usize,
    time_mesh: &TimeMesh,
    intervals: &[(Vec<f64>, Vec<f64>)],
    kern: &FracKernel,
    nu: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let test = time_mesh.interval(n);
    let mut v0 = vec![0.0; nu];
    let mut v1 = vec![0.0; nu];
    for j in 1..=n {
        let source = time_mesh.interval(j);
        let j0 = kern.jump_moment(source.0, test, 0)?;
        let j1 = kern.jump_moment(source.0, test, 1)?;
        let s0 = kern.slope_moment(source, test, 0)?;
        let s1 = kern.slope_moment(source, test, 1)?;
        let (a, b) = &intervals[j - 1];
        if j == 1 {
            for i in 0..nu {
                v0[i] += j0 * a[i] + s0 * b[i];
                v1[i] += j1 * a[i] + s1 * b[i];
            }
        } else {
            let (a_prev, b_prev) = &intervals[j - 2];
            for i in 0..nu {
                let jc = a[i] - a_prev[i] - b_prev[i];
                v0[i] += j0 * jc + s0 * b[i];
                v1[i] += j1 * jc + s1 * b[i];
            }
        }
    }
    Ok((v0, v1))
}

/// How the initial vector U^0 is produced from u0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialData {
    /// finite volume elliptic projection of u0 (requires its Laplacian)
    #[default]
    EllipticProjection,
    /// nodal interpolant of u0
    NodalInterpolant,
}

/// Spatial discretization plus problem data, reusable across time meshes.
pub struct Solver {
    pub mesh: PrimalMesh,
    pub dual: DualMesh,
    pub ops: FvOperators,
    pub kernel: FracKernel,
    pub problem: ManufacturedProblem,
    pub initial_mode: InitialData,
    /// (coefficient, beta, control-volume load vector) per source term
    loads: Vec<(f64, f64, Vec<f64>)>,
}

impl Solver {
    pub fn on_unit_square(problem: ManufacturedProblem, m: usize) -> Result<Self> {
        let mesh = PrimalMesh::uniform_unit_square(m)?;
        Self::with_mesh(problem, mesh)
    }

    pub fn with_mesh(problem: ManufacturedProblem, mesh: PrimalMesh) -> Result<Self> {
        problem.source.validate()?;
        let dual = DualMesh::build(&mesh)?;
        let ops = FvOperators::assemble(&mesh, &dual)?;
        let kernel = FracKernel::new(problem.alpha)?;
        let loads = problem
            .source
            .terms
            .iter()
            .map(|term| {
                crate::fv::assemble_load(term.spatial.as_ref(), &mesh, &dual, 4)
                    .map(|lv| (term.coeff, term.beta, lv))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mesh,
            dual,
            ops,
            kernel,
            problem,
            initial_mode: InitialData::default(),
            loads,
        })
    }

    pub fn loads(&self) -> &[(f64, f64, Vec<f64>)] {
        &self.loads
    }

    /// U^0 from u0 per the configured mode.
    pub fn initial_vector(&self) -> Result<Vec<f64>> {
        if self.problem.initial_is_zero {
            return Ok(vec![0.0; self.ops.n_unknowns()]);
        }
        match self.initial_mode {
            InitialData::EllipticProjection => {
                let lap = self.problem.initial_laplacian.clone();
                crate::fv::elliptic_projection(
                    &move |x, y| -lap(x, y),
                    &self.ops,
                    &self.mesh,
                    &self.dual,
                    1e-12,
                )
            }
            InitialData::NodalInterpolant => Ok(self
                .mesh
                .interior_nodes
                .iter()
                .map(|&v| (self.problem.initial)(self.mesh.vertices[v][0], self.mesh.vertices[v][1]))
                .collect()),
        }
    }

    /// March the DG scheme over the given time mesh.
    pub fn run(&self, time_mesh: &TimeMesh, tol: f64) -> Result<DgSolution> {
        let u0 = self.initial_vector()?;
        march(
            &self.ops,
            &self.kernel,
            time_mesh,
            &self.loads,
            u0,
            tol,
        )
    }
}

/// Assemble the step-n block system. Exposed for scheme-level tests; `run`
/// drives it across all steps.
pub fn assemble_step<'a>(
    n: usize,
    time_mesh: &TimeMesh,
    ops: &'a FvOperators,
    kern: &FracKernel,
    loads: &[(f64, f64, Vec<f64>)],
    history: &[(Vec<f64>, Vec<f64>)],
    prev_trace: &[f64],
) -> Result<BlockSystem<'a>> {
    let nu = ops.mass.n_rows();
    let test = time_mesh.interval(n);
    let j0 = kern.jump_moment(test.0, test, 0)?;
    let j1 = kern.jump_moment(test.0, test, 1)?;
    let s0 = kern.slope_moment(test, test, 0)?;
    let s1 = kern.slope_moment(test, test, 1)?;
    let (mem0, mem1) = memory_rhs(n, time_mesh, history, prev_trace, ops, kern)?;
    let mut rhs0 = ops.mass.spmv(prev_trace)?;
    let mut rhs1 = vec![0.0; nu];
    for (coeff, beta, lv) in loads {
        let w0 = coeff * rhs_time_moments(*beta, test, 0)?;
        let w1 = coeff * rhs_time_moments(*beta, test, 1)?;
        for i in 0..nu {
            rhs0[i] += w0 * lv[i];
            rhs1[i] += w1 * lv[i];
        }
    }
    for i in 0..nu {
        rhs0[i] -= mem0[i];
        rhs1[i] -= mem1[i];
    }
    Ok(BlockSystem {
        mass: &ops.mass,
        stiff: &ops.stiff,
        mass_coeff: [[1.0, 1.0], [0.0, 0.5]],
        stiff_coeff: [[j0, s0], [j1, s1]],
        rhs: (rhs0, rhs1),
    })
}

fn ceil_err(e: Error, step: usize) -> Error {
    match e {
        Error::SolverFailure {
            detail, residual, ..
        } => Error::SolverFailure {
            step,
            detail,
            residual,
        },
        other => other,
    }
}

/// March the scheme: mesh-agnostic core used for both the PDE and scalar
/// surrogates (1x1 operators).
pub fn march(
    ops: &FvOperators,
    kern: &FracKernel,
    time_mesh: &TimeMesh,
    loads: &[(f64, f64, Vec<f64>)],
    u0: Vec<f64>,
    tol: f64,
) -> Result<DgSolution> {
    let nu = ops.mass.n_rows();
    if u0.len() != nu {
        return Err(Error::DimensionMismatch {
            expected: nu,
            got: u0.len(),
        });
    }
    let n_steps = time_mesh.n_intervals();
    let mut intervals: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(n_steps);
    let mut prev_trace = u0.clone();
    let mut stats = RunStats {
        history_terms: Vec::with_capacity(n_steps),
        max_solver_residual: 0.0,
    };
    // the block coefficients depend on the step only through k_n, so equal
    // widths (uniform meshes) reuse the previous factorization
    let mut cached: Option<(u64, crate::linalg::BlockSolver)> = None;
    for n in 1..=n_steps {
        let sys = assemble_step(n, time_mesh, ops, kern, loads, &intervals, &prev_trace)?;
        let width_key = time_mesh.width(n).to_bits();
        let solver = match &cached {
            Some((key, solver)) if *key == width_key => solver,
            _ => {
                let solver = crate::linalg::BlockSolver::new(
                    &ops.mass,
                    &ops.stiff,
                    sys.mass_coeff,
                    sys.stiff_coeff,
                )?;
                &cached.insert((width_key, solver)).1
            }
        };
        let ((a, b), residual) = solver.solve((&sys.rhs.0, &sys.rhs.1), tol).map_err(|e|ceil_err(e, n))?;
        stats.history_terms.push(n - 1);
        stats.max_solver_residual = stats.max_solver_residual.max(residual);
        prev_trace = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        intervals.push((a, b));
    }
    Ok(DgSolution {
        time_mesh: time_mesh.clone(),
        initial: u0,
        intervals,
        stats,
    })
}

/// Convenience wrapper: build the spatial solver on the unit square and run.
pub fn run(
    problem: ManufacturedProblem,
    m: usize,
    n_steps: usize,
    gamma: f64,
    tol: f64,
) -> Result<(Solver, DgSolution)> {
    let t_final = problem.final_time;
    let solver = Solver::on_unit_square(problem, m)?;
    let tm = TimeMesh::graded(n_steps, gamma, t_final)?;
    let sol = solver.run(&tm, tol)?;
    Ok((solver, sol))
}

/// Residual of the global space-time variational identity for a given test
/// trajectory X (coefficient pairs per interval), relative to the magnitude
/// of both sides. A completed run satisfies this identity up to solver and
/// roundoff error.
pub fn global_identity_residual(
    ops: &FvOperators,
    kern: &FracKernel,
    time_mesh: &TimeMesh,
    loads: &[(f64, f64, Vec<f64>)],
    sol: &DgSolution,
    test: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let nu = ops.mass.n_rows();
    let n_steps = time_mesh.n_intervals();
    assert_eq!(test.len(), n_steps);
    let dot = crate::linalg::dot;
    let mut lhs = 0.0;
    let mut scale = 0.0;
    // <U0_+, X0_+>
    let m_a1 = ops.mass.spmv(&sol.intervals[0].0)?;
    lhs += dot(&m_a1, &test[0].0);
    scale += dot(&m_a1, &test[0].0).abs();
    // sum_j <[U]^j, X^j_+>
    for j in 1..n_steps {
        let jump = sol.jump(j);
        let mj = ops.mass.spmv(&jump)?;
        lhs += dot(&mj, &test[j].0);
        scale += dot(&mj, &test[j].0).abs();
    }
    // sum_n int <U', X>
    for n in 1..=n_steps {
        let (_, b) = &sol.intervals[n - 1];
        let mb = ops.mass.spmv(b)?;
        let (x, y) = &test[n - 1];
        let v = dot(&mb, x) + 0.5 * dot(&mb, y);
        lhs += v;
        scale += v.abs();
    }
    // memory: sum_n int A_h(B^alpha U, X)
    for n in 1..=n_steps {
        let (v0, v1) = memory_vectors_full(n, time_mesh, &sol.intervals, kern, nu)?;
        let s0 = ops.stiff.spmv(&v0)?;
        let s1 = ops.stiff.spmv(&v1)?;
        let (x, y) = &test[n - 1];
        let v = dot(&s0, x) + dot(&s1, y);
        lhs += v;
        scale += v.abs();
    }
    // rhs: <U^0, X^0_+> + sum_n int <f, X>
    let mut rhs = 0.0;
    let mu0 = ops.mass.spmv(&sol.initial)?;
    rhs += dot(&mu0, &test[0].0);
    for n in 1..=n_steps {
        let interval = time_mesh.interval(n);
        let (x, y) = &test[n - 1];
        for (coeff, beta, lv) in loads {
            let w0 = coeff * rhs_time_moments(*beta, interval, 0)?;
            let w1 = coeff * rhs_time_moments(*beta, interval, 1)?;
            rhs += w0 * dot(lv, x) + w1 * dot(lv, y);
        }
    }
    scale += rhs.abs();
    Ok((lhs - rhs).abs() / scale.max(1e-300))
}

/// Quadratic form sum_n int over I_n of A(B^alpha W, W) dt for a trajectory
/// W given by coefficient pairs; nonnegative up to roundoff.
pub fn memory_quadratic_form(
    ops: &FvOperators,
    kern: &FracKernel,
    time_mesh: &TimeMesh,
    w: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let nu = ops.stiff.n_rows();
    let mut total = 0.0;
    for n in 1..=time_mesh.n_intervals() {
        let (v0, v1) = memory_vectors_full(n, time_mesh, w, kern, nu)?;
        let s0 = ops.stiff.spmv(&v0)?;
        let s1 = ops.stiff.spmv(&v1)?;
        let (a, b) = &w[n - 1];
        total += crate::linalg::dot(&s0, a) + crate::linalg::dot(&s1, b);
    }
    Ok(total)
}
