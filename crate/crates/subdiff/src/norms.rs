//! Discrete error norms and convergence-rate tables.

use crate::dg::DgSolution;
use crate::error::{Error, Result};
use crate::mesh::PrimalMesh;
use crate::problems::ManufacturedProblem;

/// One refinement level of an experiment.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub spatial_m: usize,
    pub steps: usize,
    pub grading: f64,
    pub error: f64,
    /// observed rate against the previous level (None on the first level or
    /// when a rate is undefined because an error vanished)
    pub rate: Option<f64>,
    pub seconds: f64,
}

/// A completed refinement ladder with the varied quantity named.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub label: String,
    /// column header of the varied parameter ("M" or "N")
    pub x_name: &'static str,
    pub levels: Vec<LevelReport>,
}

/// rate_i = log(e_{i-1}/e_i) / log(x_i/x_{i-1}) with the actual refinement
/// ratios; non-positive errors give an undefined-rate marker.
pub fn compute_rates(xs: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    let mut rates = vec![None; errors.len()];
    for i in 1..errors.len() {
        if errors[i - 1] > 0.0 && errors[i] > 0.0 && xs[i] != xs[i - 1] {
            rates[i] = Some((errors[i - 1] / errors[i]).ln() / (xs[i] / xs[i - 1]).ln());
        }
    }
    rates
}

/// Assemble a report from per-level data, filling the observed rates from
/// the varied parameter values.
pub fn rate_table(
    label: impl Into<String>,
    x_name: &'static str,
    mut levels: Vec<LevelReport>,
) -> Result<ErrorReport> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("empty refinement ladder".into()));
    }
    let xs: Vec<f64> = levels
        .iter()
        .map(|l| if x_name == "N" { l.steps as f64 } else { l.spatial_m as f64 })
        .collect();
    let errors: Vec<f64> = levels.iter().map(|l| l.error).collect();
    for (level, rate) in levels.iter_mut().zip(compute_rates(&xs, &errors)) {
        level.rate = rate;
    }
    Ok(ErrorReport {
        label: label.into(),
        x_name,
        levels,
    })
}

/// Nodes of the uniform unit-square lattice with subdivision count m
/// (the default fine sampling set: the M-doubled structured mesh).
pub fn structured_fine_nodes(m: usize) -> Vec<[f64; 2]> {
    let mut nodes = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            nodes.push([i as f64 / m as f64, j as f64 / m as f64]);
        }
    }
    nodes
}

/// Precomputed P1 evaluation weights for a fixed point set: each point keeps
/// its containing triangle's interior unknown indices and barycentric
/// weights, so a field evaluation is three fused multiplies.
pub struct P1Sampler {
    /// (unknown index or sentinel, weight) triples per point
    entries: Vec<[(usize, f64); 3]>,
    n_unknowns: usize,
}

const NO_UNKNOWN: usize = usize::MAX;

impl P1Sampler {
    pub fn new(mesh: &PrimalMesh, points: &[[f64; 2]]) -> Result<Self> {
        let mut entries = Vec::with_capacity(points.len());
        for &p in points {
            let t = mesh.locate(p)?;
            let bary = mesh.barycentric(t, p);
            let mut entry = [(NO_UNKNOWN, 0.0); 3];
            for k in 0..3 {
                let v = mesh.triangles[t][k];
                entry[k] = (
                    mesh.interior_index[v].unwrap_or(NO_UNKNOWN),
                    bary[k],
                );
            }
            entries.push(entry);
        }
        Ok(Self {
            entries,
            n_unknowns: mesh.n_interior(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn eval(&self, idx: usize, coeffs: &[f64]) -> f64 {
        debug_assert_eq!(coeffs.len(), self.n_unknowns);
        let mut val = 0.0;
        for (u, w) in self.entries[idx] {
            if u != NO_UNKNOWN {
                val += w * coeffs[u];
            }
        }
        val
    }
}

/// Discrete space-time maximum error over the fine node set and the
/// subsampled time grid {t_{j-1} + (q/m) k_j}: t = 0 is excluded and node
/// values take the left limit, so sampling interval j at the offsets q/m,
/// q = 1..m, covers the grid exactly once.
pub fn discrete_max_error(
    sol: &DgSolution,
    mesh: &PrimalMesh,
    problem: &ManufacturedProblem,
    fine_nodes: &[[f64; 2]],
    m_sub: usize,
) -> Result<f64> {
    if m_sub < 1 {
        return Err(Error::InvalidParameter("need at least one subsample".into()));
    }
    let sampler = P1Sampler::new(mesh, fine_nodes)?;
    let spatial_exact: Option<Vec<f64>> = problem
        .exact_factored
        .as_ref()
        .map(|(_, g)| fine_nodes.iter().map(|p| g(p[0], p[1])).collect());
    let n_steps = sol.time_mesh.n_intervals();

    let sample_max = |j: usize, q: usize| -> f64 {
        let (t0, t1) = sol.time_mesh.interval(j);
        let theta = q as f64 / m_sub as f64;
        let t = t0 + theta * (t1 - t0);
        let (a, b) = &sol.intervals[j - 1];
        let coeffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + theta * y).collect();
        let mut worst = 0.0f64;
        match (&spatial_exact, &problem.exact_factored) {
            (Some(g), Some((tau, _))) => {
                let tv = tau(t);
                for (idx, gi) in g.iter().enumerate() {
                    let diff = (sampler.eval(idx, &coeffs) - tv * gi).abs();
                    worst = worst.max(diff);
                }
            }
            _ => {
                for (idx, p) in fine_nodes.iter().enumerate() {
                    let diff = (sampler.eval(idx, &coeffs) - (problem.exact)(p[0], p[1], t)).abs();
                    worst = worst.max(diff);
                }
            }
        }
        worst
    };

    let samples: Vec<(usize, usize)> = (1..=n_steps)
        .flat_map(|j| (1..=m_sub).map(move |q| (j, q)))
        .collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        return Ok(samples
            .par_iter()
            .map(|&(j, q)| sample_max(j, q))
            .reduce(|| 0.0, f64::max));
    }
    #[cfg(not(feature = "parallel"))]
    Ok(samples
        .iter()
        .map(|&(j, q)| sample_max(j, q))
        .fold(0.0, f64::max))
}

/// || U(., t) - u(., t) ||_{L2} by a degree-4 rule per triangle.
pub fn l2_error_at(
    sol: &DgSolution,
    mesh: &PrimalMesh,
    problem: &ManufacturedProblem,
    t: f64,
) -> Result<f64> {
    let coeffs = sol.coeffs_at(t)?;
    let exact = problem.exact.clone();
    crate::fem::l2_error_against(mesh, &coeffs, &move |x, y| exact(x, y, t), 4)
}
