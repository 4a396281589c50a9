//! From transforms back to measures: Herglotz validation, moment recovery
//! from the large-`|z|` expansion, Stieltjes–Perron inversion, and exact
//! recovery of the unique solution when the defect numbers vanish.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l2space::DiscreteMatrixMeasure;
use crate::linalg::{self, CMat, CVec};
use crate::model::MomentModel;
use crate::nevanlinna::NevanlinnaValue;

pub const HERGLOTZ_TOL: f64 = 1e-8;
pub const DEFAULT_EPS: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
pub const DEFAULT_N_QUAD: usize = 2001;
pub const MIN_EPS: f64 = 1e-4;
pub const REFINEMENT_TOL: f64 = 1e-3;
pub const MAX_FIT_COND: f64 = 1e12;
/// Relative eigenvalue gap below which nodes are merged.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzReport {
    pub min_eigenvalue: f64,
    pub worst_z: [f64; 2],
    pub points: usize,
    pub pass: bool,
}

/// Smallest eigenvalue of `Im R(z)` over the sample; passes iff `≥ -1e-8`.
pub fn herglotz_check(values: &[NevanlinnaValue]) -> HerglotzReport {
    let mut min_eigenvalue = f64::INFINITY;
    let mut worst = Complex64::new(0.0, 0.0);
    for v in values {
        let e = v.min_im_eigenvalue();
        if e < min_eigenvalue {
            min_eigenvalue = e;
            worst = v.z;
        }
    }
    HerglotzReport {
        min_eigenvalue,
        worst_z: [worst.re, worst.im],
        points: values.len(),
        pass: values.iter().all(|v| v.z.im > 0.0) && min_eigenvalue >= -HERGLOTZ_TOL,
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    /// Estimates of `S_0, ..., S_{k_max}`.
    pub moments: Vec<CMat>,
    /// Largest entrywise misfit of `y R(iy)` over the grid.
    pub residual: f64,
    pub condition: f64,
}

/// Thirteen log-spaced points from `10²` to `10⁵`.
pub fn default_y_grid() -> Vec<f64> {
    (0..13).map(|j| 10f64.powf(2.0 + 0.25 * j as f64)).collect()
}

/// Least-squares fit of `R(iy) ≈ -Σ_{k ≤ k_max} S_k (iy)^{-k-1}`.
///
/// The Hermitian parts `y·Re R(iy)` and `y·Im R(iy)` carry only the odd and
/// only the even moments respectively, so each is fitted against its own
/// real columns. Column `k` is scaled by `(y_min/y)^k` to keep entries of
/// order one.
pub fn asymptotic_moments<F>(evaluator: F, k_max: usize, y_grid: &[f64]) -> Result<AsymptoticFit>
where
    F: Fn(Complex64) -> Result<CMat> + Sync,
{
    if k_max > 4 {
        return Err(Error::Input(format!("k_max = {k_max} exceeds 4")));
    }
    if y_grid.len() < k_max + 1 {
        return Err(Error::Input("y grid shorter than the number of unknowns".into()));
    }
    if y_grid.iter().any(|&y| !(1e2 * (1.0 - 1e-12)..=1e5 * (1.0 + 1e-12)).contains(&y)) {
        return Err(Error::Input("y grid must lie in [1e2, 1e5]".into()));
    }
    let y_min = y_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let n_y = y_grid.len();
    let rows = 2 * n_y;
    let cols = k_max + 1;
    // Row r < n_y: y·Im R = Σ_{k even} (-1)^{k/2} S_k y^{-k}.
    // Row n_y + r:  y·Re R = Σ_{k odd} (-1)^{(k-1)/2} S_k y^{-k}.
    let design = CMat::from_fn(rows, cols, |r, k| {
        let (even_row, y) = if r < n_y { (true, y_grid[r]) } else { (false, y_grid[r - n_y]) };
        if even_row != (k % 2 == 0) {
            return Complex64::new(0.0, 0.0);
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * (y_min / y).powi(k as i32), 0.0)
    });
    let condition = linalg::condition_number(&design);
    if !(condition < MAX_FIT_COND) {
        return Err(Error::Conditioning {
            what: "asymptotic moment fit",
            cond: condition,
        });
    }
    let values: Vec<CMat> = y_grid
        .par_iter()
        .map(|&y| evaluator(Complex64::new(0.0, y)).map(|r| r * Complex64::new(y, 0.0)))
        .collect::<Result<_>>()?;
    let d = values[0].nrows();
    let im_parts: Vec<CMat> = values.iter().map(linalg::imaginary_part).collect();
    let re_parts: Vec<CMat> = values.iter().map(linalg::hermitian_part).collect();
    let pinv = linalg::pinv_abs(&design, 0.0);
    let mut moments = vec![CMat::zeros(d, d); cols];
    let mut residual = 0.0_f64;
    for a in 0..d {
        for b in 0..d {
            let rhs = CVec::from_iterator(rows, im_parts.iter().chain(&re_parts).map(|v| v[(a, b)]));
            let coef = &pinv * &rhs;
            residual = residual.max(linalg::max_abs(&(&design * &coef - &rhs)));
            for k in 0..cols {
                moments[k][(a, b)] = coef[k] * y_min.powi(k as i32);
            }
        }
    }
    Ok(AsymptoticFit {
        moments,
        residual,
        condition,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerronIncrement {
    pub a: f64,
    pub b: f64,
    /// Extrapolated `F(b) - F(a)` (d×d, `[re, im]` entries).
    pub increment: crate::io::MatrixJson,
    /// `(ε, (1/π)∫_a^b Im R(x + iε) dx)` before extrapolation.
    pub per_eps: Vec<(f64, crate::io::MatrixJson)>,
    /// Largest gap between panel counts `N` and `N/2` over the schedule.
    pub refinement_gap: f64,
    pub converged: bool,
}

impl PerronIncrement {
    pub fn increment_matrix(&self) -> CMat {
        self.increment.to_matrix().expect("well formed")
    }

    pub fn per_eps_matrices(&self) -> Vec<(f64, CMat)> {
        self.per_eps
            .iter()
            .map(|(e, m)| (*e, m.to_matrix().expect("well formed")))
            .collect()
    }
}

fn simpson(samples: &[CMat], h: f64) -> CMat {
    let n = samples.len() - 1;
    let mut acc = &samples[0] + &samples[n];
    for (k, s) in samples.iter().enumerate().take(n).skip(1) {
        acc += s.scale(if k % 2 == 1 { 4.0 } else { 2.0 });
    }
    acc.scale(h / 3.0)
}

/// `(1/π)∫_a^b Im R(x + iε) dx` by composite Simpson per `ε`, then two-point
/// Richardson extrapolation in `ε` over the two smallest values.
pub fn stieltjes_perron<F>(evaluator: F, a: f64, b: f64, eps: &[f64], n_quad: usize) -> Result<PerronIncrement>
where
    F: Fn(Complex64) -> Result<CMat> + Sync,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Input(format!("bad interval [{a}, {b}]")));
    }
    if eps.is_empty() || eps.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Input("eps schedule must be non-empty and decreasing".into()));
    }
    if eps.iter().any(|&e| e < MIN_EPS) {
        return Err(Error::Input(format!("eps below {MIN_EPS:e}")));
    }
    if n_quad < 2 {
        return Err(Error::Input("n_quad must be at least 2".into()));
    }
    // Panel count: n_quad per unit length, rounded up to a multiple of 4
    // so the half-resolution rule is also Simpson.
    let panels = {
        let raw = ((b - a) * n_quad as f64).ceil() as usize;
        raw.max(4).div_ceil(4) * 4
    };
    let h = (b - a) / panels as f64;

    let mut per_eps = Vec::with_capacity(eps.len());
    let mut refinement_gap = 0.0_f64;
    for &e in eps {
        let samples: Vec<CMat> = (0..=panels)
            .into_par_iter()
            .map(|k| {
                let x = if k == panels { b } else { a + k as f64 * h };
                evaluator(Complex64::new(x, e)).map(|r| linalg::imaginary_part(&r))
            })
            .collect::<Result<_>>()?;
        let fine = simpson(&samples, h).scale(1.0 / PI);
        let coarse_samples: Vec<CMat> = samples.iter().step_by(2).cloned().collect();
        let coarse = simpson(&coarse_samples, 2.0 * h).scale(1.0 / PI);
        refinement_gap = refinement_gap.max(linalg::max_abs(&(&fine - &coarse)));
        per_eps.push((e, fine));
    }
    let increment = match per_eps.len() {
        1 => per_eps[0].1.clone(),
        n => {
            let (e1, f1) = &per_eps[n - 2];
            let (e2, f2) = &per_eps[n - 1];
            (f2.scale(*e1) - f1.scale(*e2)).scale(1.0 / (e1 - e2))
        }
    };
    Ok(PerronIncrement {
        a,
        b,
        increment: crate::io::MatrixJson::from_matrix(&increment),
        per_eps: per_eps
            .iter()
            .map(|(e, m)| (*e, crate::io::MatrixJson::from_matrix(m)))
            .collect(),
        refinement_gap,
        converged: refinement_gap <= REFINEMENT_TOL,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructedDistribution {
    pub grid: Vec<f64>,
    pub increments: Vec<crate::io::MatrixJson>,
    pub epsilon_schedule: Vec<f64>,
    /// `‖Σ ΔF_k - S_0‖` entrywise maximum.
    pub mass_residual: f64,
    /// Smallest eigenvalue over all increments.
    pub min_increment_eigenvalue: f64,
    pub converged: bool,
}

pub fn reconstruct_distribution<F>(
    evaluator: F,
    grid: &[f64],
    eps: &[f64],
    n_quad: usize,
    s0: &CMat,
) -> Result<ReconstructedDistribution>
where
    F: Fn(Complex64) -> Result<CMat> + Sync,
{
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("grid needs at least two increasing cutpoints".into()));
    }
    let cells = grid
        .windows(2)
        .map(|w| stieltjes_perron(&evaluator, w[0], w[1], eps, n_quad))
        .collect::<Result<Vec<_>>>()?;
    let mats: Vec<CMat> = cells.iter().map(PerronIncrement::increment_matrix).collect();
    let total = mats.iter().fold(CMat::zeros(s0.nrows(), s0.ncols()), |a, m| a + m);
    let min_increment_eigenvalue = mats
        .iter()
        .map(|m| linalg::min_eigenvalue(&linalg::hermitian_part(m)))
        .fold(f64::INFINITY, f64::min);
    Ok(ReconstructedDistribution {
        grid: grid.to_vec(),
        increments: mats.iter().map(crate::io::MatrixJson::from_matrix).collect(),
        epsilon_schedule: eps.to_vec(),
        mass_residual: linalg::max_abs(&(total - s0)),
        min_increment_eigenvalue,
        converged: cells.iter().all(|c| c.converged),
    })
}

/// The unique solution when `A` is self-adjoint on `H`:
/// `A = Σ t_j P_j`, `W_j = I* P_j I`.
pub fn recover_discrete(model: &MomentModel) -> Result<DiscreteMatrixMeasure> {
    let (dp, dm) = model.defect_dims();
    if (dp, dm) != (0, 0) {
        return Err(Error::Indeterminate(dp, dm));
    }
    let a = linalg::hermitian_part(&model.shift.action);
    let (vals, vecs) = linalg::hermitian_eigen(&a);
    let scale = vals.iter().fold(0.0_f64, |x, v| x.max(v.abs()));
    // Ascending order, clusters of nearly equal eigenvalues merged.
    let mut order: Vec<usize> = (0..vals.len()).rev().collect();
    order.sort_by(|&x, &y| vals[x].partial_cmp(&vals[y]).unwrap());
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in order {
        match clusters.last_mut() {
            Some(cl) if (vals[k] - vals[*cl.last().unwrap()]).abs() <= CLUSTER_TOL * scale => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let i = &model.embed_i.matrix;
    let mut nodes = Vec::with_capacity(clusters.len());
    let mut weights = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let node = cl.iter().map(|&k| vals[k]).sum::<f64>() / cl.len() as f64;
        let mut proj = CMat::zeros(a.nrows(), a.nrows());
        for &k in &cl {
            let v = vecs.column(k);
            proj += v * v.adjoint();
        }
        nodes.push(node);
        weights.push(linalg::hermitian_part(&(i.adjoint() * proj * i)));
    }
    DiscreteMatrixMeasure::new(nodes, weights)
}
