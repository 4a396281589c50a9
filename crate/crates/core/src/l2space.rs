//! `L₂(C^d, dF)` for a discrete matrix measure `F = Σ_j W_j 1_{t > t_j}`.
//!
//! Functions are stored by their values at the nodes, so the usual
//! distinctions between continuous classes disappear and the quotient by
//! null functions is a finite-dimensional computation.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gramspace::GramSpace;
use crate::linalg::{self, CMat, CVec};
use crate::moments::{self, MomentSequence, Tolerances};

const WEIGHT_PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMatrixMeasure {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<CMat>,
}

impl DiscreteMatrixMeasure {
    /// Nodes must be strictly increasing; weights Hermitian PSD. Weights are
    /// replaced by their Hermitian parts.
    pub fn new(nodes: Vec<f64>, weights: Vec<CMat>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Input("measure needs at least one node".into()));
        }
        if nodes.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::Input("nodes must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("nodes must be strictly increasing".into()));
        }
        let dim = weights[0].nrows();
        if dim == 0 {
            return Err(Error::Input("weight dimension must be positive".into()));
        }
        let mut herm = Vec::with_capacity(weights.len());
        for (j, w) in weights.iter().enumerate() {
            if w.nrows() != dim || w.ncols() != dim {
                return Err(Error::Input(format!("weight W_{j} has wrong shape")));
            }
            let scale = 1.0 + w.norm();
            if (w - w.adjoint()).norm() > WEIGHT_PSD_TOL * scale {
                return Err(Error::Input(format!("weight W_{j} is not Hermitian")));
            }
            let h = linalg::hermitian_part(w);
            let min = linalg::min_eigenvalue(&h);
            if min < -WEIGHT_PSD_TOL * scale {
                return Err(Error::Input(format!(
                    "weight W_{j} is not positive semidefinite (min eigenvalue {min:e})"
                )));
            }
            herm.push(h);
        }
        Ok(DiscreteMatrixMeasure {
            dim,
            nodes,
            weights: herm,
        })
    }

    pub fn scalar(nodes: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(
            nodes.to_vec(),
            weights.iter().map(|&w| linalg::from_real(1, 1, &[w])).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[CMat] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> CMat {
        self.weights
            .iter()
            .fold(CMat::zeros(self.dim, self.dim), |a, w| a + w)
    }
}

/// A function on the nodes; column `j` holds `f(t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Element {
    pub values: CMat,
}

impl L2Element {
    pub fn new(values: CMat) -> Self {
        L2Element { values }
    }

    /// `p(t) = Σ_k t^k h_k` sampled at the nodes of `mu`.
    pub fn from_polynomial(mu: &DiscreteMatrixMeasure, coeffs: &[CVec]) -> Result<Self> {
        let mut values = CMat::zeros(mu.dim(), mu.len());
        for (k, h) in coeffs.iter().enumerate() {
            if h.len() != mu.dim() {
                return Err(Error::Input("coefficient length differs from measure dimension".into()));
            }
            for (j, &t) in mu.nodes().iter().enumerate() {
                let col = values.column(j) + h.scale(t.powi(k as i32));
                values.set_column(j, &col);
            }
        }
        Ok(L2Element { values })
    }

    /// `t · f(t)`.
    pub fn times_t(&self, mu: &DiscreteMatrixMeasure) -> Self {
        self.map_nodes(mu, |t| Complex64::new(t, 0.0))
    }

    /// Pointwise scaling `φ(t) · f(t)`.
    pub fn map_nodes(&self, mu: &DiscreteMatrixMeasure, phi: impl Fn(f64) -> Complex64) -> Self {
        let mut values = self.values.clone();
        for (j, &t) in mu.nodes().iter().enumerate() {
            let s = phi(t);
            values.column_mut(j).apply(|z| *z *= s);
        }
        L2Element { values }
    }
}

fn check_shape(f: &L2Element, mu: &DiscreteMatrixMeasure) -> Result<()> {
    if f.values.shape() != (mu.dim(), mu.len()) {
        return Err(Error::Input(format!(
            "function has shape {:?}, measure expects {:?}",
            f.values.shape(),
            (mu.dim(), mu.len())
        )));
    }
    Ok(())
}

/// `Ψ(f, g) = Σ_j (W_j f(t_j), g(t_j))`.
pub fn psi_inner(f: &L2Element, g: &L2Element, mu: &DiscreteMatrixMeasure) -> Result<Complex64> {
    check_shape(f, mu)?;
    check_shape(g, mu)?;
    Ok(mu
        .weights()
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let fj: CVec = f.values.column(j).into_owned();
            let gj: CVec = g.values.column(j).into_owned();
            linalg::form(w, &fj, &gj)
        })
        .sum())
}

/// Multiplication by `t` on `L₂` modulo Ψ-null functions.
#[derive(Debug, Clone)]
pub struct MultOperator {
    /// Self-adjoint matrix in orthonormal quotient coordinates (diagonal).
    pub matrix: CMat,
    /// Maps node values (stacked column-major, node by node) to quotient
    /// coordinates: `r × dJ`.
    pub coord_map: CMat,
    /// Node index of each quotient coordinate.
    pub node_of_coord: Vec<usize>,
}

impl MultOperator {
    pub fn rank(&self) -> usize {
        self.node_of_coord.len()
    }

    /// Quotient coordinates `[f]`.
    pub fn coords(&self, f: &L2Element) -> CVec {
        let stacked = CVec::from_iterator(f.values.len(), f.values.iter().copied());
        &self.coord_map * stacked
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.rank()).map(|k| self.matrix[(k, k)].re).collect()
    }
}

/// The block-diagonal Gram matrix of point evaluations is `diag(W_j)`, so the
/// quotient coordinates come from each weight's eigendecomposition.
pub fn mult_operator(mu: &DiscreteMatrixMeasure) -> MultOperator {
    let d = mu.dim();
    let scale = mu
        .weights()
        .iter()
        .map(linalg::spectral_norm)
        .fold(0.0_f64, f64::max);
    let mut rows: Vec<(usize, CVec)> = Vec::new();
    for (j, w) in mu.weights().iter().enumerate() {
        let (vals, vecs) = linalg::hermitian_eigen(w);
        for (k, &lam) in vals.iter().enumerate() {
            if lam > moments::DEFAULT_TOL_RANK * scale {
                let mut row = CVec::zeros(d * mu.len());
                for i in 0..d {
                    row[j * d + i] = vecs[(i, k)].conj() * lam.sqrt();
                }
                rows.push((j, row));
            }
        }
    }
    let r = rows.len();
    let mut coord_map = CMat::zeros(r, d * mu.len());
    let mut diag = CVec::zeros(r);
    let mut node_of_coord = Vec::with_capacity(r);
    for (k, (j, row)) in rows.into_iter().enumerate() {
        coord_map.set_row(k, &row.transpose());
        diag[k] = Complex64::new(mu.nodes()[j], 0.0);
        node_of_coord.push(j);
    }
    MultOperator {
        matrix: CMat::from_diagonal(&diag),
        coord_map,
        node_of_coord,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryReport {
    /// Largest `|Ψ(p,q) - ⟨Wp, Wq⟩_H|` divided by `‖Γ_n‖₂ ‖p‖ ‖q‖`, with
    /// coefficient-vector norms.
    pub max_residual: f64,
    pub samples: usize,
}

/// Compares `Ψ(p, q)` for random vector polynomials of degree `≤ n` with the
/// Gram-space inner product of `Σ_k x_{h_k,k}` and `Σ_l x_{g_l,l}`. Also feeds
/// ambient kernel vectors of `Γ_n` when the Hankel matrix is singular.
pub fn w0_isometry_check<R: Rng>(
    m: &MomentSequence,
    mu: &DiscreteMatrixMeasure,
    samples: usize,
    rng: &mut R,
) -> Result<IsometryReport> {
    if mu.dim() != m.dim() {
        return Err(Error::Input("measure and moments have different dimensions".into()));
    }
    let regenerated = moments::generate_from_measure(mu, m.order())?;
    for (k, (a, b)) in regenerated.moments().iter().zip(m.moments()).enumerate() {
        let gap = (a - b).norm();
        if gap > 1e-12 * (1.0 + b.norm()) {
            return Err(Error::Input(format!(
                "measure does not generate S_{k} (Frobenius gap {gap:e})"
            )));
        }
    }
    let gram = GramSpace::construct(m, &Tolerances::default())?;
    let d = m.dim();
    let n = m.n();
    let scale = gram.hankel_norm().max(f64::MIN_POSITIVE);

    let mut coefficient_sets: Vec<Vec<CVec>> = (0..samples)
        .map(|_| {
            (0..=n)
                .map(|_| CVec::from_fn(d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect()
        })
        .collect();
    for u in gram.ambient_kernel() {
        coefficient_sets.push((0..=n).map(|k| u.rows(k * d, d).into_owned()).collect());
    }

    let mut max_residual = 0.0_f64;
    for p in &coefficient_sets {
        for q in coefficient_sets.iter().take(samples.max(1)) {
            let fp = L2Element::from_polynomial(mu, p)?;
            let fq = L2Element::from_polynomial(mu, q)?;
            let lhs = psi_inner(&fp, &fq, mu)?;
            let xp = gram.embed_sum(p)?;
            let xq = gram.embed_sum(q)?;
            let rhs = xp.inner(&xq);
            let np = p.iter().map(|h| h.norm_squared()).sum::<f64>().sqrt();
            let nq = q.iter().map(|h| h.norm_squared()).sum::<f64>().sqrt();
            let res = (lhs - rhs).norm() / (scale * np.max(1e-300) * nq.max(1e-300));
            max_residual = max_residual.max(res);
        }
    }
    Ok(IsometryReport {
        max_residual,
        samples: coefficient_sets.len(),
    })
}
