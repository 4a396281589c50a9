//! Finite model of the Hilbert space generated by the Hankel kernel.
//!
//! An ambient coefficient vector `u = (u_0, ..., u_n)`, `u_j ∈ C^d`, stands
//! for the formal sum `Σ_j u_j ε_j`; its class in `H` is represented by the
//! orthonormal coordinates `Q u` where `Γ_n = U Λ U*` and `Q = Λ_r^{1/2} U_r*`.
//! Then `⟨[u], [v]⟩_H = v* Γ_n u = (Qv)* (Qu)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, I};
use crate::moments::{self, BlockHankel, MomentSequence, Tolerances};

/// Largest accepted `‖Q_high N‖ / sqrt(‖Γ_n‖₂)` for kernel vectors `N` of the
/// low-degree block.
pub const SHIFT_CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GramSpace {
    moments: MomentSequence,
    gram: BlockHankel,
    rank: usize,
    coord_map: CMat,
    gram_eigvecs: CMat,
    gram_norm: f64,
    tol_rank: f64,
}

impl GramSpace {
    pub fn construct(m: &MomentSequence, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        let report = moments::check_solvability(m, tol);
        if !report.solvable {
            return Err(Error::NotSolvable {
                min_eigenvalue: report.min_eigenvalue,
                threshold: report.tolerance_used,
            });
        }
        let gram = moments::build_hankel(m);
        let (vals, vecs) = linalg::hermitian_eigen(&gram.matrix);
        let gram_norm = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let rank = vals.iter().filter(|&&v| v > tol.rank * gram_norm).count();
        if rank == 0 {
            return Err(Error::Input("Hankel matrix is numerically zero".into()));
        }
        let mut coord_map = CMat::zeros(rank, gram.matrix.ncols());
        for k in 0..rank {
            let row = vecs.column(k).adjoint().scale(vals[k].sqrt());
            coord_map.set_row(k, &row);
        }
        Ok(GramSpace {
            moments: m.clone(),
            gram,
            rank,
            coord_map,
            gram_eigvecs: vecs,
            gram_norm,
            tol_rank: tol.rank,
        })
    }

    pub fn moments(&self) -> &MomentSequence {
        &self.moments
    }

    pub fn gram(&self) -> &BlockHankel {
        &self.gram
    }

    /// `m = dim H`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.moments.dim()
    }

    pub fn n(&self) -> usize {
        self.moments.n()
    }

    /// `d (n + 1)`.
    pub fn dim_ambient(&self) -> usize {
        self.coord_map.ncols()
    }

    /// `Q`, an `m × d(n+1)` matrix.
    pub fn coord_map(&self) -> &CMat {
        &self.coord_map
    }

    pub fn hankel_norm(&self) -> f64 {
        self.gram_norm
    }

    pub fn tol_rank(&self) -> f64 {
        self.tol_rank
    }

    /// Orthonormal ambient vectors spanning the numerical kernel of `Γ_n`.
    pub fn ambient_kernel(&self) -> Vec<CVec> {
        (self.rank..self.dim_ambient())
            .map(|k| self.gram_eigvecs.column(k).into_owned())
            .collect()
    }

    pub fn embed_ambient(&self, u: &CVec) -> Result<GramVector> {
        if u.len() != self.dim_ambient() {
            return Err(Error::Input(format!(
                "ambient vector has length {}, expected {}",
                u.len(),
                self.dim_ambient()
            )));
        }
        Ok(GramVector {
            coords: &self.coord_map * u,
        })
    }

    /// `x_{h,j}`.
    pub fn embed(&self, h: &CVec, j: usize) -> Result<GramVector> {
        let (d, n) = (self.dim(), self.n());
        if j > n {
            return Err(Error::DegreeOutOfRange { degree: j, max: n });
        }
        if h.len() != d {
            return Err(Error::Input(format!("vector has length {}, expected {d}", h.len())));
        }
        Ok(GramVector {
            coords: self.coord_map.columns(j * d, d) * h,
        })
    }

    /// `Σ_k x_{h_k,k}` for `coeffs = [h_0, ..., h_r]`, `r ≤ n`.
    pub fn embed_sum(&self, coeffs: &[CVec]) -> Result<GramVector> {
        let mut coords = CVec::zeros(self.rank);
        for (k, h) in coeffs.iter().enumerate() {
            coords += self.embed(h, k)?.coords;
        }
        Ok(GramVector { coords })
    }

    /// Columns `j d .. (j+1) d` of `Q`: the matrix of `h ↦ x_{h,j}`.
    pub fn degree_block(&self, j: usize) -> CMat {
        let d = self.dim();
        self.coord_map.columns(j * d, d).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramVector {
    pub coords: CVec,
}

impl GramVector {
    /// `⟨self, other⟩_H`, linear in the first argument.
    pub fn inner(&self, other: &GramVector) -> Complex64 {
        other.coords.dotc(&self.coords)
    }

    pub fn norm_squared(&self) -> f64 {
        self.coords.norm_squared()
    }
}

/// The shift `x_{h,k} ↦ x_{h,k+1}` on `D = span{x_{h,k} : k ≤ n-1}`.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    /// Orthonormal basis of the domain, `m × domain_dim`.
    pub domain_basis: CMat,
    pub domain_proj: CMat,
    /// `m × m`, zero on the orthogonal complement of the domain.
    pub action: CMat,
    pub domain_dim: usize,
    /// Kernel-preservation residual that passed the consistency test.
    pub consistency_residual: f64,
}

impl ShiftOperator {
    /// `max |⟨Ax,y⟩ - ⟨x,Ay⟩|` over the domain basis, i.e. the size of the
    /// anti-Hermitian part of the compression.
    pub fn symmetry_residual(&self) -> f64 {
        let comp = self.domain_basis.adjoint() * &self.action * &self.domain_basis;
        linalg::max_abs(&(&comp - comp.adjoint()))
    }

    pub fn apply(&self, x: &GramVector) -> GramVector {
        GramVector {
            coords: &self.action * &x.coords,
        }
    }
}

/// With `Q_low` the degree `0..n-1` columns of `Q` and `Q_high` the degree
/// `1..n` columns, `A Q_low w = Q_high w`; this is well defined exactly when
/// `ker Q_low ⊆ ker Q_high`.
pub fn build_shift(g: &GramSpace) -> Result<ShiftOperator> {
    let (d, n, m) = (g.dim(), g.n(), g.rank());
    if n < 1 {
        return Err(Error::Input("shift needs order 2n >= 2".into()));
    }
    let q_low = g.coord_map.columns(0, d * n).into_owned();
    let q_high = g.coord_map.columns(d, d * n).into_owned();
    let sqrt_norm = g.gram_norm.sqrt();
    // Q_low* Q_low is the Hankel block Γ_{n-1}; cut its eigenvalues at the
    // same relative level as Γ_n.
    let cutoff = (g.tol_rank * g.gram_norm).sqrt();
    let svd = linalg::svd_sorted(&q_low);
    let r = svd.singular_values.iter().filter(|&&s| s > cutoff).count();

    let mut residual = 0.0_f64;
    for k in r..svd.v.ncols() {
        let nk = svd.v.column(k);
        residual = residual.max((&q_high * nk).norm() / sqrt_norm);
    }
    // Right kernel of a wide matrix also includes directions beyond the thin SVD.
    if svd.v.ncols() < q_low.ncols() {
        let proj = svd.v.columns(0, r) * svd.v.columns(0, r).adjoint();
        let comp = CMat::identity(q_low.ncols(), q_low.ncols()) - proj;
        residual = residual.max(linalg::spectral_norm(&(&q_high * comp)) / sqrt_norm);
    }
    if residual > SHIFT_CONSISTENCY_TOL {
        return Err(Error::ShiftInconsistent { residual });
    }

    let pinv = linalg::pinv_abs(&q_low, cutoff);
    let action = &q_high * pinv;
    let mut domain_basis = svd.u.columns(0, r).into_owned();
    for j in 0..r {
        let mut col: CVec = domain_basis.column(j).into_owned();
        linalg::normalize_phase(&mut col);
        domain_basis.set_column(j, &col);
    }
    let domain_proj = &domain_basis * domain_basis.adjoint();
    debug_assert_eq!(action.shape(), (m, m));
    Ok(ShiftOperator {
        domain_basis,
        domain_proj,
        action,
        domain_dim: r,
        consistency_residual: residual,
    })
}

/// `I: h ↦ x_{h,0}`.
#[derive(Debug, Clone)]
pub struct EmbeddingI {
    pub matrix: CMat,
}

/// `K: h ↦ x_{h,1} - i x_{h,0}`.
#[derive(Debug, Clone)]
pub struct EmbeddingK {
    pub matrix: CMat,
}

impl EmbeddingI {
    pub fn apply(&self, h: &CVec) -> GramVector {
        GramVector { coords: &self.matrix * h }
    }
}

impl EmbeddingK {
    pub fn apply(&self, h: &CVec) -> GramVector {
        GramVector { coords: &self.matrix * h }
    }
}

pub fn build_embeddings(g: &GramSpace) -> Result<(EmbeddingI, EmbeddingK)> {
    if g.n() < 1 {
        return Err(Error::Input("K needs degree 1 moments".into()));
    }
    let i0 = g.degree_block(0);
    let k = g.degree_block(1) - i0.clone() * I;
    Ok((EmbeddingI { matrix: i0 }, EmbeddingK { matrix: k }))
}
