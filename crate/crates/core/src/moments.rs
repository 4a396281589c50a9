//! Truncated Hermitian matrix moment sequences, their block Hankel matrices
//! and the positivity test that decides solvability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l2space::DiscreteMatrixMeasure;
use crate::linalg::{self, CMat};

pub const DEFAULT_TOL_PSD: f64 = 1e-10;
pub const DEFAULT_TOL_RANK: f64 = 1e-10;
pub const DEFAULT_TOL_HERM: f64 = 1e-10;

/// Relative tolerances shared by the construction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hankel positivity, relative to `‖Γ_n‖₂`.
    pub psd: f64,
    /// Numerical rank cutoff, relative to `‖Γ_n‖₂`.
    pub rank: f64,
    /// Hermitian defect of each moment, relative to `1 + ‖S_k‖_F`.
    pub herm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd: DEFAULT_TOL_PSD,
            rank: DEFAULT_TOL_RANK,
            herm: DEFAULT_TOL_HERM,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol_psd", self.psd), ("tol_rank", self.rank), ("tol_herm", self.herm)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Moments `S_0, ..., S_{2n}` of a `d×d` matrix-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    dim: usize,
    moments: Vec<CMat>,
}

impl MomentSequence {
    /// Validates shapes, Hermitian symmetry and `S_0 ⪰ 0`, then replaces each
    /// moment by its Hermitian part.
    pub fn new(moments: Vec<CMat>, tol_herm: f64) -> Result<Self> {
        if moments.len() < 3 || moments.len().is_multiple_of(2) {
            return Err(Error::Input(format!(
                "expected 2n+1 moments with n >= 1, got {}",
                moments.len()
            )));
        }
        let dim = moments[0].nrows();
        if dim == 0 {
            return Err(Error::Input("moment dimension must be positive".into()));
        }
        for (k, s) in moments.iter().enumerate() {
            if s.nrows() != dim || s.ncols() != dim {
                return Err(Error::Input(format!(
                    "moment S_{k} has shape {}x{}, expected {dim}x{dim}",
                    s.nrows(),
                    s.ncols()
                )));
            }
            if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Input(format!("moment S_{k} has non-finite entries")));
            }
            let defect = (s - s.adjoint()).norm();
            if defect > tol_herm * (1.0 + s.norm()) {
                return Err(Error::Input(format!(
                    "moment S_{k} is not Hermitian (‖S - S*‖_F = {defect:e})"
                )));
            }
        }
        let moments: Vec<CMat> = moments.iter().map(linalg::hermitian_part).collect();
        let s0_min = linalg::min_eigenvalue(&moments[0]);
        let s0_scale = linalg::spectral_norm(&moments[0]).max(1.0);
        if s0_min < -DEFAULT_TOL_PSD * s0_scale {
            return Err(Error::Input(format!(
                "S_0 is not positive semidefinite (min eigenvalue {s0_min:e})"
            )));
        }
        Ok(MomentSequence { dim, moments })
    }

    /// Real scalar moments (`d = 1`).
    pub fn scalar(values: &[f64]) -> Result<Self> {
        let moments = values.iter().map(|&v| linalg::from_real(1, 1, &[v])).collect();
        Self::new(moments, DEFAULT_TOL_HERM)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The even truncation order `2n`.
    pub fn order(&self) -> usize {
        self.moments.len() - 1
    }

    /// Half order `n`; the Hankel matrix has `n + 1` block rows.
    pub fn n(&self) -> usize {
        self.order() / 2
    }

    pub fn moment(&self, k: usize) -> &CMat {
        &self.moments[k]
    }

    pub fn moments(&self) -> &[CMat] {
        &self.moments
    }

    /// Congruence `S_k ↦ U* S_k U`.
    pub fn congruence(&self, u: &CMat) -> Result<Self> {
        let moments = self.moments.iter().map(|s| u.adjoint() * s * u).collect();
        Self::new(moments, DEFAULT_TOL_HERM)
    }
}

/// `Γ_n` with `(j,k)` block `S_{j+k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHankel {
    pub n: usize,
    pub dim: usize,
    pub matrix: CMat,
}

impl BlockHankel {
    pub fn block(&self, j: usize, k: usize) -> CMat {
        let d = self.dim;
        self.matrix.view((j * d, k * d), (d, d)).into_owned()
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }
}

pub fn build_hankel(m: &MomentSequence) -> BlockHankel {
    let d = m.dim();
    let n = m.n();
    let size = d * (n + 1);
    let mut matrix = CMat::zeros(size, size);
    for j in 0..=n {
        for k in 0..=n {
            matrix.view_mut((j * d, k * d), (d, d)).copy_from(m.moment(j + k));
        }
    }
    BlockHankel { n, dim: d, matrix }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub solvable: bool,
    pub min_eigenvalue: f64,
    pub rank: usize,
    /// Absolute PSD threshold `tol_psd · ‖Γ_n‖₂`.
    pub tolerance_used: f64,
}

pub fn check_solvability(m: &MomentSequence, tol: &Tolerances) -> SolvabilityReport {
    let hankel = build_hankel(m);
    let (vals, _) = linalg::hermitian_eigen(&hankel.matrix);
    let norm = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min_eigenvalue = vals.last().copied().unwrap_or(0.0);
    let threshold = tol.psd * norm;
    let rank = vals.iter().filter(|&&v| v > tol.rank * norm).count();
    SolvabilityReport {
        solvable: min_eigenvalue >= -threshold,
        min_eigenvalue,
        rank,
        tolerance_used: threshold,
    }
}

/// `S_k = Σ_j t_j^k W_j` for `k = 0..=order`.
pub fn generate_from_measure(mu: &DiscreteMatrixMeasure, order: usize) -> Result<MomentSequence> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Error::Input(format!("order must be even and >= 2, got {order}")));
    }
    if mu.nodes().is_empty() {
        return Err(Error::Input("measure has no nodes".into()));
    }
    let d = mu.dim();
    let moments = (0..=order)
        .map(|k| {
            mu.nodes()
                .iter()
                .zip(mu.weights())
                .fold(CMat::zeros(d, d), |acc, (&t, w)| acc + w.scale(t.powi(k as i32)))
        })
        .collect();
    MomentSequence::new(moments, DEFAULT_TOL_HERM)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real};

    #[test]
    fn hankel_scalar_examples() {
        let h = build_hankel(&MomentSequence::scalar(&[1.0, 0.0, 1.0]).unwrap());
        assert_eq!(h.matrix, from_real(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let h = build_hankel(&MomentSequence::scalar(&[1.0, 1.0, 1.0]).unwrap());
        assert_eq!(h.matrix, from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn hankel_block_example() {
        let p = from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let m = MomentSequence::new(vec![linalg::identity(2), p.clone(), p.clone()], 1e-10).unwrap();
        let h = build_hankel(&m);
        assert_eq!(h.matrix.shape(), (4, 4));
        assert_eq!(h.block(0, 0), linalg::identity(2));
        assert_eq!(h.block(0, 1), p);
        assert_eq!(h.block(1, 0), p);
        assert_eq!(h.block(1, 1), p);
    }

    #[test]
    fn solvability_examples() {
        let tol = Tolerances::default();
        let r = check_solvability(&MomentSequence::scalar(&[1.0, 0.0, 1.0]).unwrap(), &tol);
        assert!(r.solvable);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
        assert_eq!(r.rank, 2);

        let r = check_solvability(&MomentSequence::scalar(&[1.0, 0.0, -1.0]).unwrap(), &tol);
        assert!(!r.solvable);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);

        let r = check_solvability(&MomentSequence::scalar(&[1.0, 1.0, 1.0]).unwrap(), &tol);
        assert!(r.solvable);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn generate_examples() {
        let mu = DiscreteMatrixMeasure::scalar(&[2.0], &[1.0]).unwrap();
        let m = generate_from_measure(&mu, 4).unwrap();
        let vals: Vec<f64> = m.moments().iter().map(|s| s[(0, 0)].re).collect();
        assert_eq!(vals, vec![1.0, 2.0, 4.0, 8.0, 16.0]);

        let mu = DiscreteMatrixMeasure::scalar(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let m = generate_from_measure(&mu, 4).unwrap();
        let vals: Vec<f64> = m.moments().iter().map(|s| s[(0, 0)].re).collect();
        assert_eq!(vals, vec![1.0, 0.0, 1.0, 0.0, 1.0]);

        let mu = DiscreteMatrixMeasure::new(
            vec![0.0, 1.0],
            vec![from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]), from_real(2, 2, &[0.0, 0.0, 0.0, 1.0])],
        )
        .unwrap();
        let m = generate_from_measure(&mu, 2).unwrap();
        assert_eq!(m.moment(0), &linalg::identity(2));
        assert_eq!(m.moment(1), &from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(m.moment(2), &from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert!(generate_from_measure(&mu, 3).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(MomentSequence::scalar(&[1.0, 0.0]), Err(Error::Input(_))));
        assert!(matches!(MomentSequence::scalar(&[-1.0, 0.0, 1.0]), Err(Error::Input(_))));
        let bad = vec![
            linalg::identity(2),
            CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            linalg::identity(2),
        ];
        assert!(MomentSequence::new(bad, 1e-10).is_err());
        let mismatched = vec![linalg::identity(2), linalg::identity(3), linalg::identity(2)];
        assert!(MomentSequence::new(mismatched, 1e-10).is_err());
    }

    #[test]
    fn symmetrizes_within_tolerance() {
        let s1 = CMat::from_row_slice(1, 1, &[c(0.5, 1e-13)]);
        let m = MomentSequence::new(vec![linalg::identity(1), s1, linalg::identity(1)], 1e-10).unwrap();
        assert_eq!(m.moment(1)[(0, 0)], c(0.5, 0.0));
    }
}
