#![allow(dead_code)]

use hamburger::cayley::SchurParameter;
use hamburger::l2space::DiscreteMatrixMeasure;
use hamburger::linalg::{CMat, CVec};
use hamburger::moments::{self, MomentSequence, Tolerances};
use hamburger::{Complex64, MomentModel};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| random_complex(rng))
}

/// `B B* + floor·E` with a random `d × rank` factor `B`.
pub fn random_weight<R: Rng>(rng: &mut R, d: usize, rank: usize, floor: f64) -> CMat {
    let b = random_matrix(rng, d, rank);
    &b * b.adjoint() + CMat::identity(d, d).scale(floor)
}

/// Discrete measure with `j` distinct nodes in `[-2, 2]` and full-rank weights.
pub fn random_measure<R: Rng>(rng: &mut R, d: usize, j: usize) -> DiscreteMatrixMeasure {
    loop {
        let mut nodes: Vec<f64> = (0..j).map(|_| rng.gen_range(-2.0..2.0)).collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if nodes.windows(2).any(|w| w[1] - w[0] < 0.15) {
            continue;
        }
        let weights = (0..j).map(|_| random_weight(rng, d, d, 0.1)).collect();
        return DiscreteMatrixMeasure::new(nodes, weights).unwrap();
    }
}

pub fn model_of(m: &MomentSequence) -> MomentModel {
    MomentModel::build(m, &Tolerances::default()).unwrap()
}

/// An indeterminate model generated by a random measure: more nodes than the
/// truncation can resolve, so both defect numbers equal `d`.
pub fn random_indeterminate_model<R: Rng>(rng: &mut R) -> MomentModel {
    let d = rng.gen_range(1..=2);
    let n = rng.gen_range(2..=3);
    let j = n + 1 + rng.gen_range(0..=2);
    let mu = random_measure(rng, d, j);
    model_of(&moments::generate_from_measure(&mu, 2 * n).unwrap())
}

pub fn gaussian_model() -> MomentModel {
    model_of(&MomentSequence::scalar(&[1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0]).unwrap())
}

/// Unitary matrix from the QR factorization of a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    random_matrix(rng, n, n).qr().q()
}

/// Random contraction of the model's parameter shape with `‖C‖₂ = rho`.
pub fn random_contraction<R: Rng>(rng: &mut R, model: &MomentModel, rho: f64) -> SchurParameter {
    let (dp, dm) = model.defect_dims();
    let m = random_matrix(rng, dm, dp);
    let norm = hamburger::linalg::spectral_norm(&m);
    if norm == 0.0 {
        return SchurParameter::zero(dm, dp);
    }
    SchurParameter::new(m.scale(rho / norm)).unwrap()
}

/// Contraction with norm drawn from `[0.05, 0.95)`.
pub fn random_strict_contraction<R: Rng>(rng: &mut R, model: &MomentModel) -> SchurParameter {
    let rho = rng.gen_range(0.05..0.95);
    random_contraction(rng, model, rho)
}

pub fn random_unitary_parameter<R: Rng>(rng: &mut R, model: &MomentModel) -> SchurParameter {
    let (dp, dm) = model.defect_dims();
    assert_eq!(dp, dm);
    SchurParameter::new(random_unitary(rng, dp)).unwrap()
}

/// Point of the upper half-plane away from the excluded band around `i`.
pub fn random_z<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0));
        if (z - c(0.0, 1.0)).norm() >= 0.2 {
            return z;
        }
    }
}

pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    hamburger::linalg::spectral_norm(&(a - b)) / hamburger::linalg::spectral_norm(b).max(1.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    hamburger::linalg::max_abs(m)
}
