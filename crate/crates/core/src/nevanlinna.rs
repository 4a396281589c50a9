//! Linear fractional description of `R(z) = ∫ dF(t)/(t - z)` through the
//! generalized resolvent `[E - ζ(V ⊕ Φ)]^{-1}`, `ζ = (z - i)/(z + i)`.
//!
//! The main path inverts `M = E - ζ(V ⊕ Φ)` blockwise on
//! `H = M_i ⊕ N_i`; only the top-left block of `M^{-1}` enters the result
//! because `K h` lies in `M_i`. [`direct_oracle`] and [`extension_oracle`]
//! compute the same values by dense inversion for cross-checking.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cayley::{self, CayleyData, SchurParameter, MAX_COND};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, I, ONE};
use crate::model::MomentModel;

/// Blocks of `M` for the decomposition `H = M_i ⊕ N_i`, each stored as an
/// `m × m` matrix vanishing outside its source and target subspaces.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub z: Complex64,
    /// `(E_{M_i} - ζ P_{M_i} V)^{-1}` on `M_i`.
    pub a_hat: CMat,
    /// `-ζ P_{M_i} Φ`.
    pub b: CMat,
    /// `-ζ P_{N_i} V`.
    pub c: CMat,
    /// `E_{N_i} - ζ P_{N_i} Φ`.
    pub d: CMat,
    /// `D - C Â B`.
    pub h: CMat,
    pub cond_h: f64,
    mi_basis: CMat,
    ni_basis: CMat,
}

impl BlockSet {
    /// `H` in the orthonormal basis of `N_i`.
    pub fn h_compressed(&self) -> CMat {
        self.ni_basis.adjoint() * &self.h * &self.ni_basis
    }

    pub fn mi_basis(&self) -> &CMat {
        &self.mi_basis
    }

    pub fn ni_basis(&self) -> &CMat {
        &self.ni_basis
    }
}

fn check_point(z: Complex64) -> Result<()> {
    cayley::check_upper_half_plane(z)?;
    if (z + I).norm() < cayley::EXCLUDED_BAND {
        return Err(Error::Domain {
            z,
            reason: "too close to z = -i",
        });
    }
    Ok(())
}

pub fn blocks(c: &CayleyData, p: &SchurParameter, z: Complex64) -> Result<BlockSet> {
    check_point(z)?;
    let phi = c.phi_full(p)?;
    let zt = cayley::zeta(z);
    let lambda = (z + I) / (z - I);
    let bm = &c.mi_basis;
    let bn = &c.defect_in_basis;
    let r = bm.ncols();

    let vm = bm.adjoint() * &c.v * bm;
    let shifted = vm - CMat::identity(r, r) * lambda;
    let a_small = linalg::inverse_checked(&shifted, "P_{M_i} V - λ E", MAX_COND)? * (-lambda);
    let a_hat = bm * a_small * bm.adjoint();

    let b = &c.p_mi * &phi * (-zt);
    let cc = &c.p_ni * &c.v * (-zt);
    let d = &c.p_ni - &c.p_ni * &phi * zt;
    let h = &d - &cc * &a_hat * &b;
    let cond_h = linalg::condition_number(&(bn.adjoint() * &h * bn));
    Ok(BlockSet {
        z,
        a_hat,
        b,
        c: cc,
        d,
        h,
        cond_h,
        mi_basis: bm.clone(),
        ni_basis: bn.clone(),
    })
}

/// `Â + Â B H^{-1} C Â`, the top-left block of `M^{-1}`.
pub fn frobenius_topleft(b: &BlockSet) -> Result<CMat> {
    if b.ni_basis.ncols() == 0 {
        return Ok(b.a_hat.clone());
    }
    if !(b.cond_h < MAX_COND) {
        return Err(Error::Conditioning {
            what: "H_z(Φ)",
            cond: b.cond_h,
        });
    }
    let rhs = b.ni_basis.adjoint() * &b.c * &b.a_hat;
    let x = linalg::solve_checked(&b.h_compressed(), &rhs, "H_z(Φ)", MAX_COND)?;
    Ok(&b.a_hat + &b.a_hat * &b.b * &b.ni_basis * x)
}

/// `E - ζ(V ⊕ Φ)`.
pub fn resolvent_matrix(c: &CayleyData, p: &SchurParameter, z: Complex64) -> Result<CMat> {
    let w = c.extended(p)?;
    let m = w.nrows();
    Ok(CMat::identity(m, m) - w * cayley::zeta(z))
}

/// `P_{M_i} M^{-1} P_{M_i}` by dense inversion.
pub fn dense_topleft(c: &CayleyData, p: &SchurParameter, z: Complex64) -> Result<CMat> {
    check_point(z)?;
    let inv = linalg::inverse_checked(&resolvent_matrix(c, p, z)?, "E - ζ(V ⊕ Φ)", MAX_COND)?;
    Ok(&c.p_mi * inv * &c.p_mi)
}

/// Per-`z` data for the quadratic form `h ↦ (R(z) h, h)`.
struct FormKernel<'a> {
    z: Complex64,
    /// `K* T K` with `T` the top-left block.
    core: CMat,
    model: &'a MomentModel,
}

impl FormKernel<'_> {
    fn new<'a>(model: &'a MomentModel, topleft: &CMat, z: Complex64) -> FormKernel<'a> {
        let k = &model.embed_k.matrix;
        FormKernel {
            z,
            core: k.adjoint() * topleft * k,
            model,
        }
    }

    fn value(&self, h: &CVec) -> Complex64 {
        assemble(self.model, self.z, linalg::form(&self.core, h, h), h)
    }
}

/// Given `g = (R_ζ(V) K h, K h)`, returns
/// `2i/(z²+1)² g - ((S_2+S_0)h, h)/((z-i)(z²+1)) - ((z S_0 + S_1)h, h)/(z²+1)`.
fn assemble(model: &MomentModel, z: Complex64, generalized: Complex64, h: &CVec) -> Complex64 {
    let m = model.moments();
    let (s0, s1, s2) = (m.moment(0), m.moment(1), m.moment(2));
    let zz1 = z * z + ONE;
    let first = generalized * (I * 2.0) / (zz1 * zz1);
    let second = linalg::form(&(s2 + s0), h, h) / ((z - I) * zz1);
    let third = linalg::form(&(s0 * z + s1), h, h) / zz1;
    first - second - third
}

fn check_h(model: &MomentModel, h: &CVec) -> Result<()> {
    if h.len() != model.dim() {
        return Err(Error::Input(format!(
            "vector has length {}, expected {}",
            h.len(),
            model.dim()
        )));
    }
    Ok(())
}

/// `(R(z) h, h)` through the blockwise (Frobenius) inversion.
pub fn evaluate_form(model: &MomentModel, p: &SchurParameter, z: Complex64, h: &CVec) -> Result<Complex64> {
    check_h(model, h)?;
    let b = blocks(&model.cayley, p, z)?;
    let t = frobenius_topleft(&b)?;
    Ok(FormKernel::new(model, &t, z).value(h))
}

/// Same quantity as [`evaluate_form`] with `M^{-1}` formed densely.
pub fn direct_oracle(model: &MomentModel, p: &SchurParameter, z: Complex64, h: &CVec) -> Result<Complex64> {
    check_h(model, h)?;
    check_point(z)?;
    let inv = linalg::inverse_checked(&resolvent_matrix(&model.cayley, p, z)?, "E - ζ(V ⊕ Φ)", MAX_COND)?;
    let y = &model.embed_k.matrix * h;
    let generalized = y.dotc(&(inv * &y));
    Ok(assemble(model, z, generalized, h))
}

/// `I* (Ã - z)^{-1} I` for the canonical self-adjoint extension
/// `Ã = i(U + 1)(U - 1)^{-1}`, `U = V ⊕ C`, with `C` unitary.
pub fn extension_oracle(model: &MomentModel, p: &SchurParameter, z: Complex64) -> Result<CMat> {
    if !(z.im != 0.0) {
        return Err(Error::Domain {
            z,
            reason: "resolvent needs non-real z",
        });
    }
    let u = cayley::unitary_extension(&model.cayley, p)?;
    let a_tilde = cayley::inverse_cayley(&u)?;
    let m = a_tilde.nrows();
    let res = linalg::inverse_checked(&(a_tilde - CMat::identity(m, m) * z), "Ã - z", MAX_COND)?;
    let i = &model.embed_i.matrix;
    Ok(i.adjoint() * res * i)
}

/// `R(z)` as a `d × d` matrix: `(R e_k, e_l) = R[l, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaValue {
    pub z: Complex64,
    pub r: CMat,
}

impl NevanlinnaValue {
    /// `(R - R*)/(2i)`.
    pub fn im_part(&self) -> CMat {
        linalg::imaginary_part(&self.r)
    }

    pub fn min_im_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.im_part())
    }
}

/// Recovers the sesquilinear form from quadratic values:
/// `(R h, g) = ¼[q(h+g) - q(h-g) + i q(h+ig) - i q(h-ig)]`.
pub fn polarize(dim: usize, q: impl Fn(&CVec) -> Complex64) -> CMat {
    let unit = |k: usize| {
        let mut e = CVec::zeros(dim);
        e[k] = ONE;
        e
    };
    let coeffs = [(ONE, ONE), (-ONE, -ONE), (I, I), (-I, -I)];
    CMat::from_fn(dim, dim, |l, k| {
        if l == k {
            return q(&unit(k));
        }
        let (h, g) = (unit(k), unit(l));
        coeffs
            .iter()
            .map(|&(cj, shift)| q(&(&h + &g * shift)) * cj * 0.25)
            .sum()
    })
}

fn evaluate_upper(model: &MomentModel, p: &SchurParameter, z: Complex64) -> Result<CMat> {
    let b = blocks(&model.cayley, p, z)?;
    let t = frobenius_topleft(&b)?;
    let kernel = FormKernel::new(model, &t, z);
    Ok(polarize(model.dim(), |h| kernel.value(h)))
}

/// Full `R(z)`. Points in the lower half-plane use `R(z̄)*`.
pub fn evaluate_matrix(model: &MomentModel, p: &SchurParameter, z: Complex64) -> Result<NevanlinnaValue> {
    let r = if z.im < 0.0 {
        evaluate_upper(model, p, z.conj())?.adjoint()
    } else {
        evaluate_upper(model, p, z)?
    };
    Ok(NevanlinnaValue { z, r })
}

/// Independent evaluation of a grid, in input order.
pub fn evaluate_grid(model: &MomentModel, p: &SchurParameter, zs: &[Complex64]) -> Result<Vec<NevanlinnaValue>> {
    zs.par_iter().map(|&z| evaluate_matrix(model, p, z)).collect()
}
