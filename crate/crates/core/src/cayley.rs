//! Cayley transform `V = (A + i)(A - i)^{-1}` of the shift, its defect
//! subspaces, constant Schur parameters and unitary extensions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramspace::{GramSpace, ShiftOperator};
use crate::linalg::{self, CMat, I, ONE};

/// Points closer than this to `z = i` (or `z = -i`) are rejected.
pub const EXCLUDED_BAND: f64 = 1e-6;
pub const CONTRACTION_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const MAX_COND: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct CayleyData {
    /// `m × m`, isometric on `M_i = (A - i)D`, zero on `N_i = H ⊖ M_i`.
    pub v: CMat,
    pub p_mi: CMat,
    pub p_ni: CMat,
    pub p_mmi: CMat,
    pub p_nmi: CMat,
    /// Orthonormal basis of `M_i = D(V)`.
    pub mi_basis: CMat,
    /// Orthonormal basis of `N_i = H ⊖ D(V)`.
    pub defect_in_basis: CMat,
    /// Orthonormal basis of `N_{-i} = H ⊖ R(V)`.
    pub defect_out_basis: CMat,
    pub defect_dims: (usize, usize),
}

impl CayleyData {
    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn is_determinate(&self) -> bool {
        self.defect_dims == (0, 0)
    }

    /// `Φ` as an `m × m` operator: `defect_out · C · defect_in*`.
    pub fn phi_full(&self, p: &SchurParameter) -> Result<CMat> {
        p.check_dims(self)?;
        Ok(&self.defect_out_basis * &p.matrix * self.defect_in_basis.adjoint())
    }

    /// The contraction `V ⊕ Φ` on `H`.
    pub fn extended(&self, p: &SchurParameter) -> Result<CMat> {
        Ok(&self.v + self.phi_full(p)?)
    }
}

pub fn cayley_transform(a: &ShiftOperator, g: &GramSpace) -> Result<CayleyData> {
    let m = g.rank();
    let basis = &a.domain_basis;
    let eye = CMat::identity(m, m);
    let y_minus = (&a.action - &eye * I) * basis;
    let y_plus = (&a.action + &eye * I) * basis;
    // For symmetric A, ‖(A - i)x‖² = ‖Ax‖² + ‖x‖², so every singular value is ≥ 1.
    let svd = linalg::svd_sorted(&y_minus);
    if let Some(&smin) = svd.singular_values.last() {
        if smin < 0.5 {
            return Err(Error::Consistency(format!(
                "A - i is not injective on the domain (smallest singular value {smin:e})"
            )));
        }
    }
    let v = &y_plus * linalg::pinv_abs(&y_minus, 0.5);

    let mi_basis = linalg::range_basis(&y_minus, 1e-8);
    let mmi_basis = linalg::range_basis(&y_plus, 1e-8);
    let p_mi = &mi_basis * mi_basis.adjoint();
    let p_mmi = &mmi_basis * mmi_basis.adjoint();
    let p_ni = &eye - &p_mi;
    let p_nmi = &eye - &p_mmi;
    let defect_in_basis = linalg::projector_basis(&p_ni);
    let defect_out_basis = linalg::projector_basis(&p_nmi);
    let defect_dims = (defect_in_basis.ncols(), defect_out_basis.ncols());
    if defect_dims.0 != m - a.domain_dim || defect_dims.1 != m - a.domain_dim {
        return Err(Error::Consistency(format!(
            "defect numbers {defect_dims:?} differ from m - dim D = {}",
            m - a.domain_dim
        )));
    }
    Ok(CayleyData {
        v,
        p_mi,
        p_ni,
        p_mmi,
        p_nmi,
        mi_basis,
        defect_in_basis,
        defect_out_basis,
        defect_dims,
    })
}

/// A constant Schur-class function `Φ_ζ ≡ C: N_i → N_{-i}` in the defect bases.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurParameter {
    /// `d₋ × d₊`.
    pub matrix: CMat,
}

impl SchurParameter {
    pub fn new(matrix: CMat) -> Result<Self> {
        let norm = linalg::spectral_norm(&matrix);
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::Parameter(format!("‖C‖₂ = {norm} exceeds 1")));
        }
        Ok(SchurParameter { matrix })
    }

    pub fn zero(out_dim: usize, in_dim: usize) -> Self {
        SchurParameter {
            matrix: CMat::zeros(out_dim, in_dim),
        }
    }

    /// `e^{iθ} E` on a defect space of dimension `dim`.
    pub fn unitary_phase(dim: usize, theta: f64) -> Self {
        SchurParameter {
            matrix: CMat::identity(dim, dim) * Complex64::from_polar(1.0, theta),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn is_unitary(&self) -> bool {
        let (r, c) = self.shape();
        r == c && (self.matrix.adjoint() * &self.matrix - CMat::identity(r, r)).norm() <= UNITARY_TOL
    }

    pub fn check_dims(&self, c: &CayleyData) -> Result<()> {
        let (dp, dm) = c.defect_dims;
        if self.shape() != (dm, dp) {
            return Err(Error::Parameter(format!(
                "parameter has shape {:?}, defect spaces need {dm}x{dp}",
                self.shape()
            )));
        }
        Ok(())
    }
}

/// Parameter file / command-line description, resolved against the defect
/// dimensions of a concrete problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhiSpec {
    Zero,
    Unitary { theta: f64 },
    Matrix { matrix: crate::io::MatrixJson },
}

impl PhiSpec {
    /// `zero`, `unitary:THETA`, or a path to a JSON file.
    pub fn parse_cli(s: &str) -> Result<Self> {
        if s == "zero" {
            return Ok(PhiSpec::Zero);
        }
        if let Some(t) = s.strip_prefix("unitary:") {
            let theta = t
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("bad unitary angle '{t}'")))?;
            return Ok(PhiSpec::Unitary { theta });
        }
        let text = std::fs::read_to_string(s)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn resolve(&self, c: &CayleyData) -> Result<SchurParameter> {
        let (dp, dm) = c.defect_dims;
        let p = match self {
            PhiSpec::Zero => SchurParameter::zero(dm, dp),
            PhiSpec::Unitary { theta } => {
                if dp != dm {
                    return Err(Error::Parameter("unitary parameter needs equal defect numbers".into()));
                }
                SchurParameter::unitary_phase(dp, *theta)
            }
            PhiSpec::Matrix { matrix } => SchurParameter::new(matrix.to_matrix()?)?,
        };
        p.check_dims(c)?;
        Ok(p)
    }
}

/// `U = V ⊕ C`, unitary on `H`.
pub fn unitary_extension(c: &CayleyData, p: &SchurParameter) -> Result<CMat> {
    p.check_dims(c)?;
    if !p.is_unitary() {
        return Err(Error::Parameter("extension needs a square unitary parameter".into()));
    }
    c.extended(p)
}

/// `Ã = i (U + 1)(U - 1)^{-1}`.
pub fn inverse_cayley(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    let eye = CMat::identity(n, n);
    let inv = linalg::inverse_checked(&(u - &eye), "U - 1", MAX_COND)?;
    Ok((u + &eye) * inv * I)
}

pub fn check_upper_half_plane(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain {
            z,
            reason: "expected Im z > 0",
        });
    }
    if (z - I).norm() < EXCLUDED_BAND {
        return Err(Error::Domain {
            z,
            reason: "too close to z = i",
        });
    }
    Ok(())
}

/// `ζ = (z - i)/(z + i)`.
pub fn zeta(z: Complex64) -> Complex64 {
    (z - I) / (z + I)
}

/// `‖(1-ζ)(E - ζU)^{-1} - E - (z-i)(Ã - z)^{-1}‖₂`.
pub fn resolvent_link_check(c: &CayleyData, p: &SchurParameter, z: Complex64) -> Result<f64> {
    check_upper_half_plane(z)?;
    let u = unitary_extension(c, p)?;
    let n = u.nrows();
    let eye = CMat::identity(n, n);
    let zt = zeta(z);
    let lhs = linalg::inverse_checked(&(&eye - &u * zt), "E - ζU", MAX_COND)? * (ONE - zt);
    let a_tilde = inverse_cayley(&u)?;
    let res = linalg::inverse_checked(&(&a_tilde - &eye * z), "Ã - z", MAX_COND)?;
    let rhs = &eye + res * (z - I);
    Ok(linalg::spectral_norm(&(lhs - rhs)))
}
