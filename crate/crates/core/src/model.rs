use crate::cayley::{self, CayleyData};
use crate::error::Result;
use crate::gramspace::{self, EmbeddingI, EmbeddingK, GramSpace, ShiftOperator};
use crate::moments::{MomentSequence, Tolerances};

/// Everything derived from a moment sequence that does not depend on the
/// Schur parameter or on `z`.
#[derive(Debug, Clone)]
pub struct MomentModel {
    pub gram: GramSpace,
    pub shift: ShiftOperator,
    pub cayley: CayleyData,
    pub embed_i: EmbeddingI,
    pub embed_k: EmbeddingK,
}

impl MomentModel {
    pub fn build(m: &MomentSequence, tol: &Tolerances) -> Result<Self> {
        let gram = GramSpace::construct(m, tol)?;
        let shift = gramspace::build_shift(&gram)?;
        let cayley = cayley::cayley_transform(&shift, &gram)?;
        let (embed_i, embed_k) = gramspace::build_embeddings(&gram)?;
        Ok(MomentModel {
            gram,
            shift,
            cayley,
            embed_i,
            embed_k,
        })
    }

    pub fn moments(&self) -> &MomentSequence {
        self.gram.moments()
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn defect_dims(&self) -> (usize, usize) {
        self.cayley.defect_dims
    }

    pub fn is_determinate(&self) -> bool {
        self.cayley.is_determinate()
    }

    /// `‖P_{N_i} K‖₂`; `K` maps into `M_i`.
    pub fn k_range_residual(&self) -> f64 {
        crate::linalg::spectral_norm(&(&self.cayley.p_ni * &self.embed_k.matrix))
    }
}
