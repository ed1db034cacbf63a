//! J-operator algebra on finite matrices.
//!
//! A kernel bound to a partitioned space splits into four blocks. With
//! rows indexed by the target part ("K_ab maps part-b points into part-a
//! rows"), J-Hermiticity means Hermitian diagonal blocks and K₂₁* = −K₁₂.
//! The hat transform K̂ = KP₁ + (1−K)P₂ swaps J-Hermitian with Hermitian
//! and is an involution; the validity criterion for a correlation kernel
//! is 0 ≤ K̂ ≤ 1, checked spectrally.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::linalg;
use crate::space::{IndexWindow, Part, PartitionedSpace, SpaceError};
use crate::C64;

/// Default tolerance for structural and spectral checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum JopError {
    #[error("kernel must be {n}×{n} to match the space, got {rows}×{cols}")]
    Dimensions { n: usize, rows: usize, cols: usize },
    #[error("1−K is numerically singular (condition ≳ {condition:.3e})")]
    SingularResolvent { condition: f64 },
    #[error("1−K₂₂ is not strictly positive definite (largest K₂₂ eigenvalue {lambda_max})")]
    SchurPrecondition { lambda_max: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Complex square kernel matrix bound to a partitioned space.
///
/// No structural constraint is imposed at construction; J-Hermiticity is
/// a checked property. Entries hold K(x,y) values; on a weighted space
/// the associated operator matrix is √w·K·√w (see [`JKernel::op_matrix`]).
#[derive(Clone, Debug, PartialEq)]
pub struct JKernel {
    space: PartitionedSpace,
    entries: DMatrix<C64>,
}

impl JKernel {
    pub fn new(space: PartitionedSpace, entries: DMatrix<C64>) -> Result<Self, JopError> {
        let n = space.n();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(JopError::Dimensions {
                n,
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self { space, entries })
    }

    pub fn from_real(space: PartitionedSpace, entries: DMatrix<f64>) -> Result<Self, JopError> {
        let complex = entries.map(|x| C64::new(x, 0.0));
        Self::new(space, complex)
    }

    pub fn zero(space: PartitionedSpace) -> Self {
        let n = space.n();
        Self {
            space,
            entries: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(space: PartitionedSpace) -> Self {
        let n = space.n();
        Self {
            space,
            entries: DMatrix::identity(n, n),
        }
    }

    /// Builds a kernel whose operator matrix (orthonormal-basis form)
    /// equals `op`; entries are recovered by dividing out √weights.
    pub fn from_op_matrix(space: PartitionedSpace, op: DMatrix<C64>) -> Result<Self, JopError> {
        let n = space.n();
        if op.nrows() != n || op.ncols() != n {
            return Err(JopError::Dimensions {
                n,
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        let entries = if space.has_unit_weights() {
            op
        } else {
            let mut m = op;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] /= C64::new((space.weight(i) * space.weight(j)).sqrt(), 0.0);
                }
            }
            m
        };
        Ok(Self { space, entries })
    }

    pub fn space(&self) -> &PartitionedSpace {
        &self.space
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    /// Matrix of the associated operator on L²(m) in the orthonormal
    /// basis {δ_x/√w(x)}: √w·K·√w. Equal to the entries for unit weights.
    pub fn op_matrix(&self) -> DMatrix<C64> {
        if self.space.has_unit_weights() {
            return self.entries.clone();
        }
        let n = self.n();
        let mut m = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] *= C64::new((self.space.weight(i) * self.space.weight(j)).sqrt(), 0.0);
            }
        }
        m
    }

    /// Block view of the kernel entries: rows in `row_part`, columns in
    /// `col_part` (so K₁₂ maps part-2 points into part-1 rows).
    pub fn block(&self, row_part: Part, col_part: Part) -> DMatrix<C64> {
        block_of(&self.entries, &self.space, row_part, col_part)
    }

    /// Entry scaling εK (used by thinning).
    pub fn scaled(&self, factor: f64) -> JKernel {
        JKernel {
            space: self.space.clone(),
            entries: self.entries.scale(factor),
        }
    }

    /// Structural J-Hermiticity test: K₁₁ and K₂₂ Hermitian, K₂₁* = −K₁₂,
    /// each up to `tol` in max-entry norm.
    pub fn is_j_hermitian(&self, tol: f64) -> bool {
        self.j_violation() <= tol
    }

    /// Largest entrywise deviation from the J-Hermitian block conditions.
    pub fn j_violation(&self) -> f64 {
        let op = self.op_matrix();
        let k11 = block_of(&op, &self.space, Part::One, Part::One);
        let k22 = block_of(&op, &self.space, Part::Two, Part::Two);
        let k12 = block_of(&op, &self.space, Part::One, Part::Two);
        let k21 = block_of(&op, &self.space, Part::Two, Part::One);
        linalg::max_abs(&(&k11 - k11.adjoint()))
            .max(linalg::max_abs(&(&k22 - k22.adjoint())))
            .max(linalg::max_abs(&(k21.adjoint() + k12)))
    }

    /// Hat transform K̂ = KP₁ + (1−K)P₂: part-1 columns are copied from K,
    /// part-2 columns from 1−K. An involution; swaps J-Hermitian with
    /// Hermitian.
    pub fn hat(&self) -> JKernel {
        let op = self.op_matrix();
        let hat_op = hat_of(&op, &self.space);
        JKernel::from_op_matrix(self.space.clone(), hat_op).expect("hat preserves dimensions")
    }

    /// Full validity verdict for the hat criterion 0 ≤ K̂ ≤ 1.
    ///
    /// Eigenvalues are accepted in [−ε, 1+ε] with ε = tol·max(1, ‖K̂‖);
    /// a failed structural test yields an invalid verdict rather than an
    /// error.
    pub fn check_validity(&self, tol: f64) -> Verdict {
        let op = self.op_matrix();
        let scale = linalg::max_abs(&op).max(1.0);
        let j_hermitian = self.is_j_hermitian(tol * scale);
        let hat_op = hat_of(&op, &self.space);
        // Spectrum of the Hermitian part; exact when the structural test passed.
        let hat_spectrum = linalg::hermitian_eigenvalues(&hat_op);
        let (lambda_min, lambda_max) = match (hat_spectrum.first(), hat_spectrum.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0.0, 0.0),
        };
        let eps = tol * lambda_min.abs().max(lambda_max.abs()).max(1.0);
        let margin = lambda_min.min(1.0 - lambda_max);
        let spectrum_ok = lambda_min >= -eps && lambda_max <= 1.0 + eps;
        let op_norm_k = linalg::operator_norm(&op);
        let op_norm_even = linalg::operator_norm(&even_part(&op, &self.space));

        let schur_consistent = if j_hermitian && self.n() > 0 {
            match self.schur_check(eps) {
                Ok(psd) => Some(psd == (lambda_min >= -eps)),
                Err(_) => None,
            }
        } else {
            None
        };

        Verdict {
            j_hermitian,
            hat_spectrum,
            valid: j_hermitian && spectrum_ok,
            margin,
            op_norm_k,
            op_norm_even,
            schur_consistent,
            eps,
        }
    }

    /// Schur-complement form of the K̂ ⪰ 0 half of the criterion:
    /// Q₁₁ = K₁₁ − K₂₁*(1−K₂₂)⁻¹K₂₁ must be positive semidefinite.
    ///
    /// Requires 1−K₂₂ strictly positive definite; assumes K J-Hermitian.
    pub fn schur_check(&self, tol: f64) -> Result<bool, JopError> {
        let op = self.op_matrix();
        let k11 = block_of(&op, &self.space, Part::One, Part::One);
        let k22 = block_of(&op, &self.space, Part::Two, Part::Two);
        let k21 = block_of(&op, &self.space, Part::Two, Part::One);
        let lambda_max = linalg::hermitian_eigenvalues(&k22)
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY);
        if lambda_max >= 1.0 - 1e-12 {
            return Err(JopError::SchurPrecondition { lambda_max });
        }
        let n2 = k22.nrows();
        let resolvent = DMatrix::<C64>::identity(n2, n2) - &k22;
        let (inv, condition) =
            linalg::inverse_with_condition(&resolvent).ok_or(JopError::SingularResolvent {
                condition: f64::INFINITY,
            })?;
        let _ = condition;
        let q11 = &k11 - k21.adjoint() * inv * &k21;
        let min_eig = linalg::hermitian_eigenvalues(&q11)
            .first()
            .copied()
            .unwrap_or(0.0);
        Ok(min_eig >= -tol)
    }

    /// Operator, Hilbert–Schmidt, even-part trace norms and the combined
    /// norm max{‖K‖₂, ‖K_even‖₁}.
    pub fn norms(&self) -> NormReport {
        let op = self.op_matrix();
        let hs = op.norm();
        let trace_even = linalg::trace_norm(&even_part(&op, &self.space));
        NormReport {
            op: linalg::operator_norm(&op),
            hs,
            trace_even,
            norm_1_2: hs.max(trace_even),
        }
    }

    /// Principal compression K^Δ: submatrix on the window, bound to the
    /// induced sub-space.
    pub fn restrict(&self, delta: &IndexWindow) -> Result<JKernel, JopError> {
        let sub_space = self.space.restrict(delta)?;
        let entries = linalg::principal_submatrix(&self.entries, delta.indices());
        Ok(JKernel {
            space: sub_space,
            entries,
        })
    }

    /// L-transform L = K(1−K)⁻¹.
    pub fn l_transform(&self) -> Result<JKernel, JopError> {
        let op = self.op_matrix();
        let n = op.nrows();
        let resolvent = DMatrix::<C64>::identity(n, n) - &op;
        let (inv, condition) =
            linalg::inverse_with_condition(&resolvent).ok_or(JopError::SingularResolvent {
                condition: f64::INFINITY,
            })?;
        if condition > 1e14 {
            return Err(JopError::SingularResolvent { condition });
        }
        let l_op = op * inv;
        let result = JKernel::from_op_matrix(self.space.clone(), l_op)?;
        debug_assert!(
            !self.is_j_hermitian(DEFAULT_TOL)
                || result.is_j_hermitian(1e-6 * linalg::max_abs(&result.op_matrix()).max(1.0)),
            "L-transform of a J-Hermitian kernel must be J-Hermitian"
        );
        Ok(result)
    }

    /// Both sides of the norm identity ‖K‖ = ‖K̂ − P₂‖ (holds for
    /// J-Hermitian K).
    pub fn norm_identity(&self) -> NormIdentity {
        let op = self.op_matrix();
        let hat_op = hat_of(&op, &self.space);
        let p2 = self.space.projector(Part::Two).map(|x| C64::new(x, 0.0));
        NormIdentity {
            lhs: linalg::operator_norm(&op),
            rhs: linalg::operator_norm(&(hat_op - p2)),
        }
    }
}

/// Validity report for the hat criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub j_hermitian: bool,
    /// Eigenvalues of K̂ (Hermitian part), ascending.
    pub hat_spectrum: Vec<f64>,
    pub valid: bool,
    /// min(λ_min, 1 − λ_max): distance of the spectrum into \[0,1\].
    pub margin: f64,
    pub op_norm_k: f64,
    pub op_norm_even: f64,
    /// Agreement of the Schur-complement test with the spectral K̂ ⪰ 0
    /// half; absent when 1−K₂₂ is not strictly positive definite.
    pub schur_consistent: Option<bool>,
    /// Resolved scale-aware acceptance epsilon.
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormReport {
    /// Largest singular value.
    pub op: f64,
    /// Hilbert–Schmidt (Frobenius) norm.
    pub hs: f64,
    /// Trace norm of the even (block-diagonal) part.
    pub trace_even: f64,
    /// max{‖K‖₂, ‖K_even‖₁}.
    pub norm_1_2: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

/// Block of `m` with rows in `row_part` and columns in `col_part`.
pub(crate) fn block_of(
    m: &DMatrix<C64>,
    space: &PartitionedSpace,
    row_part: Part,
    col_part: Part,
) -> DMatrix<C64> {
    let rows = space.indices_of(row_part);
    let cols = space.indices_of(col_part);
    m.select_rows(rows.iter()).select_columns(cols.iter())
}

/// Block-diagonal (even) part: entries with both indices in the same part.
pub(crate) fn even_part(m: &DMatrix<C64>, space: &PartitionedSpace) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if space.part(i) == space.part(j) {
            m[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Block-off-diagonal (odd) part.
pub(crate) fn odd_part(m: &DMatrix<C64>, space: &PartitionedSpace) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if space.part(i) != space.part(j) {
            m[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Hat transform at the matrix level.
pub(crate) fn hat_of(m: &DMatrix<C64>, space: &PartitionedSpace) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| match space.part(j) {
        Part::One => m[(i, j)],
        Part::Two => {
            let delta = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            delta - m[(i, j)]
        }
    })
}
