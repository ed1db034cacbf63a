//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::DMatrix;

use crate::C64;

/// Hermitian part (M + M*)/2.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of the Hermitian part, sorted ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    let mut vals: Vec<f64> = hermitian_part(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending with
/// matching eigenvector columns.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], DMatrix::zeros(0, 0));
    }
    let se = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = se.eigenvectors.select_columns(order.iter());
    (vals, vecs)
}

/// Singular values, descending (empty matrix gives an empty list).
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    let mut vals: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Trace norm: the sum of singular values.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).iter().sum()
}

/// Ordinary determinant via pivoted LU; the empty matrix has determinant 1.
pub fn determinant(m: &DMatrix<C64>) -> C64 {
    if m.is_empty() {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Largest entry magnitude.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Inverse together with the 2-norm condition number of the input.
/// Returns `None` when the smallest singular value vanishes to machine
/// precision relative to the largest.
pub fn inverse_with_condition(m: &DMatrix<C64>) -> Option<(DMatrix<C64>, f64)> {
    if m.is_empty() {
        return Some((DMatrix::zeros(0, 0), 1.0));
    }
    let sv = singular_values(m);
    let (largest, smallest) = (sv[0], sv[sv.len() - 1]);
    if smallest <= f64::EPSILON * largest * m.nrows() as f64 {
        return None;
    }
    m.clone().try_inverse().map(|inv| (inv, largest / smallest))
}

/// Principal submatrix on the given (sorted) indices.
pub fn principal_submatrix(m: &DMatrix<C64>, indices: &[usize]) -> DMatrix<C64> {
    m.select_rows(indices.iter()).select_columns(indices.iter())
}

/// Principal minor det M\[S,S\] with S given as a bitmask over 0..n.
pub fn principal_minor(m: &DMatrix<C64>, mask: u64, n: usize) -> C64 {
    let indices: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
    determinant(&principal_submatrix(m, &indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn empty_matrix_conventions() {
        let e = DMatrix::<C64>::zeros(0, 0);
        assert_eq!(determinant(&e), C64::new(1.0, 0.0));
        assert_eq!(operator_norm(&e), 0.0);
        assert!(hermitian_eigenvalues(&e).is_empty());
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = dmatrix![
            C64::new(2.0, 0.0), C64::new(0.0, 1.0);
            C64::new(0.0, -1.0), C64::new(-1.0, 0.0);
        ];
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] <= vals[1]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let recon = &vecs * d * vecs.adjoint();
        assert!((recon - m).norm() < 1e-12);
    }

    #[test]
    fn condition_number_of_identity() {
        let id = DMatrix::<C64>::identity(3, 3);
        let (inv, cond) = inverse_with_condition(&id).unwrap();
        assert!((cond - 1.0).abs() < 1e-12);
        assert!((inv - DMatrix::<C64>::identity(3, 3)).norm() < 1e-14);
    }
}
