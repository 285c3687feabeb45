//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Orthonormal basis of the null space of `a`, columns as basis vectors.
/// Rank is decided by singular values below `RANK_CUTOFF * sigma_max`.
pub fn null_space(a: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let ncols = a.ncols();
    if a.nrows() == 0 || a.iter().all(|v| *v == 0.0) {
        // Zero map: the whole domain is the kernel.
        return (0..ncols)
            .map(|j| {
                let mut v = DVector::zeros(ncols);
                v[j] = 1.0;
                v
            })
            .collect();
    }
    // nalgebra computes the thin SVD; pad with zero rows so V^T is square
    // and carries the full orthogonal complement.
    let padded = if a.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = RANK_CUTOFF * smax;
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            basis.push(v_t.row(i).transpose());
        }
    }
    basis
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, RANK_CUTOFF * smax).expect("svd solve")
}

/// Numerical rank with the shared cutoff.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > RANK_CUTOFF * smax)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_projection() {
        // Map (x, y, z) -> (x, y): kernel is span{e_z}.
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ns = null_space(&a);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_and_lstsq() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(rank(&a), 2);
        let b = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let x = lstsq(&a, &b);
        let r = &a * &x - &b;
        // Residual must be orthogonal to the column space.
        let proj = a.transpose() * r;
        assert!(proj.norm() < 1e-10);
    }
}
