//! Small dense complex-matrix helpers shared across the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense column-major complex matrix.
pub type CMat = DMatrix<Complex64>;

/// Determinant by partial-pivot LU elimination.
///
/// Pivoting selects the largest remaining modulus in each column; a zero
/// pivot short-circuits to a zero determinant.
pub fn det_lu(m: &CMat) -> Complex64 {
    assert_eq!(m.nrows(), m.ncols(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[(col, col)].norm_sqr();
        for r in col + 1..n {
            let mag = a[(r, col)].norm_sqr();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            a.swap_rows(pivot_row, col);
            det = -det;
        }
        let pivot = a[(col, col)];
        det *= pivot;
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            for c in col + 1..n {
                let sub = factor * a[(col, c)];
                a[(r, c)] -= sub;
            }
        }
    }
    det
}

/// Hardcoded cofactor expansion of a 4x4 determinant, used as an
/// independent cross-check of [`det_lu`] in the test suites.
pub fn det4_cofactor(m: &CMat) -> Complex64 {
    assert_eq!((m.nrows(), m.ncols()), (4, 4), "det4_cofactor needs 4x4");
    let e = |r: usize, c: usize| m[(r, c)];
    let det3 = |r: [usize; 3], c: [usize; 3]| {
        e(r[0], c[0]) * (e(r[1], c[1]) * e(r[2], c[2]) - e(r[1], c[2]) * e(r[2], c[1]))
            - e(r[0], c[1]) * (e(r[1], c[0]) * e(r[2], c[2]) - e(r[1], c[2]) * e(r[2], c[0]))
            + e(r[0], c[2]) * (e(r[1], c[0]) * e(r[2], c[1]) - e(r[1], c[1]) * e(r[2], c[0]))
    };
    e(0, 0) * det3([1, 2, 3], [1, 2, 3]) - e(0, 1) * det3([1, 2, 3], [0, 2, 3])
        + e(0, 2) * det3([1, 2, 3], [0, 1, 3])
        - e(0, 3) * det3([1, 2, 3], [0, 1, 2])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut vals: Vec<f64> = svd.singular_values.iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    vals
}

/// Number of singular values at least `rel_tol` times the largest one.
pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s >= rel_tol * top).count(),
        _ => 0,
    }
}

/// Frobenius norm of `m† m − I`.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let d = m.nrows();
    (m.adjoint() * m - CMat::identity(d, d)).norm()
}
