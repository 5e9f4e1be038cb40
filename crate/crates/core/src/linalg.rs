use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix used for drift, diffusion and covariance blocks.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Swap operator ordering of a correlation matrix: maps ⟨F_μ^‡ F_ν⟩ to
/// ⟨F_μ F_ν^‡⟩ and back. `pairing[μ]` is the index of ξ_μ^‡.
pub fn reorder(m: &CMatrix, pairing: &[usize]) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| m[(pairing[i], pairing[j])])
}

/// Frobenius norm.
pub(crate) fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation from hermiticity.
pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub(crate) fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let t = m.clone().schur().unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub(crate) fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}
