use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Orthogonal basis of traceless Hermitian matrices normalised to
/// tr(λ_i λ_j) = 2 δ_ij.
///
/// The element order is fixed: symmetric off-diagonal pairs in row-major
/// order of (j, k) with j < k, then the antisymmetric pairs in the same
/// order, then the d − 1 diagonal matrices. For d = 2 this is exactly
/// (σ_x, σ_y, σ_z).
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<DMatrix<Complex64>>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, d² − 1.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[DMatrix<Complex64>] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &DMatrix<Complex64> {
        &self.elements[i]
    }

    /// Elementwise comparison; bases built for the same dimension always
    /// match since the construction is deterministic.
    pub fn approx_eq(&self, other: &HermitianBasis, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .elements
                .iter()
                .zip(&other.elements)
                .all(|(a, b)| (a - b).iter().all(|z| z.norm() <= tol))
    }
}

/// Build the generalised Gell-Mann basis for dimension `d`.
pub fn gellmann_basis(d: usize) -> Result<HermitianBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "traceless Hermitian basis needs d >= 2, got {d}"
        )));
    }
    let mut elements = Vec::with_capacity(d * d - 1);
    // Symmetric pairs: |j><k| + |k><j|.
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = DMatrix::<Complex64>::zeros(d, d);
            m[(j, k)] = Complex64::new(1.0, 0.0);
            m[(k, j)] = Complex64::new(1.0, 0.0);
            elements.push(m);
        }
    }
    // Antisymmetric pairs: -i|j><k| + i|k><j|.
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = DMatrix::<Complex64>::zeros(d, d);
            m[(j, k)] = Complex64::new(0.0, -1.0);
            m[(k, j)] = Complex64::new(0.0, 1.0);
            elements.push(m);
        }
    }
    // Diagonal: sqrt(2/(l(l+1))) (sum_{j<l} |j><j| - l |l><l|).
    for l in 1..d {
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        let scale = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
        for j in 0..l {
            m[(j, j)] = Complex64::new(scale, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * scale, 0.0);
        elements.push(m);
    }
    Ok(HermitianBasis { dim: d, elements })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs_inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a * b).trace().re
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let basis = gellmann_basis(2).unwrap();
        assert_eq!(basis.len(), 3);
        let x = basis.element(0);
        let y = basis.element(1);
        let z = basis.element(2);
        assert_eq!(x[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(z[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn gram_matrix_is_twice_identity() {
        // Brute-force Gram check for d = 2..6; d = 3 gets the tighter
        // bound since every entry there is a short exact sum.
        for d in 2..=6 {
            let tol = if d == 3 { 1e-12 } else { 1e-10 };
            let basis = gellmann_basis(d).unwrap();
            assert_eq!(basis.len(), d * d - 1);
            for (i, a) in basis.elements().iter().enumerate() {
                assert!(a.trace().norm() < 1e-12, "element {i} not traceless");
                assert!((a - a.adjoint()).iter().all(|z| z.norm() < 1e-12));
                for (j, b) in basis.elements().iter().enumerate() {
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!(
                        (hs_inner(a, b) - want).abs() < tol,
                        "gram({i},{j}) off for d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_dimension_below_two() {
        assert!(matches!(gellmann_basis(1), Err(Error::InvalidDimension(_))));
        assert!(matches!(gellmann_basis(0), Err(Error::InvalidDimension(_))));
    }
}
