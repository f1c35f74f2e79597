use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::HermitianBasis;

/// Hermiticity / trace / positivity tolerance for validated inputs
/// (absolute, matrices are trace-one so their norm is of order 1).
pub const TOL_HERM: f64 = 1e-9;
pub const TOL_TRACE: f64 = 1e-9;
pub const TOL_PSD: f64 = 1e-9;

/// Scale factor √(d(d−1)/2) of the Euclidean embedding.
pub fn embedding_scale(d: usize) -> f64 {
    (d as f64 * (d as f64 - 1.0) / 2.0).sqrt()
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite
/// within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() < 2 {
            return Err(Error::InvalidDimension(format!(
                "density matrix must be square with d >= 2, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm_defect = (&mat - mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_defect > TOL_HERM {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |M - M^H| = {herm_defect:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!(
                "trace must be 1, got {} + {}i",
                tr.re, tr.im
            )));
        }
        let min_eig = min_eigenvalue(&mat);
        if min_eig < -TOL_PSD {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: min eigenvalue = {min_eig:.3e}"
            )));
        }
        let dim = mat.nrows();
        Ok(DensityMatrix { dim, mat })
    }

    /// |ψ><ψ| from a state vector; the vector is normalised first.
    pub fn from_pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        let mat = &v * v.adjoint();
        Self::new(mat)
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!(
                "d >= 2 required, got {d}"
            )));
        }
        let mat = DMatrix::<Complex64>::identity(d, d) / Complex64::new(d as f64, 0.0);
        Ok(DensityMatrix { dim: d, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Hermitian eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Purity tr(ρ²).
    pub fn purity(&self) -> f64 {
        trace_product_re(&self.mat, &self.mat)
    }
}

/// Real coordinate vector of a state in a traceless Hermitian basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    dim: usize,
    coords: Vec<f64>,
}

impl BlochVector {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != dim * dim - 1 {
            return Err(Error::DimensionMismatch(format!(
                "Bloch vector for d={dim} needs {} coords, got {}",
                dim * dim - 1,
                coords.len()
            )));
        }
        Ok(BlochVector { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut eigs: Vec<f64> = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

pub(crate) fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Re tr(AB) without forming the product: Σ_ij A_ij B_ji.
pub(crate) fn trace_product_re(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// Symmetrise away the tiny anti-Hermitian drift of repeated matrix
/// products.
pub(crate) fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Cheap PSD gate for hot paths: LLᴴ factorisation of M + tol·I with
/// explicit pivot checks, succeeding iff the minimum eigenvalue
/// exceeds −tol. (nalgebra's complex Cholesky does not reject
/// indefinite inputs, so the pivots are checked by hand.)
pub(crate) fn is_psd_within(m: &DMatrix<Complex64>, tol: f64) -> bool {
    let d = m.nrows();
    let mut a = m.clone();
    for i in 0..d {
        a[(i, i)] += Complex64::new(tol, 0.0);
    }
    for j in 0..d {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= a[(j, k)].norm_sqr();
        }
        if pivot <= 0.0 {
            return false;
        }
        let ljj = pivot.sqrt();
        a[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= a[(i, k)] * a[(j, k)].conj();
            }
            a[(i, j)] = v / ljj;
        }
    }
    true
}

/// Coordinates of ρ in the embedding ρ = (1/d)(1 + √(d(d−1)/2) r·λ).
pub fn embed_state(rho: &DensityMatrix, basis: &HermitianBasis) -> Result<BlochVector> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state d={} vs basis d={}",
            rho.dim(),
            basis.dim()
        )));
    }
    let d = rho.dim();
    let scale = d as f64 / (2.0 * embedding_scale(d));
    let coords = basis
        .elements()
        .iter()
        .map(|lam| trace_product_re(rho.matrix(), lam) * scale)
        .collect();
    BlochVector::new(d, coords)
}

/// Inverse of `embed_state`; the output is Hermitian and trace-one by
/// construction but positivity is not guaranteed — callers validate.
pub fn unembed_state(r: &BlochVector, basis: &HermitianBasis) -> Result<DMatrix<Complex64>> {
    if r.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "bloch d={} vs basis d={}",
            r.dim(),
            basis.dim()
        )));
    }
    Ok(unembed_coords(r.coords(), basis))
}

/// Unembed raw coordinates (length already matching the basis).
pub(crate) fn unembed_coords(coords: &[f64], basis: &HermitianBasis) -> DMatrix<Complex64> {
    let d = basis.dim();
    let c = embedding_scale(d);
    let mut m = DMatrix::<Complex64>::identity(d, d);
    for (rj, lam) in coords.iter().zip(basis.elements()) {
        let w = Complex64::new(c * rj, 0.0);
        m.zip_apply(lam, |out, l| *out += w * l);
    }
    m / Complex64::new(d as f64, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gellmann_basis;
    use approx::assert_abs_diff_eq;

    fn ket0() -> DensityMatrix {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn mixed_state_embeds_to_origin() {
        for d in 2..=4 {
            let basis = gellmann_basis(d).unwrap();
            let rho = DensityMatrix::maximally_mixed(d).unwrap();
            let r = embed_state(&rho, &basis).unwrap();
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn ket0_has_unit_z() {
        let basis = gellmann_basis(2).unwrap();
        let r = embed_state(&ket0(), &basis).unwrap();
        assert_abs_diff_eq!(r.coords()[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.coords()[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.coords()[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn unembed_origin_is_mixed() {
        let basis = gellmann_basis(3).unwrap();
        let r = BlochVector::new(3, vec![0.0; 8]).unwrap();
        let m = unembed_state(&r, &basis).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        assert!((m - mixed.matrix()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn unembed_outside_ball_fails_psd() {
        let basis = gellmann_basis(2).unwrap();
        let r = BlochVector::new(2, vec![0.0, 0.0, 2.0]).unwrap();
        let m = unembed_state(&r, &basis).unwrap();
        assert_abs_diff_eq!(m.trace().re, 1.0, epsilon = 1e-14);
        assert!(min_eigenvalue(&m) < -0.4);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn round_trip_random_qutrit() {
        // Deterministic pseudo-random Hermitian built from a fixed table.
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        let vals = [0.21, -0.13, 0.4, 0.07, -0.33, 0.11];
        let mut it = vals.iter();
        for j in 0..3 {
            for k in (j + 1)..3 {
                let re = *it.next().unwrap();
                let im = *it.next().unwrap();
                m[(j, k)] = Complex64::new(re, im);
                m[(k, j)] = Complex64::new(re, -im);
            }
        }
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.3, 0.0);
        m[(2, 2)] = Complex64::new(0.2, 0.0);
        // Shrink off-diagonals towards the mixed state until PSD.
        let mixed = DMatrix::<Complex64>::identity(3, 3) / Complex64::new(3.0, 0.0);
        let m = (m + mixed * Complex64::new(2.0, 0.0)) / Complex64::new(3.0, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let basis = gellmann_basis(3).unwrap();
        let r = embed_state(&rho, &basis).unwrap();
        let back = unembed_state(&r, &basis).unwrap();
        let err = (rho.matrix() - back)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round-trip error {err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = DMatrix::<Complex64>::identity(2, 2);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::InvalidState(_))
        ));
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }
}
