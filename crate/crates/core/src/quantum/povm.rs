use nalgebra::DMatrix;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quantum::state::{
    embedding_scale, min_eigenvalue, trace_product_re, DensityMatrix, TOL_HERM, TOL_PSD,
};
use crate::quantum::HermitianBasis;

/// Positive-operator valued measure with cached Bloch parametrisation
/// E_i = (1/m_i)(1 + √(d(d−1)/2) η_i·λ).
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<DMatrix<Complex64>>,
    /// (m_i, η_i) per element, with Σ 1/m_i = 1.
    bloch_params: Vec<(f64, Vec<f64>)>,
    basis: HermitianBasis,
}

/// Outcome tallies aligned with a POVM's element order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        CountVector { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Bloch parameters (m, η) of a single PSD element with positive trace.
pub(crate) fn bloch_of_element(
    e: &DMatrix<Complex64>,
    basis: &HermitianBasis,
) -> Result<(f64, Vec<f64>)> {
    let d = basis.dim();
    let tr = e.trace().re;
    if tr < TOL_HERM {
        return Err(Error::InvalidPovm(format!(
            "element trace {tr:.3e} too small to parametrise"
        )));
    }
    let m = d as f64 / tr;
    let scale = m / (2.0 * embedding_scale(d));
    let eta = basis
        .elements()
        .iter()
        .map(|lam| trace_product_re(e, lam) * scale)
        .collect();
    Ok((m, eta))
}

/// Validate raw elements and cache their Bloch parametrisation.
pub fn embed_povm(elements: Vec<DMatrix<Complex64>>, basis: &HermitianBasis) -> Result<Povm> {
    let d = basis.dim();
    if elements.is_empty() {
        return Err(Error::InvalidPovm("no elements".into()));
    }
    let mut sum = DMatrix::<Complex64>::zeros(d, d);
    for (i, e) in elements.iter().enumerate() {
        if e.nrows() != d || e.ncols() != d {
            return Err(Error::InvalidPovm(format!(
                "element {i} is {}x{}, expected {d}x{d}",
                e.nrows(),
                e.ncols()
            )));
        }
        let herm = (e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > TOL_HERM {
            return Err(Error::InvalidPovm(format!("element {i} not Hermitian")));
        }
        let min_eig = min_eigenvalue(e);
        if min_eig < -TOL_PSD {
            return Err(Error::InvalidPovm(format!(
                "element {i} not PSD: min eigenvalue {min_eig:.3e}"
            )));
        }
        sum += e;
    }
    let ident_defect = (&sum - DMatrix::<Complex64>::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if ident_defect > 1e-9 {
        return Err(Error::InvalidPovm(format!(
            "elements sum to identity only within {ident_defect:.3e}"
        )));
    }
    let bloch_params = elements
        .iter()
        .map(|e| bloch_of_element(e, basis))
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm {
        dim: d,
        elements,
        bloch_params,
        basis: basis.clone(),
    })
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.dim
    }

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

    /// Cached (m_i, η_i) pairs.
    pub fn bloch_params(&self) -> &[(f64, Vec<f64>)] {
        &self.bloch_params
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    /// Outcome probabilities tr(E_i ρ) for a state.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| born_probability(rho, e))
            .collect()
    }

    /// A POVM is informationally complete when the affine span of its
    /// elements is the full Hermitian space, i.e. the (1/m_i, η_i) rows
    /// have rank d².
    pub fn is_informationally_complete(&self) -> bool {
        let d2 = self.dim * self.dim;
        let k = self.len();
        if k < d2 {
            return false;
        }
        let cols = d2;
        let mut rows = DMatrix::<f64>::zeros(k, cols);
        for (i, (m, eta)) in self.bloch_params.iter().enumerate() {
            rows[(i, 0)] = 1.0 / m;
            for (j, v) in eta.iter().enumerate() {
                rows[(i, j + 1)] = *v;
            }
        }
        rows.svd(false, false).rank(1e-9) == d2
    }

    /// SHA-256 over a canonical byte rendering of the elements; used to
    /// tie polytopes back to the measurement that produced them.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim as u64).to_le_bytes());
        for e in &self.elements {
            for z in e.iter() {
                hasher.update(z.re.to_le_bytes());
                hasher.update(z.im.to_le_bytes());
            }
        }
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Born-rule probability tr(Eρ), τ-policed into [0, 1].
pub fn born_probability(rho: &DensityMatrix, e: &DMatrix<Complex64>) -> Result<f64> {
    if e.nrows() != rho.dim() || e.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "element {}x{} vs state d={}",
            e.nrows(),
            e.ncols(),
            rho.dim()
        )));
    }
    let p = trace_product_re(e, rho.matrix());
    if !(-TOL_PSD..=1.0 + TOL_PSD).contains(&p) {
        return Err(Error::DomainError(format!(
            "Born probability {p} outside [0,1] beyond tolerance"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gellmann_basis;
    use crate::simulation::{standard_povm, PovmKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sic_qubit_parameters() {
        let povm = standard_povm(&PovmKind::SicQubit).unwrap();
        assert_eq!(povm.len(), 4);
        let mut eta_sum = [0.0; 3];
        for (m, eta) in povm.bloch_params() {
            assert_abs_diff_eq!(*m, 4.0, epsilon = 1e-12);
            let norm: f64 = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            for (s, v) in eta_sum.iter_mut().zip(eta) {
                *s += v;
            }
        }
        assert!(eta_sum.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn mub_qubit_parameters() {
        let povm = standard_povm(&PovmKind::MubQubit).unwrap();
        assert_eq!(povm.len(), 6);
        for (i, (m, eta)) in povm.bloch_params().iter().enumerate() {
            assert_abs_diff_eq!(*m, 6.0, epsilon = 1e-12);
            let axis = i / 2;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for (j, v) in eta.iter().enumerate() {
                let want = if j == axis { sign } else { 0.0 };
                assert_abs_diff_eq!(*v, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_element_identity_povm() {
        let basis = gellmann_basis(2).unwrap();
        let povm = embed_povm(vec![DMatrix::<Complex64>::identity(2, 2)], &basis).unwrap();
        let (m, eta) = &povm.bloch_params()[0];
        assert_abs_diff_eq!(*m, 1.0, epsilon = 1e-14);
        assert!(eta.iter().all(|v| v.abs() < 1e-14));
        assert!(!povm.is_informationally_complete());
    }

    #[test]
    fn weight_sum_and_reconstruction() {
        for kind in [PovmKind::SicQubit, PovmKind::MubQubit, PovmKind::SkewedSicQubit] {
            let povm = standard_povm(&kind).unwrap();
            let inv_sum: f64 = povm.bloch_params().iter().map(|(m, _)| 1.0 / m).sum();
            assert_abs_diff_eq!(inv_sum, 1.0, epsilon = 1e-10);
            // Entrywise reconstruction from (m, η).
            let basis = povm.basis();
            let c = embedding_scale(povm.dim());
            for (e, (m, eta)) in povm.elements().iter().zip(povm.bloch_params()) {
                let mut rec = DMatrix::<Complex64>::identity(povm.dim(), povm.dim());
                for (v, lam) in eta.iter().zip(basis.elements()) {
                    rec += lam * Complex64::new(c * v, 0.0);
                }
                rec /= Complex64::new(*m, 0.0);
                let err = (e - rec).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "reconstruction error {err}");
            }
        }
    }

    #[test]
    fn rejects_invalid_element_sets() {
        let basis = gellmann_basis(2).unwrap();
        // Sum != identity.
        let half = DMatrix::<Complex64>::identity(2, 2) * Complex64::new(0.4, 0.0);
        assert!(matches!(
            embed_povm(vec![half.clone(), half.clone()], &basis),
            Err(Error::InvalidPovm(_))
        ));
        // Non-PSD element.
        let mut neg = DMatrix::<Complex64>::zeros(2, 2);
        neg[(0, 0)] = Complex64::new(1.2, 0.0);
        neg[(1, 1)] = Complex64::new(-0.2, 0.0);
        let mut comp = DMatrix::<Complex64>::identity(2, 2);
        comp -= &neg;
        assert!(matches!(
            embed_povm(vec![neg, comp], &basis),
            Err(Error::InvalidPovm(_))
        ));
    }

    #[test]
    fn born_probability_values() {
        let basis = gellmann_basis(2).unwrap();
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let povm = standard_povm(&PovmKind::MubQubit).unwrap();
        for e in povm.elements() {
            assert_abs_diff_eq!(
                born_probability(&rho, e).unwrap(),
                e.trace().re / 2.0,
                epsilon = 1e-14
            );
        }
        // |0><0| against (1/6)(1 + σ_z) -> 1/3.
        let mut ket0 = DMatrix::<Complex64>::zeros(2, 2);
        ket0[(0, 0)] = Complex64::new(1.0, 0.0);
        let rho0 = DensityMatrix::new(ket0).unwrap();
        let mut e = DMatrix::<Complex64>::zeros(2, 2);
        e[(0, 0)] = Complex64::new(1.0 / 3.0, 0.0);
        let p = born_probability(&rho0, &e).unwrap();
        assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-14);
        let _ = basis;
    }

    #[test]
    fn born_probability_polices_range() {
        // tr(Eρ) beyond [−τ, 1+τ] is rejected rather than clamped.
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let double = DMatrix::<Complex64>::identity(2, 2) * Complex64::new(2.0, 0.0);
        assert!(matches!(
            born_probability(&rho, &double),
            Err(Error::DomainError(_))
        ));
        let wrong_dim = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(
            born_probability(&rho, &wrong_dim),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn born_matches_bloch_form() {
        // (1/m_i)(1 + (d−1) r·η_i) equals tr(E_i ρ) for random-ish states.
        use crate::quantum::{embed_state, unembed_state, BlochVector};
        let povm = standard_povm(&PovmKind::SkewedSicQubit).unwrap();
        let basis = povm.basis().clone();
        for t in 0..20 {
            let s = 0.9 * (t as f64 / 20.0);
            let ang = 2.399963 * t as f64;
            let r = BlochVector::new(
                2,
                vec![s * ang.cos() * 0.7, s * ang.sin() * 0.7, s * 0.4 - 0.2],
            )
            .unwrap();
            let rho = DensityMatrix::new(unembed_state(&r, &basis).unwrap()).unwrap();
            let rr = embed_state(&rho, &basis).unwrap();
            for (e, (m, eta)) in povm.elements().iter().zip(povm.bloch_params()) {
                let dot: f64 = rr.coords().iter().zip(eta).map(|(a, b)| a * b).sum();
                let bloch_form = (1.0 + (povm.dim() as f64 - 1.0) * dot) / m;
                let born = born_probability(&rho, e).unwrap();
                assert!((bloch_form - born).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let povm = standard_povm(&PovmKind::SicQubit).unwrap();
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let total: f64 = povm.probabilities(&rho).unwrap().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }
}
