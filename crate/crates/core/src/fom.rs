//! Scalar figures of merit on states — fidelity, trace distance,
//! negativity — a maximum-likelihood reference estimate, and
//! confidence intervals for these functionals over a polytope.

use nalgebra::DMatrix;
use num_complex::Complex64;
use crate::error::{Error, Result};
use crate::geometry::{hit_and_run_sample, SamplerOptions};
use crate::polytope::ConfidencePolytope;
use crate::quantum::{
    born_probability, hermitian_eigenvalues, hermitize, CountVector, DensityMatrix, Povm,
};
use crate::simulation::RngSeed;

/// Eigenvalue clipping threshold for matrix square roots.
const SQRT_CLIP: f64 = 1e-12;

/// Which functional to bound over the region.
#[derive(Debug, Clone)]
pub enum FomSpec {
    Fidelity { reference: DensityMatrix },
    TraceDistance { reference: DensityMatrix },
    Negativity { dims: Vec<usize>, cut: usize },
}

impl FomSpec {
    pub fn name(&self) -> &'static str {
        match self {
            FomSpec::Fidelity { .. } => "fidelity",
            FomSpec::TraceDistance { .. } => "trace_distance",
            FomSpec::Negativity { .. } => "negativity",
        }
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            FomSpec::Fidelity { reference } => fidelity(rho, reference),
            FomSpec::TraceDistance { reference } => trace_distance(rho, reference),
            FomSpec::Negativity { dims, cut } => negativity(rho, dims, *cut),
        }
    }
}

/// Confidence interval for a figure of merit, estimated as the min/max
/// over a uniform sample of the region.
#[derive(Debug, Clone)]
pub struct FomInterval {
    pub name: String,
    /// Reference state for fidelity/trace-distance intervals.
    pub reference: Option<DensityMatrix>,
    /// (subsystem dims, cut index) for negativity intervals.
    pub bipartition: Option<(Vec<usize>, usize)>,
    pub lower: f64,
    pub upper: f64,
    pub sample_count: usize,
    pub seed: u64,
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states have d={} and d={}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Principal square root of a Hermitian PSD matrix, eigenvalues
/// clipped at zero.
fn sqrtm_psd(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        let s = if v > SQRT_CLIP { v.sqrt() } else { 0.0 };
        let col = eig.eigenvectors.column(i);
        out += col * col.adjoint() * Complex64::new(s, 0.0);
    }
    out
}

/// Uhlmann fidelity F = (tr √(√ρ σ √ρ))². For a pure reference this
/// reduces to ⟨ψ|ρ|ψ⟩ = tr(ρσ), which is used directly.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    if sigma.purity() > 1.0 - 1e-9 || rho.purity() > 1.0 - 1e-9 {
        let f = crate::quantum::trace_product_re(rho.matrix(), sigma.matrix());
        return Ok(f.clamp(0.0, 1.0));
    }
    let root = sqrtm_psd(rho.matrix());
    let inner = &root * sigma.matrix() * &root;
    let eigs = hermitian_eigenvalues(&hermitize(&inner));
    let tr: f64 = eigs.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Trace distance T = ½ Σ |eig(ρ − σ)|.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let eigs = hermitian_eigenvalues(&diff);
    Ok(0.5 * eigs.iter().map(|v| v.abs()).sum::<f64>())
}

/// Partial transpose over the subsystems at positions >= `cut` of the
/// factorisation `dims`.
fn partial_transpose(
    m: &DMatrix<Complex64>,
    dims: &[usize],
    cut: usize,
) -> DMatrix<Complex64> {
    let da: usize = dims[..cut].iter().product();
    let db: usize = dims[cut..].iter().product();
    let mut out = DMatrix::<Complex64>::zeros(da * db, da * db);
    for ia in 0..da {
        for ib in 0..db {
            for ja in 0..da {
                for jb in 0..db {
                    // (ia,ib),(ja,jb) -> (ia,jb),(ja,ib)
                    out[(ia * db + jb, ja * db + ib)] = m[(ia * db + ib, ja * db + jb)];
                }
            }
        }
    }
    out
}

/// Negativity (‖ρ^{T_B}‖₁ − 1)/2 for the bipartition `dims[..cut]` vs
/// `dims[cut..]`.
pub fn negativity(rho: &DensityMatrix, dims: &[usize], cut: usize) -> Result<f64> {
    let product: usize = dims.iter().product();
    if product != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not factor d={}",
            rho.dim()
        )));
    }
    if cut == 0 || cut >= dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "cut {cut} outside 1..{}",
            dims.len()
        )));
    }
    let pt = partial_transpose(rho.matrix(), dims, cut);
    let eigs = hermitian_eigenvalues(&pt);
    let trace_norm: f64 = eigs.iter().map(|v| v.abs()).sum();
    Ok(((trace_norm - 1.0) / 2.0).max(0.0))
}

/// Options for the iterative maximum-likelihood estimate.
#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    pub max_iters: usize,
    /// Stop when the log-likelihood gain drops below this.
    pub tol: f64,
    /// Mixing weight towards the maximally mixed state when an outcome
    /// with counts lands on zero probability.
    pub regularization: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iters: 100_000,
            tol: 1e-12,
            regularization: 1e-6,
        }
    }
}

/// Result of the fixed-point ascent, with its diagnostics.
#[derive(Debug, Clone)]
pub struct MleResult {
    pub state: DensityMatrix,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub converged: bool,
}

fn log_likelihood(povm: &Povm, counts: &CountVector, rho: &DensityMatrix) -> Result<f64> {
    let mut ll = 0.0;
    for (e, &n_i) in povm.elements().iter().zip(counts.counts()) {
        if n_i == 0 {
            continue;
        }
        let p = born_probability(rho, e)?;
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        ll += n_i as f64 * p.ln();
    }
    Ok(ll)
}

fn r_operator(povm: &Povm, counts: &CountVector, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
    let d = povm.dim();
    let n = counts.total() as f64;
    let mut r = DMatrix::<Complex64>::zeros(d, d);
    for (e, &n_i) in povm.elements().iter().zip(counts.counts()) {
        if n_i == 0 {
            continue;
        }
        let p = born_probability(rho, e)?;
        if p <= 0.0 {
            return Err(Error::DomainError(
                "zero probability with nonzero count".into(),
            ));
        }
        r += e * Complex64::new(n_i as f64 / (n * p), 0.0);
    }
    Ok(r)
}

fn normalized(m: DMatrix<Complex64>) -> Result<DensityMatrix> {
    let tr = m.trace().re;
    if tr <= 0.0 {
        return Err(Error::DomainError("iterate lost positivity".into()));
    }
    DensityMatrix::new(hermitize(&(m / Complex64::new(tr, 0.0))))
}

/// Iterative ρ ← N[R(ρ) ρ R(ρ)] ascent with R(ρ) = Σ n_i/(n tr(E_iρ)) E_i.
/// A diluted step (I + κR)/(1+κ) replaces any full step that would
/// lower the log-likelihood, so the likelihood sequence is
/// non-decreasing.
pub fn mle_estimate(povm: &Povm, counts: &CountVector, opts: MleOptions) -> Result<MleResult> {
    if counts.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} POVM elements",
            counts.len(),
            povm.len()
        )));
    }
    if counts.total() == 0 {
        return Err(Error::DomainError("no counts".into()));
    }
    let d = povm.dim();
    let mut rho = DensityMatrix::maximally_mixed(d)?;
    let mut ll = log_likelihood(povm, counts, &rho)?;
    let mixed = DensityMatrix::maximally_mixed(d)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        // Regularise away from singular iterates.
        if r_operator(povm, counts, &rho).is_err() {
            let g = opts.regularization;
            let m = rho.matrix() * Complex64::new(1.0 - g, 0.0)
                + mixed.matrix() * Complex64::new(g, 0.0);
            rho = DensityMatrix::new(m)?;
            ll = log_likelihood(povm, counts, &rho)?;
            continue;
        }
        let r = r_operator(povm, counts, &rho)?;
        let full = normalized(&r * rho.matrix() * &r)?;
        let full_ll = log_likelihood(povm, counts, &full)?;
        let (next, next_ll) = if full_ll >= ll {
            (full, full_ll)
        } else {
            // Diluted ascent step.
            let ident = DMatrix::<Complex64>::identity(d, d);
            let mut kappa = 0.5;
            let mut chosen = None;
            while kappa > 1e-8 {
                let rk = (&ident + &r * Complex64::new(kappa, 0.0))
                    / Complex64::new(1.0 + kappa, 0.0);
                let cand = normalized(&rk * rho.matrix() * &rk)?;
                let cand_ll = log_likelihood(povm, counts, &cand)?;
                if cand_ll >= ll {
                    chosen = Some((cand, cand_ll));
                    break;
                }
                kappa *= 0.5;
            }
            match chosen {
                Some(pair) => pair,
                None => {
                    // No ascent direction left: stationary.
                    converged = true;
                    break;
                }
            }
        };
        let gain = next_ll - ll;
        rho = next;
        ll = next_ll;
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(MleResult {
        state: rho,
        iterations,
        log_likelihood: ll,
        converged,
    })
}

/// Confidence interval of a figure of merit over the region: empirical
/// min/max over a uniform sample. A region pinned to a single state
/// (inscribed-ball radius ~ 0) is evaluated there directly.
pub fn fom_interval(
    poly: &ConfidencePolytope,
    spec: &FomSpec,
    samples: usize,
    seed: RngSeed,
    opts: SamplerOptions,
) -> Result<FomInterval> {
    use rayon::prelude::*;
    if let Ok((_, radius)) = crate::geometry::chebyshev_center(poly) {
        if radius <= 1e-10 {
            let point = crate::geometry::interior_point(poly)?;
            let value = spec.evaluate(&point)?;
            let (reference, bipartition) = match spec {
                FomSpec::Fidelity { reference } | FomSpec::TraceDistance { reference } => {
                    (Some(reference.clone()), None)
                }
                FomSpec::Negativity { dims, cut } => (None, Some((dims.clone(), *cut))),
            };
            return Ok(FomInterval {
                name: spec.name().to_string(),
                reference,
                bipartition,
                lower: value,
                upper: value,
                sample_count: 1,
                seed: seed.0,
            });
        }
    }
    let set = hit_and_run_sample(poly, samples, seed, opts)?;
    let values = set
        .states
        .par_iter()
        .map(|s| spec.evaluate(s))
        .collect::<Result<Vec<_>>>()?;
    let lower = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (reference, bipartition) = match spec {
        FomSpec::Fidelity { reference } | FomSpec::TraceDistance { reference } => {
            (Some(reference.clone()), None)
        }
        FomSpec::Negativity { dims, cut } => (None, Some((dims.clone(), *cut))),
    };
    Ok(FomInterval {
        name: spec.name().to_string(),
        reference,
        bipartition,
        lower,
        upper,
        sample_count: samples,
        seed: seed.0,
    })
}
