//! Bayesian credibility of a confidence polytope under the
//! Hilbert-Schmidt prior: the posterior mass outside the region.
//!
//! The posterior μ(ρ) ∝ Π_i tr(E_i ρ)^{n_i} over the flat (HS) measure
//! on the state body is sampled with a Metropolis random walk in Bloch
//! coordinates; the walk never references the polytope, so estimates at
//! matched seeds are pointwise monotone under facet changes. ε̂_b is the
//! out-of-region fraction of the chain with a batch-means standard
//! error.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{build_polytope, ConfidencePolytope, EpsilonSplit};
use crate::quantum::{
    embed_state, is_psd_within, unembed_coords, CountVector, Povm, TOL_PSD,
};
use crate::simulation::{
    multinomial_with, random_state_hs_with, standard_povm, PovmKind, RngSeed,
};

/// Monte-Carlo estimate of the credibility defect ε_b.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CredibilityEstimate {
    pub eps_b_hat: f64,
    pub std_error: f64,
    pub effective_sample_size: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

/// One row of a ratio scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRow {
    pub dim: usize,
    pub n: u64,
    pub rep: usize,
    pub eps: f64,
    pub eps_b_hat: f64,
    pub std_error: f64,
    pub ess: f64,
    /// ε / ε̂_b; infinite when the chain never left the region.
    pub ratio: f64,
    /// Set when the estimate is too degenerate to be meaningful.
    pub degenerate: bool,
}

struct PosteriorWalk<'a> {
    povm: &'a Povm,
    counts: &'a [u64],
    x: Vec<f64>,
    log_like: f64,
    step: f64,
}

impl<'a> PosteriorWalk<'a> {
    fn log_likelihood(povm: &Povm, counts: &[u64], x: &[f64]) -> f64 {
        let d = povm.dim() as f64;
        let mut ll = 0.0;
        for ((m, eta), &n_i) in povm.bloch_params().iter().zip(counts) {
            if n_i == 0 {
                continue;
            }
            let dot: f64 = eta.iter().zip(x).map(|(a, b)| a * b).sum();
            let p = (1.0 + (d - 1.0) * dot) / m;
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += n_i as f64 * p.ln();
        }
        ll
    }

    fn psd_ok(&self, x: &[f64]) -> bool {
        if self.povm.dim() == 2 {
            x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 2.0 * TOL_PSD
        } else {
            is_psd_within(&unembed_coords(x, self.povm.basis()), TOL_PSD)
        }
    }

    /// One Metropolis step; returns whether the proposal was accepted.
    fn step(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let prop: Vec<f64> = self
            .x
            .iter()
            .map(|xi| xi + self.step * rng.sample::<f64, _>(StandardNormal))
            .collect();
        if !self.psd_ok(&prop) {
            return false;
        }
        let ll = Self::log_likelihood(self.povm, self.counts, &prop);
        if ll == f64::NEG_INFINITY {
            return false;
        }
        let log_u = (rng.gen_range(0.0f64..1.0)).max(1e-300).ln();
        if ll - self.log_like > log_u {
            self.x = prop;
            self.log_like = ll;
            true
        } else {
            false
        }
    }
}

/// Posterior mode neighbourhood for the chain start: the embedded MLE
/// pulled slightly towards the mixed state so the walk starts strictly
/// inside the body.
fn chain_start(povm: &Povm, counts: &CountVector) -> Result<Vec<f64>> {
    if counts.total() == 0 {
        // Uniform posterior: start the walk at the mixed state.
        return Ok(vec![0.0; povm.dim() * povm.dim() - 1]);
    }
    let mle = crate::fom::mle_estimate(
        povm,
        counts,
        crate::fom::MleOptions {
            max_iters: 2000,
            tol: 1e-10,
            ..Default::default()
        },
    )?;
    let r = embed_state(&mle.state, povm.basis())?;
    Ok(r.coords().iter().map(|v| v * 0.999).collect())
}

/// Estimate ε_b for `poly` given the data that produced it.
///
/// `mc` is the number of recorded post-burn-in steps (burn-in adds
/// mc/10, capped at 20 000). The walk's step size is tuned towards a
/// ~30% acceptance rate during burn-in and frozen afterwards, so runs
/// are reproducible from the seed alone.
pub fn estimate_credibility(
    poly: &ConfidencePolytope,
    povm: &Povm,
    counts: &CountVector,
    mc: usize,
    seed: RngSeed,
) -> Result<CredibilityEstimate> {
    if mc < 1000 {
        return Err(Error::DomainError(format!(
            "mc = {mc} below the 1000-sample floor"
        )));
    }
    if counts.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} POVM elements",
            counts.len(),
            povm.len()
        )));
    }
    if poly.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "polytope d={} vs POVM d={}",
            poly.dim(),
            povm.dim()
        )));
    }
    let start = chain_start(povm, counts)?;
    let ll = PosteriorWalk::log_likelihood(povm, counts.counts(), &start);
    if ll == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights(
            "posterior vanishes at the chain start".into(),
        ));
    }
    let n = counts.total().max(1) as f64;
    let mut walk = PosteriorWalk {
        povm,
        counts: counts.counts(),
        x: start,
        log_like: ll,
        step: 1.5 / n.sqrt(),
    };
    let mut rng = seed.rng();
    let burn = (mc / 10).clamp(500, 20_000);
    // Step-size adaptation in windows of 200 during burn-in only.
    let mut accepted = 0usize;
    for t in 0..burn {
        if walk.step(&mut rng) {
            accepted += 1;
        }
        if (t + 1) % 200 == 0 {
            let rate = accepted as f64 / 200.0;
            if rate < 0.15 {
                walk.step *= 0.7;
            } else if rate > 0.5 {
                walk.step *= 1.4;
            }
            accepted = 0;
        }
    }
    // Recording phase with batch means for the standard error.
    let batches = 100usize;
    let batch_len = (mc / batches).max(1);
    let recorded = batch_len * batches;
    let mut batch_means = Vec::with_capacity(batches);
    let mut outside_total = 0u64;
    for _ in 0..batches {
        let mut outside = 0u64;
        for _ in 0..batch_len {
            walk.step(&mut rng);
            if !poly.satisfies_facets(&walk.x) {
                outside += 1;
            }
        }
        outside_total += outside;
        batch_means.push(outside as f64 / batch_len as f64);
    }
    let eps_b_hat = outside_total as f64 / recorded as f64;
    let mean: f64 = batch_means.iter().sum::<f64>() / batches as f64;
    let var_bm: f64 = batch_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (batches as f64 - 1.0)
        / batches as f64;
    let std_error = var_bm.sqrt();
    let p_var = eps_b_hat * (1.0 - eps_b_hat);
    let effective_sample_size = if var_bm > 0.0 && p_var > 0.0 {
        (p_var / (var_bm * batches as f64)) * batches as f64
    } else {
        recorded as f64
    };
    Ok(CredibilityEstimate {
        eps_b_hat,
        std_error,
        effective_sample_size,
        mc_samples: recorded,
        seed: seed.0,
    })
}

fn scan_povm(d: usize) -> Result<Povm> {
    match d {
        2 => standard_povm(&PovmKind::SicQubit),
        3 => standard_povm(&PovmKind::SicQutrit),
        4 => standard_povm(&PovmKind::Tensor(vec![
            PovmKind::SicQubit,
            PovmKind::SicQubit,
        ])),
        _ => Err(Error::InvalidDimension(format!(
            "ratio scan supports d in 2..=4, got {d}"
        ))),
    }
}

/// Scatter of ε/ε̂_b over dimensions and data sizes: each row draws a
/// Hilbert-Schmidt random state, simulates counts, builds the ε-level
/// polytope, and estimates its credibility defect.
pub fn ratio_scan(
    dims: &[usize],
    ns: &[u64],
    reps: usize,
    eps: f64,
    mc: usize,
    seed: RngSeed,
) -> Result<Vec<RatioRow>> {
    for &d in dims {
        if d > 4 {
            return Err(Error::InvalidDimension(
                "ratio scan limited to d <= 4".into(),
            ));
        }
    }
    for &n in ns {
        if n > 5000 {
            return Err(Error::DomainError(
                "ratio scan limited to n <= 5000".into(),
            ));
        }
    }
    let mut tasks = Vec::new();
    for (di, &d) in dims.iter().enumerate() {
        for (ni, &n) in ns.iter().enumerate() {
            for rep in 0..reps {
                let stream = ((di * ns.len() + ni) * reps + rep) as u64;
                tasks.push((d, n, rep, stream));
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(d, n, rep, stream)| -> Result<RatioRow> {
            let povm = scan_povm(d)?;
            let mut rng = seed.stream(stream);
            let rho = random_state_hs_with(d, &mut rng)?;
            let probs = povm.probabilities(&rho)?;
            let counts = multinomial_with(&mut rng, &probs, n);
            let poly = build_polytope(&povm, &counts, eps, &EpsilonSplit::Uniform)?;
            let row_seed = RngSeed(seed.0 ^ (0x9e3779b97f4a7c15u64.wrapping_mul(stream + 1)));
            match estimate_credibility(&poly, &povm, &counts, mc, row_seed) {
                Ok(est) => {
                    let degenerate = est.eps_b_hat == 0.0;
                    let ratio = if degenerate {
                        f64::INFINITY
                    } else {
                        eps / est.eps_b_hat
                    };
                    Ok(RatioRow {
                        dim: d,
                        n,
                        rep,
                        eps,
                        eps_b_hat: est.eps_b_hat,
                        std_error: est.std_error,
                        ess: est.effective_sample_size,
                        ratio,
                        degenerate,
                    })
                }
                Err(Error::DegenerateWeights(_)) => Ok(RatioRow {
                    dim: d,
                    n,
                    rep,
                    eps,
                    eps_b_hat: f64::NAN,
                    std_error: f64::NAN,
                    ess: 0.0,
                    ratio: f64::NAN,
                    degenerate: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Prior mass outside the polytope by plain Monte Carlo over HS draws;
/// the n = 0 cross-check for the posterior walk.
pub fn prior_mass_outside(
    poly: &ConfidencePolytope,
    draws: usize,
    seed: RngSeed,
) -> Result<(f64, f64)> {
    let mut rng = seed.rng();
    let mut outside = 0u64;
    for _ in 0..draws {
        let rho = random_state_hs_with(poly.dim(), &mut rng)?;
        let r = embed_state(&rho, poly.basis())?;
        if !poly.satisfies_facets(r.coords()) {
            outside += 1;
        }
    }
    let p = outside as f64 / draws as f64;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    Ok((p, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::trivial_polytope;
    use crate::quantum::DensityMatrix;
    use crate::simulation::sample_counts;

    fn sic_counts(n: u64, seed: u64) -> (Povm, CountVector, DensityMatrix) {
        let povm = standard_povm(&PovmKind::SicQubit).unwrap();
        let rho = random_state_hs(2, RngSeed(seed)).unwrap();
        let counts = sample_counts(&rho, &povm, n, RngSeed(seed + 1)).unwrap();
        (povm, counts, rho)
    }

    use crate::simulation::random_state_hs;

    #[test]
    fn full_state_space_has_zero_defect() {
        let (povm, counts, _) = sic_counts(500, 10);
        let poly = trivial_polytope(povm.basis(), 0.01);
        let est = estimate_credibility(&poly, &povm, &counts, 2000, RngSeed(1)).unwrap();
        assert_eq!(est.eps_b_hat, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn excluding_region_has_defect_one() {
        let (povm, counts, _) = sic_counts(500, 11);
        let poly = build_polytope(&povm, &counts, 0.01, &EpsilonSplit::Uniform).unwrap();
        let tiny: Vec<_> = poly
            .facets()
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.offset = -0.999; // tr(E σ) ≤ tiny: excludes all states
                f
            })
            .collect();
        let poly = crate::polytope::replace_facets_for_tests(&poly, tiny);
        let est = estimate_credibility(&poly, &povm, &counts, 2000, RngSeed(2)).unwrap();
        assert_eq!(est.eps_b_hat, 1.0);
    }

    #[test]
    fn qubit_ratio_is_order_ten() {
        let (povm, counts, _) = sic_counts(1000, 12);
        let poly = build_polytope(&povm, &counts, 0.01, &EpsilonSplit::Uniform).unwrap();
        let est = estimate_credibility(&poly, &povm, &counts, 40_000, RngSeed(3)).unwrap();
        assert!(est.eps_b_hat > 0.0, "defect estimate vanished");
        let ratio = 0.01 / est.eps_b_hat;
        assert!(
            (1.0..=100.0).contains(&ratio),
            "ratio {ratio} outside [1, 100]"
        );
    }

    #[test]
    fn monotone_under_facet_tightening() {
        // Shrinking every offset on common random numbers can only move
        // chain points out of the region.
        let (povm, counts, _) = sic_counts(800, 13);
        let poly = build_polytope(&povm, &counts, 0.01, &EpsilonSplit::Uniform).unwrap();
        let shrunk: Vec<_> = poly
            .facets()
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.offset *= 0.9;
                f.offset -= 0.01;
                f
            })
            .collect();
        let tight = crate::polytope::replace_facets_for_tests(&poly, shrunk);
        let a = estimate_credibility(&poly, &povm, &counts, 5000, RngSeed(4)).unwrap();
        let b = estimate_credibility(&tight, &povm, &counts, 5000, RngSeed(4)).unwrap();
        assert!(b.eps_b_hat >= a.eps_b_hat);
    }

    #[test]
    fn uniform_posterior_matches_prior_mass() {
        // n = 0 data: the walk samples the flat prior; compare with
        // plain Monte Carlo.
        let povm = standard_povm(&PovmKind::SicQubit).unwrap();
        let counts = CountVector::new(vec![0, 0, 0, 0]);
        // A fixed box-ish polytope around the origin.
        let data = sample_counts(
            &DensityMatrix::maximally_mixed(2).unwrap(),
            &povm,
            200,
            RngSeed(5),
        )
        .unwrap();
        let poly = build_polytope(&povm, &data, 0.05, &EpsilonSplit::Uniform).unwrap();
        let est = estimate_credibility(&poly, &povm, &counts, 60_000, RngSeed(6)).unwrap();
        let (plain, se) = prior_mass_outside(&poly, 60_000, RngSeed(7)).unwrap();
        let tol = 3.0 * (se * se + est.std_error * est.std_error).sqrt().max(1e-3);
        assert!(
            (est.eps_b_hat - plain).abs() < tol,
            "walk {} vs plain {} (tol {tol})",
            est.eps_b_hat,
            plain
        );
    }

    #[test]
    fn scan_produces_expected_rows() {
        let rows = ratio_scan(&[2], &[300], 3, 0.05, 2000, RngSeed(8)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!(r.dim, 2);
            assert_eq!(r.n, 300);
            assert!(r.eps_b_hat.is_nan() || r.eps_b_hat >= 0.0);
        }
        assert!(ratio_scan(&[7], &[100], 1, 0.05, 2000, RngSeed(9)).is_err());
        assert!(ratio_scan(&[2], &[100_000], 1, 0.05, 2000, RngSeed(9)).is_err());
    }

    #[test]
    fn rejects_small_mc() {
        let (povm, counts, _) = sic_counts(100, 14);
        let poly = build_polytope(&povm, &counts, 0.01, &EpsilonSplit::Uniform).unwrap();
        assert!(matches!(
            estimate_credibility(&poly, &povm, &counts, 10, RngSeed(1)),
            Err(Error::DomainError(_))
        ));
    }
}
