//! Hit-and-run sampling of the confidence region (facets ∩ state body)
//! in Bloch coordinates.
//!
//! Each step draws a uniform direction, intersects the line with every
//! facet and the unit ball analytically, trims the chord to the PSD
//! body by bisection where needed, and then picks a uniform point on
//! the chord. Both trimmed chord ends are verified states, so every
//! point between them is feasible by convexity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::polytope::ConfidencePolytope;
use crate::quantum::{hermitize, is_psd_within, unembed_coords, DensityMatrix, TOL_PSD};
use crate::simulation::RngSeed;

/// Bisection tolerance in the chord line parameter.
const CHORD_TOL: f64 = 1e-10;
/// Chords shorter than this are treated as failed proposals.
const MIN_CHORD: f64 = 1e-14;
/// Consecutive failed proposals before the chain is declared stalled.
const STALL_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            burn_in: 1000,
            thinning: 10,
            chains: 1,
        }
    }
}

/// States drawn from the region, with the options that produced them.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub states: Vec<DensityMatrix>,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    pub chain_count: usize,
}

impl SampleSet {
    /// Bloch coordinates of every sample.
    pub fn bloch(&self, poly: &ConfidencePolytope) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|s| {
                crate::quantum::embed_state(s, poly.basis())
                    .expect("samples share the polytope dimension")
                    .coords()
                    .to_vec()
            })
            .collect()
    }
}

/// A strictly feasible member of the region: the maximally mixed state
/// when it qualifies, otherwise the Chebyshev-centre candidate of the
/// facet system projected onto the state body.
pub fn interior_point(poly: &ConfidencePolytope) -> Result<DensityMatrix> {
    let d = poly.dim();
    let mixed = DensityMatrix::maximally_mixed(d)?;
    if crate::polytope::contains(poly, &mixed)? {
        return Ok(mixed);
    }
    let (center, _radius) = super::chebyshev_center(poly)?;
    let m = unembed_coords(center.coords(), poly.basis());
    if is_psd_within(&m, TOL_PSD) {
        let rho = DensityMatrix::new(hermitize(&m))?;
        if crate::polytope::contains(poly, &rho)? {
            return Ok(rho);
        }
    }
    // Eigenvalue clipping + renormalisation, then verify.
    let projected = project_psd(&m)?;
    if crate::polytope::contains(poly, &projected)? {
        return Ok(projected);
    }
    Err(Error::EmptyRegion(
        "no feasible state found (mixed state and Chebyshev candidate both fail)".into(),
    ))
}

fn project_psd(m: &nalgebra::DMatrix<num_complex::Complex64>) -> Result<DensityMatrix> {
    use num_complex::Complex64;
    let sym = hermitize(m);
    let d = sym.nrows();
    let eig = sym.symmetric_eigen();
    let mut total = 0.0;
    let clipped: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&v| {
            let c = v.max(0.0);
            total += c;
            c
        })
        .collect();
    if total <= 0.0 {
        return Err(Error::EmptyRegion("projection collapsed to zero".into()));
    }
    let mut out = nalgebra::DMatrix::<Complex64>::zeros(d, d);
    for (i, &v) in clipped.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        out += col * col.adjoint() * Complex64::new(v / total, 0.0);
    }
    DensityMatrix::new(hermitize(&out))
}

struct Chain<'a> {
    poly: &'a ConfidencePolytope,
    x: Vec<f64>,
    dim_bloch: usize,
    is_qubit: bool,
    stalls: usize,
}

impl<'a> Chain<'a> {
    fn new(poly: &'a ConfidencePolytope, start: Vec<f64>) -> Self {
        let dim_bloch = poly.dim() * poly.dim() - 1;
        Chain {
            poly,
            x: start,
            dim_bloch,
            is_qubit: poly.dim() == 2,
            stalls: 0,
        }
    }

    fn psd_ok(&self, coords: &[f64]) -> bool {
        if self.is_qubit {
            // For d = 2 the state body is exactly the unit ball.
            coords.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 2.0 * TOL_PSD
        } else {
            is_psd_within(&unembed_coords(coords, self.poly.basis()), TOL_PSD)
        }
    }

    fn point_at(&self, dir: &[f64], t: f64) -> Vec<f64> {
        self.x
            .iter()
            .zip(dir)
            .map(|(xi, ui)| xi + t * ui)
            .collect()
    }

    /// Feasible chord [lo, hi] through the current point along `dir`,
    /// or None when degenerate.
    fn chord(&self, dir: &[f64]) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        // Facets: a·(x + t u) ≤ b.
        for f in self.poly.facets() {
            let au: f64 = f.normal.iter().zip(dir).map(|(a, u)| a * u).sum();
            let slack = f.slack(&self.x);
            if au.abs() < 1e-15 {
                if slack < -crate::polytope::FACET_SLACK {
                    return None;
                }
                continue;
            }
            let t = slack / au;
            if au > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
        }
        // Unit ball |x + t u| ≤ 1 (the state body always lies inside).
        let uu: f64 = dir.iter().map(|u| u * u).sum();
        let xu: f64 = self.x.iter().zip(dir).map(|(x, u)| x * u).sum();
        let xx: f64 = self.x.iter().map(|x| x * x).sum();
        let disc = xu * xu - uu * (xx - 1.0);
        if disc <= 0.0 {
            // Current point on/off the sphere; treat as degenerate.
            if xx > 1.0 + 1e-9 {
                return None;
            }
            return Some((0.0, 0.0));
        }
        let root = disc.sqrt();
        lo = lo.max((-xu - root) / uu);
        hi = hi.min((-xu + root) / uu);
        if !(lo.is_finite() && hi.is_finite()) || hi - lo < MIN_CHORD {
            return None;
        }
        Some((lo, hi))
    }

    /// Shrink a chord end towards 0 (the current feasible point) until
    /// the end state passes the PSD gate.
    fn trim_end(&self, dir: &[f64], t_end: f64) -> f64 {
        if self.psd_ok(&self.point_at(dir, t_end)) {
            return t_end;
        }
        let mut good = 0.0;
        let mut bad = t_end;
        while (bad - good).abs() > CHORD_TOL {
            let mid = 0.5 * (good + bad);
            if self.psd_ok(&self.point_at(dir, mid)) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        loop {
            let mut dir: Vec<f64> = (0..self.dim_bloch)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            for v in &mut dir {
                *v /= norm;
            }
            let chord = self.chord(&dir).map(|(lo, hi)| {
                let lo = if self.is_qubit { lo } else { self.trim_end(&dir, lo) };
                let hi = if self.is_qubit { hi } else { self.trim_end(&dir, hi) };
                (lo, hi)
            });
            match chord {
                Some((lo, hi)) if hi - lo >= MIN_CHORD => {
                    let t = rng.gen_range(lo..hi);
                    self.x = self.point_at(&dir, t);
                    self.stalls = 0;
                    return Ok(());
                }
                _ => {
                    self.stalls += 1;
                    if self.stalls >= STALL_LIMIT {
                        return Err(Error::ChainStall(format!(
                            "{STALL_LIMIT} consecutive degenerate chords"
                        )));
                    }
                }
            }
        }
    }
}

/// Draw `count` states uniformly from the region. Deterministic for a
/// fixed seed; chain c uses stream c of the seed.
pub fn hit_and_run_sample(
    poly: &ConfidencePolytope,
    count: usize,
    seed: RngSeed,
    opts: SamplerOptions,
) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::DomainError("sample count must be >= 1".into()));
    }
    if opts.chains == 0 || opts.thinning == 0 {
        return Err(Error::DomainError(
            "chains and thinning must be >= 1".into(),
        ));
    }
    let start_state = interior_point(poly)?;
    let start = crate::quantum::embed_state(&start_state, poly.basis())?;
    let mut states = Vec::with_capacity(count);
    let base = count / opts.chains;
    let extra = count % opts.chains;
    for c in 0..opts.chains {
        let quota = base + usize::from(c < extra);
        if quota == 0 {
            continue;
        }
        let mut rng = seed.stream(c as u64);
        let mut chain = Chain::new(poly, start.coords().to_vec());
        for _ in 0..opts.burn_in {
            chain.step(&mut rng)?;
        }
        for _ in 0..quota {
            for _ in 0..opts.thinning {
                chain.step(&mut rng)?;
            }
            let m = unembed_coords(&chain.x, poly.basis());
            states.push(DensityMatrix::new(hermitize(&m)).map_err(|e| {
                Error::ChainStall(format!("chain produced invalid state: {e}"))
            })?);
        }
    }
    Ok(SampleSet {
        states,
        seed: seed.0,
        burn_in: opts.burn_in,
        thinning: opts.thinning,
        chain_count: opts.chains,
    })
}
