//! Measurement and state generators plus multinomial data simulation
//! for coverage and comparison experiments.
//!
//! Everything here is deterministic under a seed; the generator is
//! ChaCha8 and parallel repetitions derive per-repetition streams from
//! the base seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::polytope::{build_polytope, contains, EpsilonSplit};
use crate::quantum::{embed_povm, gellmann_basis, CountVector, DensityMatrix, Povm};

/// Seed for the documented ChaCha8 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream for a derived task (chain, repetition, …).
    pub fn stream(self, idx: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(idx);
        rng
    }
}

/// Named measurement families.
#[derive(Debug, Clone, PartialEq)]
pub enum PovmKind {
    /// Four sub-normalised projectors along regular-tetrahedron Bloch
    /// directions, the first being (0,0,1).
    SicQubit,
    /// The six ±X/±Y/±Z projectors with weight 1/3, ordered
    /// (+x, −x, +y, −y, +z, −z).
    MubQubit,
    /// Four-element qubit POVM with deliberately weak X/Y directions:
    /// η₀=(0,0,1), η₁=(3/10,0,−1/3), η₂=(−3/20,3/20,−1/3),
    /// η₃=(−3/20,−3/20,−1/3), each element (1/4)(1 + η·σ).
    SkewedSicQubit,
    /// Nine-element qutrit SIC from the Weyl-Heisenberg orbit of the
    /// fiducial (0, 1, −1)/√2.
    SicQutrit,
    /// Elementwise tensor products of the factors.
    Tensor(Vec<PovmKind>),
}

/// Named preparations.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    /// s-qubit GHZ state (|0…0⟩ + |1…1⟩)/√2.
    Ghz(usize),
    /// (1−p)|Φ⁺⟩⟨Φ⁺| + p·I/4.
    NoisyBell(f64),
    /// Normalised projector onto the given vector.
    Pure(Vec<Complex64>),
    /// Maximally mixed state of dimension d.
    Mixed(usize),
}

fn pauli() -> [DMatrix<Complex64>; 3] {
    let mut x = DMatrix::<Complex64>::zeros(2, 2);
    x[(0, 1)] = Complex64::new(1.0, 0.0);
    x[(1, 0)] = Complex64::new(1.0, 0.0);
    let mut y = DMatrix::<Complex64>::zeros(2, 2);
    y[(0, 1)] = Complex64::new(0.0, -1.0);
    y[(1, 0)] = Complex64::new(0.0, 1.0);
    let mut z = DMatrix::<Complex64>::zeros(2, 2);
    z[(0, 0)] = Complex64::new(1.0, 0.0);
    z[(1, 1)] = Complex64::new(-1.0, 0.0);
    [x, y, z]
}

fn qubit_element(weight: f64, dir: [f64; 3]) -> DMatrix<Complex64> {
    let [x, y, z] = pauli();
    let mut m = DMatrix::<Complex64>::identity(2, 2);
    m += x * Complex64::new(dir[0], 0.0);
    m += y * Complex64::new(dir[1], 0.0);
    m += z * Complex64::new(dir[2], 0.0);
    m * Complex64::new(weight, 0.0)
}

/// Regular tetrahedron directions with apex (0,0,1).
pub(crate) fn tetrahedron_directions() -> [[f64; 3]; 4] {
    let s8 = (8.0f64).sqrt();
    let s2 = (2.0f64).sqrt();
    let s23 = (2.0f64 / 3.0).sqrt();
    [
        [0.0, 0.0, 1.0],
        [s8 / 3.0, 0.0, -1.0 / 3.0],
        [-s2 / 3.0, s23, -1.0 / 3.0],
        [-s2 / 3.0, -s23, -1.0 / 3.0],
    ]
}

fn sic_qubit_elements() -> Vec<DMatrix<Complex64>> {
    tetrahedron_directions()
        .iter()
        .map(|a| qubit_element(0.25, *a))
        .collect()
}

fn mub_qubit_elements() -> Vec<DMatrix<Complex64>> {
    let mut out = Vec::with_capacity(6);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut dir = [0.0; 3];
            dir[axis] = sign;
            out.push(qubit_element(1.0 / 6.0, dir));
        }
    }
    out
}

fn skewed_sic_elements() -> Vec<DMatrix<Complex64>> {
    // The weight 1/4 makes the four elements a resolution of the
    // identity while keeping the η directions exact.
    [
        [0.0, 0.0, 1.0],
        [0.3, 0.0, -1.0 / 3.0],
        [-0.15, 0.15, -1.0 / 3.0],
        [-0.15, -0.15, -1.0 / 3.0],
    ]
    .iter()
    .map(|a| qubit_element(0.25, *a))
    .collect()
}

fn sic_qutrit_elements() -> Vec<DMatrix<Complex64>> {
    let omega = Complex64::new(-0.5, (3.0f64).sqrt() / 2.0);
    // Shift X|j> = |j+1 mod 3>, clock Z|j> = ω^j |j>.
    let fid = [
        Complex64::new(0.0, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ];
    let mut out = Vec::with_capacity(9);
    for a in 0..3usize {
        for b in 0..3usize {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for (j, f) in fid.iter().enumerate() {
                let phase = omega.powu(((b * j) % 3) as u32);
                v[(j + a) % 3] += f * phase;
            }
            let vec = DVector::from_row_slice(&v);
            out.push(&vec * vec.adjoint() / Complex64::new(3.0, 0.0));
        }
    }
    out
}

fn tensor_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn raw_elements(kind: &PovmKind) -> Result<Vec<DMatrix<Complex64>>> {
    Ok(match kind {
        PovmKind::SicQubit => sic_qubit_elements(),
        PovmKind::MubQubit => mub_qubit_elements(),
        PovmKind::SkewedSicQubit => skewed_sic_elements(),
        PovmKind::SicQutrit => sic_qutrit_elements(),
        PovmKind::Tensor(kinds) => {
            if kinds.is_empty() {
                return Err(Error::InvalidPovm("tensor of zero POVMs".into()));
            }
            let mut acc = raw_elements(&kinds[0])?;
            for k in &kinds[1..] {
                let next = raw_elements(k)?;
                acc = acc
                    .iter()
                    .flat_map(|a| next.iter().map(|b| tensor_product(a, b)))
                    .collect();
            }
            acc
        }
    })
}

/// Construct one of the named POVMs, validated and Bloch-embedded.
pub fn standard_povm(kind: &PovmKind) -> Result<Povm> {
    let elements = raw_elements(kind)?;
    let d = elements[0].nrows();
    let basis = gellmann_basis(d)?;
    embed_povm(elements, &basis)
}

/// Single-qubit projectors P_{axis,±} = (1 ± σ_axis)/2 for X, Y, Z.
fn pauli_projectors() -> [[DMatrix<Complex64>; 2]; 3] {
    let ident = DMatrix::<Complex64>::identity(2, 2);
    pauli().map(|p| {
        [
            (&ident + &p) * Complex64::new(0.5, 0.0),
            (&ident - &p) * Complex64::new(0.5, 0.0),
        ]
    })
}

/// The 2^s projectors of one per-qubit Pauli setting. Settings are
/// base-3 digits over (X, Y, Z), outcomes base-2 with + before −,
/// most-significant digit on the first qubit.
fn setting_projectors(s: usize, setting: usize) -> Vec<DMatrix<Complex64>> {
    let proj = pauli_projectors();
    let outcomes = 2usize.pow(s as u32);
    (0..outcomes)
        .map(|outcome| {
            let mut m = DMatrix::<Complex64>::identity(1, 1);
            for q in 0..s {
                let axis = (setting / 3usize.pow((s - 1 - q) as u32)) % 3;
                let sign = (outcome / 2usize.pow((s - 1 - q) as u32)) % 2;
                m = tensor_product(&m, &proj[axis][sign]);
            }
            m
        })
        .collect()
}

fn check_setting_count(s: usize) -> Result<()> {
    if (1..=5).contains(&s) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(format!(
            "pauli settings need 1 <= s <= 5, got {s}"
        )))
    }
}

/// The 3^s per-qubit Pauli-basis settings folded into a single POVM:
/// every setting contributes its 2^s projectors with weight 1/3^s,
/// giving 6^s elements.
pub fn pauli_settings_povm(s: usize) -> Result<Povm> {
    check_setting_count(s)?;
    let weight = Complex64::new(1.0 / 3f64.powi(s as i32), 0.0);
    let mut elements = Vec::with_capacity(6usize.pow(s as u32));
    for setting in 0..3usize.pow(s as u32) {
        for m in setting_projectors(s, setting) {
            elements.push(m * weight);
        }
    }
    let basis = gellmann_basis(1 << s)?;
    embed_povm(elements, &basis)
}

/// The 3^s per-setting projective POVMs behind `pauli_settings_povm`,
/// each holding its 2^s full-weight projectors. Polytopes built from
/// these combine via `combine_polytopes`, the alternative to folding
/// all settings into one uniformly weighted POVM.
pub fn pauli_setting_povms(s: usize) -> Result<Vec<Povm>> {
    check_setting_count(s)?;
    let basis = gellmann_basis(1 << s)?;
    (0..3usize.pow(s as u32))
        .map(|setting| embed_povm(setting_projectors(s, setting), &basis))
        .collect()
}

/// Construct one of the named states.
pub fn make_state(kind: &StateKind) -> Result<DensityMatrix> {
    match kind {
        StateKind::Ghz(s) => {
            if !(1..=5).contains(s) {
                return Err(Error::InvalidDimension(format!(
                    "GHZ size must be in 1..=5, got {s}"
                )));
            }
            let d = 1usize << s;
            let mut v = DVector::<Complex64>::zeros(d);
            v[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[d - 1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            DensityMatrix::from_pure(&v)
        }
        StateKind::NoisyBell(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::DomainError(format!(
                    "noise parameter {p} outside [0,1]"
                )));
            }
            let bell = make_state(&StateKind::Ghz(2))?;
            let mixed = DMatrix::<Complex64>::identity(4, 4) * Complex64::new(0.25 * p, 0.0);
            let m = bell.matrix() * Complex64::new(1.0 - p, 0.0) + mixed;
            DensityMatrix::new(m)
        }
        StateKind::Pure(v) => {
            let vec = DVector::from_row_slice(v);
            DensityMatrix::from_pure(&vec)
        }
        StateKind::Mixed(d) => DensityMatrix::maximally_mixed(*d),
    }
}

/// Multinomial draw of n outcomes with probabilities tr(E_i ρ),
/// realised as a cascade of conditional binomials.
pub fn sample_counts(
    rho: &DensityMatrix,
    povm: &Povm,
    n: u64,
    seed: RngSeed,
) -> Result<CountVector> {
    if n == 0 {
        return Err(Error::DomainError("n must be >= 1".into()));
    }
    let probs = povm.probabilities(rho)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidPovm(format!(
            "outcome probabilities sum to {total}, not 1"
        )));
    }
    let mut rng = seed.rng();
    Ok(multinomial_with(&mut rng, &probs, n))
}

/// Multinomial cascade reusable with an externally-managed stream.
pub(crate) fn multinomial_with(rng: &mut ChaCha8Rng, probs: &[f64], n: u64) -> CountVector {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass_left: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("q in (0,1)").sample(rng)
        };
        counts[i] = draw;
        remaining -= draw;
        mass_left -= p;
    }
    CountVector::new(counts)
}

/// Hilbert-Schmidt random state: ρ = GG†/tr(GG†) with G a d×d matrix
/// of standard complex Gaussians (partial trace of a Haar-random pure
/// state on a doubled space).
pub fn random_state_hs(d: usize, seed: RngSeed) -> Result<DensityMatrix> {
    let mut rng = seed.rng();
    random_state_hs_with(d, &mut rng)
}

pub(crate) fn random_state_hs_with(d: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d >= 2 required, got {d}")));
    }
    let mut g = DMatrix::<Complex64>::zeros(d, d);
    for z in g.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / Complex64::new(tr, 0.0))
}

/// Empirical coverage of the confidence construction: simulate `reps`
/// data sets from a fixed state, build the polytope each time, and
/// count how often the true state is a member.
pub fn coverage_rate(
    rho: &DensityMatrix,
    povm: &Povm,
    n: u64,
    eps: f64,
    split: &EpsilonSplit,
    reps: u64,
    seed: RngSeed,
) -> Result<f64> {
    use rayon::prelude::*;
    let hits = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<u64> {
            let mut rng = seed.stream(rep);
            let probs = povm.probabilities(rho)?;
            let counts = multinomial_with(&mut rng, &probs, n);
            let poly = build_polytope(povm, &counts, eps, split)?;
            Ok(contains(&poly, rho)? as u64)
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum::<u64>();
    Ok(hits as f64 / reps as f64)
}
