//! Cross-module flows: simulate data, build regions, query geometry,
//! and report figure-of-merit intervals.

use tomopoly::fom::{fom_interval, mle_estimate, FomSpec, MleOptions};
use tomopoly::geometry::{bounding_box, hit_and_run_sample, SamplerOptions};
use tomopoly::polytope::{
    build_polytope, build_polytope_with_groups, combine_polytopes, contains, group_facets,
    split_epsilon, EpsilonSplit,
};
use tomopoly::quantum::{embed_state, unembed_state, BlochVector, DensityMatrix};
use tomopoly::simulation::{
    coverage_rate, make_state, sample_counts, standard_povm, PovmKind, RngSeed, StateKind,
};

fn state_from_bloch(coords: Vec<f64>) -> DensityMatrix {
    let basis = tomopoly::quantum::gellmann_basis(2).unwrap();
    let r = BlochVector::new(2, coords).unwrap();
    DensityMatrix::new(unembed_state(&r, &basis).unwrap()).unwrap()
}

#[test]
fn sic_coverage_small_scale() {
    let povm = standard_povm(&PovmKind::SicQubit).unwrap();
    let rho = state_from_bloch(vec![0.0, 0.0, 0.5]);
    let rate = coverage_rate(
        &rho,
        &povm,
        200,
        0.1,
        &EpsilonSplit::Uniform,
        400,
        RngSeed(100),
    )
    .unwrap();
    let sigma = (0.1f64 * 0.9 / 400.0).sqrt();
    assert!(rate >= 0.9 - 3.0 * sigma, "coverage {rate}");
}

#[test]
fn grouped_coverage_small_scale() {
    let povm = standard_povm(&PovmKind::SicQubit).unwrap();
    let rho = state_from_bloch(vec![0.2, -0.1, 0.3]);
    let groups: Vec<Vec<usize>> = vec![
        vec![0, 1],
        vec![2, 3],
        vec![0, 2],
        vec![1, 3],
        vec![0, 3],
        vec![1, 2],
    ];
    let mut hits = 0;
    let reps = 300;
    for rep in 0..reps {
        let counts = sample_counts(&rho, &povm, 300, RngSeed(40_000 + rep)).unwrap();
        let poly =
            build_polytope_with_groups(&povm, &counts, 0.05, &EpsilonSplit::Uniform, &groups)
                .unwrap();
        assert_eq!(poly.facets().len(), 10);
        if contains(&poly, &rho).unwrap() {
            hits += 1;
        }
    }
    let rate = hits as f64 / reps as f64;
    let sigma = (0.05f64 * 0.95 / reps as f64).sqrt();
    assert!(rate >= 0.95 - 3.0 * sigma, "grouped coverage {rate}");
}

#[test]
fn added_facets_never_enlarge_the_region() {
    // Sampling the extended region and checking membership in the base
    // region exercises the set-inclusion direction of refinement.
    let povm = standard_povm(&PovmKind::SicQubit).unwrap();
    let rho = state_from_bloch(vec![0.1, 0.2, -0.2]);
    let counts = sample_counts(&rho, &povm, 1500, RngSeed(7)).unwrap();
    let base = build_polytope(&povm, &counts, 0.01, &EpsilonSplit::Uniform).unwrap();
    let groups: Vec<Vec<usize>> = vec![vec![0, 1], vec![2, 3], vec![0, 2]];
    let budget = split_epsilon(0.003, 3, &EpsilonSplit::Uniform).unwrap();
    let extra = group_facets(&povm, &counts, &groups, &budget).unwrap();
    let refined = base.extended_with(extra);
    assert!((refined.epsilon_total() - 0.013).abs() < 1e-12);
    let set = hit_and_run_sample(
        &refined,
        300,
        RngSeed(17),
        SamplerOptions {
            burn_in: 300,
            thinning: 3,
            chains: 1,
        },
    )
    .unwrap();
    for s in &set.states {
        assert!(contains(&base, s).unwrap());
    }
}

#[test]
fn noisy_bell_interval_flow() {
    // Two-qubit flow in the 15-dimensional Bloch space: SIC ⊗ SIC data
    // from a noisy Bell state; the fidelity interval must be a strict
    // subinterval of [0,1] containing the truth.
    let povm = standard_povm(&PovmKind::Tensor(vec![
        PovmKind::SicQubit,
        PovmKind::SicQubit,
    ]))
    .unwrap();
    let truth = make_state(&StateKind::NoisyBell(0.1)).unwrap();
    let counts = sample_counts(&truth, &povm, 10_000, RngSeed(55)).unwrap();
    let poly = build_polytope(&povm, &counts, 0.001, &EpsilonSplit::Uniform).unwrap();
    let bell = make_state(&StateKind::Ghz(2)).unwrap();
    let spec = FomSpec::Fidelity {
        reference: bell.clone(),
    };
    let iv = fom_interval(
        &poly,
        &spec,
        2000,
        RngSeed(56),
        SamplerOptions {
            burn_in: 500,
            thinning: 5,
            chains: 1,
        },
    )
    .unwrap();
    let true_val = spec.evaluate(&truth).unwrap();
    assert!(iv.lower > 0.0 && iv.upper < 1.0);
    assert!(
        iv.lower <= true_val && true_val <= iv.upper,
        "[{}, {}] misses {true_val}",
        iv.lower,
        iv.upper
    );
    // Negativity interval on the same region.
    let neg = FomSpec::Negativity {
        dims: vec![2, 2],
        cut: 1,
    };
    let iv2 = fom_interval(
        &poly,
        &neg,
        2000,
        RngSeed(57),
        SamplerOptions {
            burn_in: 500,
            thinning: 5,
            chains: 1,
        },
    )
    .unwrap();
    let true_neg = neg.evaluate(&truth).unwrap();
    assert!(iv2.lower <= true_neg && true_neg <= iv2.upper);
    // MLE reference converges and sits inside the region.
    let mle = mle_estimate(&povm, &counts, MleOptions::default()).unwrap();
    assert!(mle.converged);
    assert!(contains(&poly, &mle.state).unwrap());
}

#[test]
fn box_shrinks_with_more_data() {
    // Median bounding-box edge at n = 10⁵ is below the n = 10³ median.
    let povm = standard_povm(&PovmKind::SicQubit).unwrap();
    let rho = state_from_bloch(vec![0.1, -0.1, 0.25]);
    let medians: Vec<f64> = [1000u64, 100_000]
        .iter()
        .map(|&n| {
            let mut edges: Vec<f64> = (0..20)
                .map(|rep| {
                    let counts =
                        sample_counts(&rho, &povm, n, RngSeed(9000 + rep)).unwrap();
                    let poly =
                        build_polytope(&povm, &counts, 0.01, &EpsilonSplit::Uniform).unwrap();
                    let bb = bounding_box(&poly).unwrap();
                    bb.edge_lengths().iter().cloned().fold(0.0, f64::max)
                })
                .collect();
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges[10]
        })
        .collect();
    assert!(
        medians[1] < medians[0],
        "edge medians {medians:?} not decreasing"
    );
}

#[test]
fn combining_axis_measurements_tightens_weak_directions() {
    let skewed = standard_povm(&PovmKind::SkewedSicQubit).unwrap();
    let rho = state_from_bloch(vec![0.15, -0.2, 0.3]);
    let counts = sample_counts(&rho, &skewed, 5000, RngSeed(31)).unwrap();
    let base = build_polytope(&skewed, &counts, 0.001, &EpsilonSplit::Uniform).unwrap();
    let bb_before = bounding_box(&base).unwrap();

    let basis = tomopoly::quantum::gellmann_basis(2).unwrap();
    let mut polys = vec![base];
    for axis in 0..2 {
        let lam = basis.element(axis);
        let ident = nalgebra::DMatrix::<num_complex::Complex64>::identity(2, 2);
        let plus = (&ident + lam) * num_complex::Complex64::new(0.5, 0.0);
        let minus = (&ident - lam) * num_complex::Complex64::new(0.5, 0.0);
        let povm = tomopoly::quantum::embed_povm(vec![plus, minus], &basis).unwrap();
        let c = sample_counts(&rho, &povm, 1000, RngSeed(32 + axis as u64)).unwrap();
        polys.push(build_polytope(&povm, &c, 0.001, &EpsilonSplit::Uniform).unwrap());
    }
    let combined = combine_polytopes(&polys).unwrap();
    assert!((combined.epsilon_total() - 0.003).abs() < 1e-12);
    let bb_after = bounding_box(&combined).unwrap();
    let before = bb_before.edge_lengths();
    let after = bb_after.edge_lengths();
    assert!(after[0] < before[0], "x edge {} -> {}", before[0], after[0]);
    assert!(after[1] < before[1], "y edge {} -> {}", before[1], after[1]);
}

#[test]
fn three_qubit_pauli_flow() {
    // 63-dimensional Bloch space: noisy GHZ3 measured in all 27 Pauli
    // settings, folded into one 216-element POVM. The single-POVM and
    // combined-per-setting routes must both cover the truth.
    let folded = tomopoly::simulation::pauli_settings_povm(3).unwrap();
    let bell3 = make_state(&StateKind::Ghz(3)).unwrap();
    let mixed8 = make_state(&StateKind::Mixed(8)).unwrap();
    let truth = DensityMatrix::new(
        bell3.matrix() * num_complex::Complex64::new(0.8, 0.0)
            + mixed8.matrix() * num_complex::Complex64::new(0.2, 0.0),
    )
    .unwrap();
    let counts = sample_counts(&truth, &folded, 20_000, RngSeed(81)).unwrap();
    let poly = build_polytope(&folded, &counts, 0.001, &EpsilonSplit::Uniform).unwrap();
    assert_eq!(poly.facets().len(), 216);
    assert!(contains(&poly, &truth).unwrap());

    let settings = tomopoly::simulation::pauli_setting_povms(3).unwrap();
    assert_eq!(settings.len(), 27);
    let per_setting: Vec<_> = settings
        .iter()
        .enumerate()
        .map(|(k, povm)| {
            let c = sample_counts(&truth, povm, 740, RngSeed(8200 + k as u64)).unwrap();
            build_polytope(povm, &c, 0.001 / 27.0, &EpsilonSplit::Uniform).unwrap()
        })
        .collect();
    let combined = combine_polytopes(&per_setting).unwrap();
    assert_eq!(combined.facets().len(), 216);
    assert!((combined.epsilon_total() - 0.001).abs() < 1e-12);
    assert!(contains(&combined, &truth).unwrap());

    // Fidelity interval against the pure GHZ3. In 63 dimensions the
    // uniform measure concentrates away from the region's corners, so
    // the sampled min/max is a stable subinterval of the true range
    // rather than the full extremes; it must be nondegenerate, inside
    // (0,1), and reproducible across seeds.
    let spec = FomSpec::Fidelity {
        reference: bell3.clone(),
    };
    let opts = SamplerOptions {
        burn_in: 1500,
        thinning: 10,
        chains: 2,
    };
    let iv = fom_interval(&poly, &spec, 1200, RngSeed(83), opts).unwrap();
    assert!(0.0 < iv.lower && iv.lower < iv.upper && iv.upper < 1.0);
    let iv2 = fom_interval(&poly, &spec, 1200, RngSeed(84), opts).unwrap();
    assert!(
        (iv.lower - iv2.lower).abs() < 0.05 && (iv.upper - iv2.upper).abs() < 0.05,
        "resample moved: [{}, {}] vs [{}, {}]",
        iv.lower,
        iv.upper,
        iv2.lower,
        iv2.upper
    );
}

#[test]
fn sampler_matches_rejection_oracle_on_clipped_region() {
    // Small-n SIC data gives a tetrahedral polytope that pokes out of
    // the Bloch ball, so the sphere actively clips the region. The
    // hit-and-run mean must agree with plain rejection sampling from
    // the bounding box within combined 5σ.
    use rand::{Rng, SeedableRng};
    let povm = standard_povm(&PovmKind::SicQubit).unwrap();
    let counts = tomopoly::quantum::CountVector::new(vec![50, 50, 50, 50]);
    let poly = build_polytope(&povm, &counts, 0.1, &EpsilonSplit::Uniform).unwrap();
    // Facets must cut the ball interior while the tetrahedral corners
    // (at 3× the offset) poke outside, so both chord mechanisms act.
    for f in poly.facets() {
        assert!(f.offset < 1.0 && 3.0 * f.offset > 1.0, "offset {}", f.offset);
    }
    let n = 4000usize;
    let set = hit_and_run_sample(
        &poly,
        n,
        RngSeed(91),
        SamplerOptions {
            burn_in: 1000,
            thinning: 10,
            chains: 2,
        },
    )
    .unwrap();
    let coords = set.bloch(&poly);
    // Rejection oracle over the bounding box clipped to [-1, 1].
    let bb = bounding_box(&poly).unwrap();
    let ranges: Vec<(f64, f64)> = bb
        .intervals
        .iter()
        .map(|(lo, hi)| (lo.max(-1.0), hi.min(1.0)))
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(92);
    let mut oracle: Vec<[f64; 3]> = Vec::with_capacity(n);
    while oracle.len() < n {
        let p = [
            rng.gen_range(ranges[0].0..ranges[0].1),
            rng.gen_range(ranges[1].0..ranges[1].1),
            rng.gen_range(ranges[2].0..ranges[2].1),
        ];
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 && poly.satisfies_facets(&p) {
            oracle.push(p);
        }
    }
    for axis in 0..3 {
        let m1: f64 = coords.iter().map(|c| c[axis]).sum::<f64>() / n as f64;
        let m2: f64 = oracle.iter().map(|p| p[axis]).sum::<f64>() / n as f64;
        let v1: f64 = coords.iter().map(|c| (c[axis] - m1).powi(2)).sum::<f64>() / n as f64;
        let v2: f64 = oracle.iter().map(|p| (p[axis] - m2).powi(2)).sum::<f64>() / n as f64;
        let se = ((v1 + v2) / n as f64).sqrt();
        assert!(
            (m1 - m2).abs() < 5.0 * se,
            "axis {axis}: hit-and-run mean {m1} vs rejection {m2} (se {se})"
        );
    }
}

#[test]
fn embed_round_trip_on_simulated_states() {
    let basis2 = tomopoly::quantum::gellmann_basis(2).unwrap();
    let basis4 = tomopoly::quantum::gellmann_basis(4).unwrap();
    for seed in 0..30 {
        let rho = tomopoly::simulation::random_state_hs(2, RngSeed(seed)).unwrap();
        let r = embed_state(&rho, &basis2).unwrap();
        let back = unembed_state(&r, &basis2).unwrap();
        let err = (rho.matrix() - &back)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        let rho4 = tomopoly::simulation::random_state_hs(4, RngSeed(1000 + seed)).unwrap();
        let r4 = embed_state(&rho4, &basis4).unwrap();
        let back4 = unembed_state(&r4, &basis4).unwrap();
        let err4 = (rho4.matrix() - &back4)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err4 < 1e-12);
    }
}
