//! Classical statistical core: binary relative entropy, the root solve
//! for the half-space widths δ(n_i, ε_i), and the exact Clopper–Pearson
//! tail condition used as a correctness oracle.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};

/// Bisection tolerance in δ for the root solve. The divergence slope
/// dD/dδ reaches 1/ε^(1/n) near the boundary, so the width must sit
/// well below the 1e−10 residual target divided by that slope.
const DELTA_TOL: f64 = 1e-15;
const MAX_BISECT: usize = 200;

/// Solution of D(n_i/n ‖ n_i/n + δ) = −ln(ε_i)/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSolution {
    /// The half-space width δ ≥ 0.
    pub delta: f64,
    /// min(1, n_i/n + δ); the facet bound actually used.
    pub bound: f64,
    /// True when no positive root exists (n_i = n) and the facet is
    /// vacuous; the bound is then 1.
    pub clamped: bool,
    /// |D(n_i/n ‖ bound) + ln(ε_i)/n| for non-clamped solutions.
    pub residual: f64,
}

/// Binary relative entropy D(x‖y) in nats, with the 0·log 0 convention.
pub fn binary_kl(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!("x = {x} outside [0,1]")));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::DomainError(format!("y = {y} outside [0,1]")));
    }
    let mut total = 0.0;
    if x > 0.0 {
        if y == 0.0 {
            return Err(Error::DomainError("D(x‖0) diverges for x > 0".into()));
        }
        total += x * (x / y).ln();
    }
    if x < 1.0 {
        if y == 1.0 {
            return Err(Error::DomainError("D(x‖1) diverges for x < 1".into()));
        }
        total += (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln();
    }
    // Rounding can leave a tiny negative value at x ≈ y.
    Ok(total.max(0.0))
}

fn check_counts(n_i: u64, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::DomainError("n must be >= 1".into()));
    }
    if n_i > n {
        return Err(Error::DomainError(format!("n_i = {n_i} exceeds n = {n}")));
    }
    Ok(())
}

/// Positive root of D(n_i/n ‖ n_i/n + δ) = −ln(ε_i)/n by bisection.
///
/// D is strictly increasing in δ on (0, 1 − n_i/n) and diverges at the
/// right end, so for n_i < n the root is unique and interior. At
/// n_i = n there is no positive root; the facet bound is clamped to 1
/// and flagged, which keeps the region valid (tr(E σ) ≤ 1 always).
pub fn solve_delta(n_i: u64, n: u64, eps_i: f64) -> Result<DeltaSolution> {
    check_counts(n_i, n)?;
    if !(eps_i > 0.0 && eps_i < 1.0) {
        return Err(Error::DomainError(format!("eps_i = {eps_i} outside (0,1)")));
    }
    let x = n_i as f64 / n as f64;
    if n_i == n {
        return Ok(DeltaSolution {
            delta: 0.0,
            bound: 1.0,
            clamped: true,
            residual: 0.0,
        });
    }
    let target = -eps_i.ln() / n as f64;
    let width = 1.0 - x;
    let mut lo = 0.0;
    let mut hi = width;
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        // y = x + mid stays strictly inside (x, 1).
        let v = binary_kl(x, x + mid)?;
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < DELTA_TOL {
            break;
        }
    }
    let delta = 0.5 * (lo + hi);
    let bound = (x + delta).min(1.0);
    let clamped = x + delta >= 1.0;
    let residual = if clamped {
        0.0
    } else {
        (binary_kl(x, bound)? - target).abs()
    };
    Ok(DeltaSolution {
        delta,
        bound,
        clamped,
        residual,
    })
}

/// Compensated (Kahan) accumulator.
#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Lower binomial CDF P[X ≤ n_i] for X ~ Bin(n, p).
///
/// Terms are generated by the pmf ratio recurrence outward from the
/// mode with the mode term scaled to 1, and the CDF is returned as
/// sum_low / sum_all, so no binomial coefficient or log-gamma is ever
/// evaluated and the common scale cancels exactly. Relative drift of
/// the ratio recurrence is O(ulp · distance-from-mode) weighted by
/// exponentially decaying terms, which keeps the absolute error under
/// 1e−12 through n = 10⁶.
pub fn binomial_tail(n_i: u64, n: u64, p: f64) -> Result<f64> {
    check_counts(n_i, n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p} outside [0,1]")));
    }
    if n_i == n || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let q = 1.0 - p;
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as u64;
    // Terms below 10^-25 of the running total cannot move the ratio at
    // the 1e-13 level; the window is O(√n) wide in practice.
    let cutoff = 1e-25;
    let mut all = KahanSum::default();
    let mut low = KahanSum::default();
    // Downward sweep from the mode (includes the mode term itself).
    // A negligible term only ends the sweep once j has crossed n_i, so
    // the low sum always receives its share before truncation.
    let mut t = 1.0f64;
    let mut j = mode;
    loop {
        all.add(t);
        if j <= n_i {
            low.add(t);
        }
        let negligible = t == 0.0 || (t < cutoff * all.sum && j <= n_i);
        if j == 0 || negligible {
            break;
        }
        // t_{j-1} = t_j * (j q) / ((n - j + 1) p)
        t *= (j as f64 * q) / ((n - j + 1) as f64 * p);
        j -= 1;
    }
    // Upward sweep from mode + 1.
    let mut t = 1.0f64;
    let mut j = mode;
    while j < n {
        // t_{j+1} = t_j * ((n - j) p) / ((j + 1) q)
        t *= ((n - j) as f64 * p) / ((j + 1) as f64 * q);
        j += 1;
        all.add(t);
        if j <= n_i {
            low.add(t);
        }
        if (t < cutoff * all.sum && j > n_i) || t == 0.0 {
            break;
        }
    }
    Ok((low.sum / all.sum).clamp(0.0, 1.0))
}

/// One-sided Clopper–Pearson upper limit: the p* with
/// binomial_tail(n_i, n, p*) = eps_i, or 1 when n_i = n.
pub fn exact_cp_upper(n_i: u64, n: u64, eps_i: f64) -> Result<f64> {
    check_counts(n_i, n)?;
    if !(eps_i > 0.0 && eps_i < 1.0) {
        return Err(Error::DomainError(format!("eps_i = {eps_i} outside (0,1)")));
    }
    if n_i == n {
        return Ok(1.0);
    }
    // The tail decreases strictly from 1 at p = 0 to 0 at p = 1, so
    // the root is always bracketed by [0, 1]. (For eps above the tail
    // at the observed frequency it sits below n_i/n.)
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if binomial_tail(n_i, n, mid)? > eps_i {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kl_frozen_values() {
        assert_abs_diff_eq!(
            binary_kl(0.5, 0.75).unwrap(),
            0.14384103622589042,
            epsilon = 1e-15
        );
        for x in [0.0f64, 0.25, 0.5, 1.0] {
            let y = x.clamp(0.01, 0.99);
            assert_abs_diff_eq!(binary_kl(y, y).unwrap(), 0.0, epsilon = 1e-15);
        }
        // x = 0 convention: D(0‖y) = −ln(1−y).
        assert_abs_diff_eq!(
            binary_kl(0.0, 0.3).unwrap(),
            -(0.7f64).ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn kl_domain_errors() {
        assert!(binary_kl(-0.1, 0.5).is_err());
        assert!(binary_kl(1.1, 0.5).is_err());
        assert!(binary_kl(0.5, 0.0).is_err());
        assert!(binary_kl(0.5, 1.0).is_err());
        // y on the boundary matching x is fine.
        assert_abs_diff_eq!(binary_kl(1.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_kl(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn delta_closed_form_at_zero_counts() {
        // D(0‖δ) = −ln(1−δ) gives δ = 1 − ε^(1/n).
        let sol = solve_delta(0, 100, 0.001).unwrap();
        assert!(!sol.clamped);
        assert_abs_diff_eq!(sol.delta, 0.06674569920300899, epsilon = 1e-10);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn delta_full_counts_is_clamped() {
        let sol = solve_delta(100, 100, 0.01).unwrap();
        assert!(sol.clamped);
        assert_abs_diff_eq!(sol.bound, 1.0);
    }

    #[test]
    fn delta_half_counts_residual() {
        let sol = solve_delta(50, 100, 0.01).unwrap();
        assert!(!sol.clamped);
        // Target is ln(100)/100.
        let target = 0.04605170185988092;
        let d = binary_kl(0.5, sol.bound).unwrap();
        assert!((d - target).abs() <= 1e-10);
        assert_abs_diff_eq!(sol.delta, 0.14831483459556694, epsilon = 1e-9);
    }

    #[test]
    fn tail_frozen_values() {
        assert_abs_diff_eq!(binomial_tail(10, 10, 0.37).unwrap(), 1.0);
        assert_abs_diff_eq!(
            binomial_tail(0, 20, 0.1).unwrap(),
            0.9f64.powi(20),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            binomial_tail(5, 10, 0.5).unwrap(),
            0.623046875,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tail_precision_at_large_n() {
        // Complementary identity P[X<=k|p] + P[X<=n-k-1|1-p] = 1 holds
        // exactly; deviations expose evaluation error at n = 10⁶.
        for (k, p) in [(499_999u64, 0.3f64), (700_000, 0.7), (123_456, 0.12)] {
            let n = 1_000_000u64;
            let a = binomial_tail(k, n, p).unwrap();
            let b = binomial_tail(n - k - 1, n, 1.0 - p).unwrap();
            assert!(
                (a + b - 1.0).abs() <= 1e-12,
                "identity defect {} at k={k} p={p}",
                (a + b - 1.0).abs()
            );
        }
    }

    #[test]
    fn cp_upper_matches_closed_form_at_zero() {
        for (n, eps) in [(100u64, 0.001), (17, 0.05), (1000, 0.01)] {
            let p = exact_cp_upper(0, n, eps).unwrap();
            let want = 1.0 - eps.powf(1.0 / n as f64);
            assert_abs_diff_eq!(p, want, epsilon = 1e-9);
            // Coincides with the root-solve bound at n_i = 0.
            let sol = solve_delta(0, n, eps).unwrap();
            assert_abs_diff_eq!(sol.bound, want, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(exact_cp_upper(9, 9, 0.01).unwrap(), 1.0);
    }

    #[test]
    fn cp_upper_residual() {
        let p = exact_cp_upper(50, 100, 0.01).unwrap();
        let tail = binomial_tail(50, 100, p).unwrap();
        assert!((tail - 0.01).abs() < 1e-9);
        assert_abs_diff_eq!(p, 0.619282533093047, epsilon = 1e-9);
    }

    #[test]
    fn cp_upper_with_large_eps_sits_below_frequency() {
        // For eps above the tail at the observed frequency the limit
        // drops below n_i/n; the bracket must still find it.
        let p = exact_cp_upper(90, 100, 0.9).unwrap();
        assert!(p < 0.9, "p* = {p} not below the frequency");
        let tail = binomial_tail(90, 100, p).unwrap();
        assert!((tail - 0.9).abs() < 1e-9);
        // Dominance is trivial here: the root-solve bound exceeds x.
        assert!(solve_delta(90, 100, 0.9).unwrap().bound >= p);
    }

    #[test]
    fn dominance_small_grid() {
        // Small-grid spot check; the full 1..=200 sweep lives in the
        // acceptance suite.
        for n in [1u64, 3, 10, 40] {
            for eps in [0.1, 0.01, 0.001] {
                for n_i in 0..=n {
                    let sol = solve_delta(n_i, n, eps).unwrap();
                    let cp = exact_cp_upper(n_i, n, eps).unwrap();
                    assert!(
                        sol.bound >= cp - 1e-9,
                        "dominance failed at n_i={n_i} n={n} eps={eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn chernoff_bounds_tail() {
        // binomial_tail(n_i, n, x+δ) <= exp(−n D(x‖x+δ)) for δ > 0.
        let mut s = 0.3_f64;
        for _ in 0..200 {
            s = (s * 997.0 + 0.123).fract();
            let n = 10 + (s * 150.0) as u64;
            let n_i = ((s * 7919.0).fract() * n as f64) as u64;
            let x = n_i as f64 / n as f64;
            let delta = (1.0 - x) * (0.05 + 0.9 * (s * 31.0).fract());
            if delta <= 0.0 || x + delta >= 1.0 {
                continue;
            }
            let tail = binomial_tail(n_i, n, x + delta).unwrap();
            let chernoff = (-(n as f64) * binary_kl(x, x + delta).unwrap()).exp();
            assert!(
                tail <= chernoff + 1e-12,
                "Chernoff violated: n={n} n_i={n_i} delta={delta}"
            );
        }
    }

    #[test]
    fn monotonicity_in_eps_and_n() {
        // Bound non-increasing in eps_i.
        let mut prev = f64::INFINITY;
        for eps in [0.001, 0.01, 0.05, 0.1, 0.2] {
            let b = solve_delta(30, 100, eps).unwrap().bound;
            assert!(b <= prev + 1e-14);
            prev = b;
        }
        // δ non-increasing in n at fixed frequency.
        let mut prev = f64::INFINITY;
        for n in [10u64, 20, 50, 100, 500] {
            let d = solve_delta(n / 2, n, 0.01).unwrap().delta;
            assert!(d <= prev + 1e-14);
            prev = d;
        }
    }

    #[test]
    fn pinsker_lower_bound() {
        let mut s = 0.7_f64;
        for _ in 0..500 {
            s = (s * 613.0 + 0.71).fract();
            let x = (s * 0.98 + 0.01).clamp(0.0, 1.0);
            let y = ((s * 53.0).fract() * 0.98 + 0.01).clamp(0.0, 1.0);
            let kl = binary_kl(x, y).unwrap();
            assert!(kl + 1e-12 >= 2.0 * (x - y) * (x - y));
        }
    }

    #[test]
    fn domain_errors() {
        assert!(solve_delta(5, 4, 0.1).is_err());
        assert!(solve_delta(0, 0, 0.1).is_err());
        assert!(solve_delta(1, 4, 0.0).is_err());
        assert!(solve_delta(1, 4, 1.0).is_err());
        assert!(binomial_tail(2, 4, 1.5).is_err());
    }
}
