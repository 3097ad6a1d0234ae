//! Finite-shot estimation of the control qubit's Pauli expectations.
//!
//! Each run of the circuit ends in a `±1` outcome; `L` runs give counts
//! `N+` and `N-` and the estimator `(N+ - N-) / (N+ + N-)`. Shot budgets use
//! the two-sided Hoeffding form `ln(2/P_e) / (2 eps^2)`, inflated by
//! `1/alpha^2` for a partially mixed control.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::dqc1::{check_alpha, exact_expectations, normalized_trace, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::qmath::C64;
use crate::rng::{family, stream_id, task_rng};

/// Shot budget for a target accuracy and failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub epsilon: f64,
    pub p_error: f64,
    pub alpha: f64,
    pub shots: u64,
}

impl ShotPlan {
    pub fn new(epsilon: f64, p_error: f64, alpha: f64) -> Result<Self> {
        let shots = shots_required(epsilon, p_error, alpha)?;
        Ok(Self {
            epsilon,
            p_error,
            alpha,
            shots,
        })
    }
}

/// `ceil(ln(2/p_error) / (2 epsilon^2) / alpha^2)`.
pub fn shots_required(epsilon: f64, p_error: f64, alpha: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(p_error > 0.0 && p_error < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "p_error must lie in (0, 1), got {p_error}"
        )));
    }
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::NoPureFraction);
    }
    let base = (2.0 / p_error).ln() / (2.0 * epsilon * epsilon);
    Ok((base / (alpha * alpha)).ceil().max(1.0) as u64)
}

/// How counts are generated for one expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Exactly `shots` runs, `N+ ~ Binomial(shots, (1 + e) / 2)`.
    #[default]
    Binomial,
    /// Independent Poisson counts per output port with total mean `shots`.
    Poisson,
}

/// Counts recorded at the two output ports of one measurement basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub basis_label: String,
    pub n_plus: u64,
    pub n_minus: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_tag: Option<String>,
}

impl MeasurementRecord {
    pub fn total(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    /// `(N+ - N-) / (N+ + N-)`.
    pub fn ratio(&self) -> Result<f64> {
        if self.total() == 0 {
            return Err(Error::NoSignal);
        }
        Ok((self.n_plus as f64 - self.n_minus as f64) / self.total() as f64)
    }
}

fn check_expectation(e: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&e) {
        return Err(Error::InvalidArgument(format!(
            "expectation must lie in [-1, 1], got {e}"
        )));
    }
    Ok(())
}

fn poisson_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<u64> {
    if rate == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(rate)
        .map_err(|e| Error::InvalidArgument(format!("poisson rate {rate}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Draws counts for an observable with the given true expectation.
pub fn draw_record<R: Rng + ?Sized>(
    true_expectation: f64,
    shots: u64,
    mode: SamplingMode,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    check_expectation(true_expectation)?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let p_plus = ((1.0 + true_expectation) / 2.0).clamp(0.0, 1.0);
    let (n_plus, n_minus) = match mode {
        SamplingMode::Binomial => {
            let dist = Binomial::new(shots, p_plus)
                .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?;
            let n_plus = dist.sample(rng);
            (n_plus, shots - n_plus)
        }
        SamplingMode::Poisson => (
            poisson_draw(shots as f64 * p_plus, rng)?,
            poisson_draw(shots as f64 * (1.0 - p_plus), rng)?,
        ),
    };
    Ok(MeasurementRecord {
        basis_label: String::new(),
        n_plus,
        n_minus,
        duration_tag: None,
    })
}

/// Binomial-mode estimate drawn from a caller-owned generator.
pub fn sample_expectation_with<R: Rng + ?Sized>(
    true_expectation: f64,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    draw_record(true_expectation, shots, SamplingMode::Binomial, rng)?.ratio()
}

/// Finite-shot estimate of an expectation value; deterministic per seed.
pub fn sample_expectation(true_expectation: f64, shots: u64, seed: u64) -> Result<f64> {
    let mut rng = task_rng(seed, stream_id(family::SAMPLE, 0));
    sample_expectation_with(true_expectation, shots, &mut rng)
}

/// Independent Poisson counts at the `+` and `-` ports.
pub fn poisson_counts(rate_plus: f64, rate_minus: f64, seed: u64) -> Result<MeasurementRecord> {
    if !(rate_plus >= 0.0 && rate_minus >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rates must be nonnegative, got {rate_plus} and {rate_minus}"
        )));
    }
    if rate_plus == 0.0 && rate_minus == 0.0 {
        return Err(Error::NoSignal);
    }
    let mut rng = task_rng(seed, stream_id(family::POISSON, 0));
    Ok(MeasurementRecord {
        basis_label: String::new(),
        n_plus: poisson_draw(rate_plus, &mut rng)?,
        n_minus: poisson_draw(rate_minus, &mut rng)?,
        duration_tag: None,
    })
}

/// Raw and rescaled outcome of estimating `Tr U / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimate {
    /// Estimated `<X>` of the control, not divided by alpha.
    pub raw_x: f64,
    /// Estimated `<Y>` of the control, not divided by alpha.
    pub raw_y: f64,
    /// `(raw_x + i raw_y) / alpha`, the estimate of `Tr U / N`.
    pub trace: C64,
}

/// Samples both control quadratures for task `task` of a seeded batch.
///
/// `shots == 0` selects exact mode. The X and Y streams are independent.
pub fn estimate_control(
    u: &UnitaryMatrix,
    alpha: f64,
    shots: u64,
    seed: u64,
    task: u32,
    mode: SamplingMode,
) -> Result<TraceEstimate> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::NoPureFraction);
    }
    if shots == 0 {
        let (x, y) = exact_expectations(u, alpha)?;
        return Ok(TraceEstimate {
            raw_x: x,
            raw_y: y,
            trace: normalized_trace(u),
        });
    }
    let (x, y) = exact_expectations(u, alpha)?;
    let (raw_x, raw_y) = sample_quadratures(x, y, shots, seed, task, mode)?;
    Ok(TraceEstimate {
        raw_x,
        raw_y,
        trace: C64::new(raw_x, raw_y) / alpha,
    })
}

/// Finite-shot `(<X>, <Y>)` of the control for task `task` of a seeded batch.
pub fn sample_quadratures(
    x: f64,
    y: f64,
    shots: u64,
    seed: u64,
    task: u32,
    mode: SamplingMode,
) -> Result<(f64, f64)> {
    let mut rx = task_rng(seed, stream_id(family::TRACE_X, task));
    let mut ry = task_rng(seed, stream_id(family::TRACE_Y, task));
    let raw_x = draw_record(x.clamp(-1.0, 1.0), shots, mode, &mut rx)?.ratio()?;
    let raw_y = draw_record(y.clamp(-1.0, 1.0), shots, mode, &mut ry)?.ratio()?;
    Ok((raw_x, raw_y))
}

/// Estimate of `Tr U / N` from `shots` runs per quadrature.
pub fn estimate_trace(u: &UnitaryMatrix, alpha: f64, shots: u64, seed: u64) -> Result<C64> {
    estimate_control(u, alpha, shots, seed, 0, SamplingMode::Binomial).map(|e| e.trace)
}

/// Reduced chi-square report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub chi2_reduced: f64,
    pub dof: usize,
    pub n_points: usize,
}

/// Fitted degrees of freedom removed by default in reduced chi-square.
pub const DEFAULT_DOF_SUBTRACT: usize = 3;

/// `sum(((obs - exp) / sigma)^2) / (len - dof_subtract)`.
pub fn chi2_reduced(
    observed: &[f64],
    expected: &[f64],
    sigma: &[f64],
    dof_subtract: usize,
) -> Result<f64> {
    chi2_report(observed, expected, sigma, dof_subtract).map(|r| r.chi2_reduced)
}

pub fn chi2_report(
    observed: &[f64],
    expected: &[f64],
    sigma: &[f64],
    dof_subtract: usize,
) -> Result<ChiSquareReport> {
    let n = observed.len();
    if expected.len() != n || sigma.len() != n {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} observed, {} expected, {} sigma",
            n,
            expected.len(),
            sigma.len()
        )));
    }
    if n < dof_subtract + 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} points, got {n}",
            dof_subtract + 1
        )));
    }
    if let Some(bad) = sigma.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {bad}"
        )));
    }
    let sum: f64 = observed
        .iter()
        .zip(expected)
        .zip(sigma)
        .map(|((o, e), s)| ((o - e) / s).powi(2))
        .sum();
    let dof = n - dof_subtract;
    Ok(ChiSquareReport {
        chi2_reduced: sum / dof as f64,
        dof,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqc1::z_theta;
    use crate::exec::Execution;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn mean_std(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    #[test]
    fn shots_required_examples() {
        // ceil(ln 40 / 0.02)
        let oracle = ((40f64).ln() / 0.02).ceil() as u64;
        assert_eq!(oracle, 185);
        assert_eq!(shots_required(0.1, 0.05, 1.0).unwrap(), 185);
        let oracle_half = ((40f64).ln() / 0.02 / 0.25).ceil() as u64;
        assert_eq!(oracle_half, 738);
        assert_eq!(shots_required(0.1, 0.05, 0.5).unwrap(), 738);
        assert!(matches!(
            shots_required(0.1, 0.05, 0.0),
            Err(Error::NoPureFraction)
        ));
        assert!(shots_required(0.0, 0.05, 1.0).is_err());
        assert!(shots_required(0.1, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn shots_required_is_monotone(
            eps in 0.01f64..0.9,
            pe in 0.001f64..0.9,
            alpha in 0.05f64..1.0,
            bump in 1.01f64..1.5,
        ) {
            let base = shots_required(eps, pe, alpha).unwrap();
            prop_assert!(shots_required((eps * bump).min(0.99), pe, alpha).unwrap() <= base);
            prop_assert!(shots_required(eps, (pe * bump).min(0.99), alpha).unwrap() <= base);
            prop_assert!(shots_required(eps, pe, (alpha * bump).min(1.0)).unwrap() <= base);
        }

        #[test]
        fn same_seed_same_estimate(e in -1.0f64..=1.0, shots in 1u64..5000, seed in any::<u64>()) {
            let a = sample_expectation(e, shots, seed).unwrap();
            let b = sample_expectation(e, shots, seed).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn deterministic_outcomes() {
        for seed in 0..20 {
            assert_eq!(sample_expectation(1.0, 17 + seed, seed).unwrap(), 1.0);
            assert_eq!(sample_expectation(-1.0, 1000, seed).unwrap(), -1.0);
        }
        assert!(sample_expectation(1.2, 10, 0).is_err());
        assert!(sample_expectation(0.2, 0, 0).is_err());
    }

    #[test]
    fn large_sample_at_zero_is_frozen() {
        let est = sample_expectation(0.0, 1_000_000, 2024).unwrap();
        assert!(est.abs() < 0.005);
        assert_eq!(est, FROZEN_ZERO_ESTIMATE);
    }

    // regenerated with seed 2024, 10^6 shots
    const FROZEN_ZERO_ESTIMATE: f64 = 0.000974;

    #[test]
    fn estimator_is_unbiased() {
        for &e in &[-0.9, 0.0, 0.5, 0.9] {
            let ests =
                Execution::Parallel.map(1000, |s| sample_expectation(e, 1000, s as u64).unwrap());
            let (mean, sd) = mean_std(&ests);
            let se = sd / (ests.len() as f64).sqrt();
            assert!((mean - e).abs() <= 3.0 * se, "e={e} mean={mean} se={se}");
        }
    }

    #[test]
    fn estimator_spread_scales_inverse_sqrt_shots() {
        let e = 0.3;
        let c_est: Vec<f64> = [100u64, 1000, 10_000]
            .iter()
            .map(|&l| {
                let ests =
                    Execution::Parallel.map(1000, |s| sample_expectation(e, l, s as u64).unwrap());
                mean_std(&ests).1 * (l as f64).sqrt()
            })
            .collect();
        let c = (1.0f64 - e * e).sqrt();
        for v in c_est {
            assert!((v / c - 1.0).abs() < 0.2, "{v} vs {c}");
        }
    }

    #[test]
    fn estimate_trace_exact_and_noisy() {
        let exact = estimate_trace(&UnitaryMatrix::identity(1), 1.0, 0, 3).unwrap();
        assert_eq!(exact, C64::new(1.0, 0.0));
        let target = C64::new(0.5, 0.5);
        let u = z_theta(FRAC_PI_2);
        let l = 100_000;
        let errs = Execution::Parallel.map(100, |s| {
            (estimate_trace(&u, 1.0, l, s as u64).unwrap() - target).norm()
        });
        assert!(errs.iter().all(|&e| e < 0.02));
        let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        assert!(rms <= 2.0 / (l as f64).sqrt());

        assert!(matches!(
            estimate_trace(&u, 0.0, 10, 0),
            Err(Error::NoPureFraction)
        ));
    }

    #[test]
    fn estimate_trace_spread_scales_inverse_alpha() {
        // traceless U keeps the per-shot variance independent of alpha
        let u = z_theta(PI);
        let rms = |alpha: f64| {
            let errs = Execution::Parallel.map(1000, |s| {
                (estimate_trace(&u, alpha, 10_000, s as u64).unwrap() - normalized_trace(&u))
                    .norm_sqr()
            });
            (errs.iter().sum::<f64>() / errs.len() as f64).sqrt()
        };
        let ratio = rms(0.5) / rms(1.0);
        assert!((ratio / 2.0 - 1.0).abs() < 0.15, "ratio {ratio}");

        let spread = |alpha: f64| {
            let u = z_theta(FRAC_PI_2);
            let errs = Execution::Parallel.map(200, |s| {
                (estimate_trace(&u, alpha, 100_000, s as u64).unwrap() - C64::new(0.5, 0.5))
                    .norm_sqr()
            });
            (errs.iter().sum::<f64>() / errs.len() as f64).sqrt()
        };
        assert!(spread(0.58) > spread(1.0));
    }

    #[test]
    fn estimate_is_bit_reproducible() {
        let u = z_theta(0.4);
        let a = estimate_control(&u, 0.8, 5000, 99, 7, SamplingMode::Binomial).unwrap();
        let b = estimate_control(&u, 0.8, 5000, 99, 7, SamplingMode::Binomial).unwrap();
        assert_eq!(a, b);
        let c = estimate_control(&u, 0.8, 5000, 99, 8, SamplingMode::Binomial).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_mode_estimates_are_unbiased() {
        let u = z_theta(1.0);
        let (x, y) = exact_expectations(&u, 1.0).unwrap();
        let ests = Execution::Parallel.map(500, |s| {
            estimate_control(&u, 1.0, 2000, s as u64, 0, SamplingMode::Poisson).unwrap()
        });
        let mx = ests.iter().map(|e| e.raw_x).sum::<f64>() / 500.0;
        let my = ests.iter().map(|e| e.raw_y).sum::<f64>() / 500.0;
        assert!((mx - x).abs() < 0.01 && (my - y).abs() < 0.01);
    }

    #[test]
    fn poisson_counts_examples() {
        let dark = poisson_counts(0.0, 100.0, 1).unwrap();
        assert_eq!(dark.n_plus, 0);
        assert!(dark.n_minus > 50 && dark.n_minus < 150);
        assert!(matches!(poisson_counts(0.0, 0.0, 1), Err(Error::NoSignal)));
        assert!(poisson_counts(-1.0, 2.0, 1).is_err());
        assert_eq!(
            poisson_counts(5.0, 7.0, 42).unwrap(),
            poisson_counts(5.0, 7.0, 42).unwrap()
        );

        let ratios = Execution::Parallel.map(2000, |s| {
            poisson_counts(50.0, 50.0, s as u64)
                .unwrap()
                .ratio()
                .unwrap()
        });
        let (mean, sd) = mean_std(&ratios);
        assert!(mean.abs() < 3.0 * sd / (2000f64).sqrt());
        // delta method: sd of the ratio is sqrt((1 - e^2) / (rate_plus + rate_minus))
        let expected = (1.0f64 / 100.0).sqrt();
        assert!((sd / expected - 1.0).abs() < 0.1, "sd {sd} vs {expected}");
    }

    #[test]
    fn chi2_examples() {
        let exp: Vec<f64> = (0..23).map(|i| i as f64 * 0.1).collect();
        let sigma = vec![0.05; 23];
        assert_eq!(chi2_reduced(&exp, &exp, &sigma, 3).unwrap(), 0.0);
        let mut obs = exp.clone();
        obs[7] += 2.0 * 0.05;
        assert_abs_diff_eq!(
            chi2_reduced(&obs, &exp, &sigma, 3).unwrap(),
            0.2,
            epsilon = 1e-12
        );
        let report = chi2_report(&obs, &exp, &sigma, 3).unwrap();
        assert_eq!((report.dof, report.n_points), (20, 23));

        assert!(chi2_reduced(&obs[..3], &exp[..3], &sigma[..3], 3).is_err());
        assert!(chi2_reduced(&obs, &exp[..5], &sigma, 3).is_err());
        let mut bad = sigma.clone();
        bad[2] = 0.0;
        assert!(chi2_reduced(&obs, &exp, &bad, 3).is_err());
    }

    #[test]
    fn simulated_sweep_has_unit_reduced_chi2() {
        let l = 10_000u64;
        let thetas: Vec<f64> = (0..41).map(|k| -PI + 2.0 * PI * k as f64 / 40.0).collect();
        let chis = Execution::Parallel.map(100, |s| {
            let mut obs = Vec::new();
            let mut exp = Vec::new();
            let mut sig = Vec::new();
            for (k, &t) in thetas.iter().enumerate() {
                let u = z_theta(t);
                let est = estimate_control(&u, 1.0, l, s as u64, k as u32, SamplingMode::Binomial)
                    .unwrap();
                let (x, _) = exact_expectations(&u, 1.0).unwrap();
                obs.push(est.raw_x);
                exp.push(x);
                sig.push(((1.0 - x * x).max(1.0 / l as f64) / l as f64).sqrt());
            }
            chi2_reduced(&obs, &exp, &sig, 3).unwrap()
        });
        let mean = chis.iter().sum::<f64>() / chis.len() as f64;
        assert!((0.5..=2.0).contains(&mean), "mean reduced chi2 {mean}");
        let inside = chis.iter().filter(|c| (0.5..=2.0).contains(*c)).count();
        assert!(inside >= 95, "{inside} of 100 seeds in [0.5, 2]");
    }
}
