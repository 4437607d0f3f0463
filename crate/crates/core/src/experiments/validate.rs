//! Built-in validation suite: Monte Carlo moment checks, estimator
//! statistics and exact identities between closed forms.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::analytic::{
    approx_mrc_imperfect, approx_mrc_perfect, approx_zf_imperfect, approx_zf_perfect,
    det_equiv_rate, lemma2_with_kernel, lemma4_with_kernel, phi_matrix, rayleigh_mrc_imperfect,
    rayleigh_mrc_imperfect_lower_bound, rayleigh_mrc_perfect, rayleigh_mrc_perfect_lower_bound,
    ScalingLaw,
};
use crate::channel::{ChannelModel, FadingProfile, SystemGeometry};
use crate::error::{Error, Result};
use crate::estimation::{error_variance, eta, mmse_estimate, PilotScheme};
use crate::linalg::{gram, inverse_diagonal, MAX_CONDITION};
use crate::rates::{run_parallel, Csi, Receiver};
use crate::rng::{combine_keys, substream};
use crate::stats::SampleStats;

use super::moments::{compare_moments, simulate_lemma2, simulate_lemma4};

/// Default trial count for the moment checks.
pub const MOMENT_TRIALS: usize = 200_000;
/// Default trial count for the estimator and Wishart checks.
pub const STAT_TRIALS: usize = 100_000;
/// Draws per array size in the convergence trend checks.
const TREND_DRAWS: usize = 100;
/// Allowed distance, in standard errors, between an estimate and its closed form.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Overrides every Monte Carlo trial count when set.
    pub trials: Option<usize>,
    pub workers: usize,
    /// Added to every off-diagonal kernel value before the moment formulas are
    /// evaluated. Nonzero values exist to prove the moment checks can fail.
    pub phi_perturbation: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            seed: 2016,
            trials: None,
            workers: 0,
            phi_perturbation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub deviation: f64,
    pub threshold: f64,
}

impl CheckOutcome {
    fn at_most(name: impl Into<String>, deviation: f64, threshold: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: deviation <= threshold,
            deviation,
            threshold,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Checks whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckOutcome> {
        self.checks
            .iter()
            .filter(move |c| c.name.starts_with(prefix))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<58} deviation {:>11.4e}  limit {:>10.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.deviation,
                c.threshold
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn perturbed_phi(geometry: &SystemGeometry, delta: f64) -> DMatrix<f64> {
    let mut phi = phi_matrix(geometry);
    for a in 0..phi.nrows() {
        for b in 0..phi.ncols() {
            if a != b {
                phi[(a, b)] += delta;
            }
        }
    }
    phi
}

fn moment_checks(options: &ValidateOptions, report: &mut ValidationReport) -> Result<()> {
    let trials = options.trials.unwrap_or(MOMENT_TRIALS);
    let angles = vec![0.1, 0.0];
    for m in [8, 32] {
        let geometry = SystemGeometry::new(m, angles.clone())?;
        let phi = perturbed_phi(&geometry, options.phi_perturbation);
        for k in [0.0, 1.0, 10.0] {
            let profile = FadingProfile::with_common_k(k, vec![1.0, 1.0])?;
            let closed = lemma2_with_kernel(&geometry, &profile, &phi)?;
            let seed = combine_keys(options.seed, (m as u64) << 8 | k as u64);
            let est = simulate_lemma2(&geometry, &profile, trials, seed, options.workers)?;
            for c in compare_moments(&closed, &est) {
                report.checks.push(CheckOutcome::at_most(
                    format!("lemma2 M={m} K={k} {}", c.label),
                    c.z_score(),
                    Z_LIMIT,
                ));
            }
        }
    }

    let geometry = SystemGeometry::new(32, angles)?;
    let phi = perturbed_phi(&geometry, options.phi_perturbation);
    for k in [0.0, 1.0, 10.0] {
        for p_p in [1.0, 10.0] {
            let profile = FadingProfile::with_common_k(k, vec![1.0, 0.5])?;
            let closed = lemma4_with_kernel(&geometry, &profile, p_p, &phi)?;
            let seed = combine_keys(options.seed ^ 0x44, (k as u64) << 8 | p_p as u64);
            let est = simulate_lemma4(&geometry, &profile, p_p, trials, seed, options.workers)?;
            for c in compare_moments(&closed, &est) {
                report.checks.push(CheckOutcome::at_most(
                    format!("lemma4 M=32 K={k} p_p={p_p} {}", c.label),
                    c.z_score(),
                    Z_LIMIT,
                ));
            }
        }
    }
    Ok(())
}

/// Relative error of the empirical per-entry variance of `G_hat - G`, and
/// the relative standard error of that estimate.
pub fn error_variance_deviation(
    beta: f64,
    k: f64,
    p_p: f64,
    antennas: usize,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    let geometry = SystemGeometry::new(antennas, vec![0.3])?;
    let profile = FadingProfile::new(vec![k], vec![beta])?;
    let scheme = PilotScheme::with_pilot_power(1, p_p, p_p)?;
    let model = ChannelModel::new(&geometry, &profile)?;
    let samples: Vec<Result<Vec<f64>>> = run_parallel(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream(seed, 0xE20, t as u64);
                let draw = model.draw(&mut rng);
                let est = mmse_estimate(&draw, &profile, &scheme, &mut rng)?;
                Ok(est.error(&draw).iter().map(|e| e.norm_sqr()).collect())
            })
            .collect()
    })?;
    let flat: Vec<f64> = samples.into_iter().collect::<Result<Vec<_>>>()?.concat();
    let stats = SampleStats::from_slice(&flat);
    let target = error_variance(beta, k, p_p);
    Ok(((stats.mean - target).abs() / target, stats.stderr / target))
}

fn estimator_checks(options: &ValidateOptions, report: &mut ValidationReport) -> Result<()> {
    let trials = options.trials.unwrap_or(STAT_TRIALS);
    for beta in [0.1, 1.0] {
        for k in [0.0, 3.98] {
            let seed = combine_keys(
                options.seed,
                (beta * 10.0) as u64 * 1000 + (k * 100.0) as u64,
            );
            let (dev, rel_stderr) =
                error_variance_deviation(beta, k, 10.0, 4, trials, seed, options.workers)?;
            report.checks.push(CheckOutcome::at_most(
                format!("error variance beta={beta} K={k} p_p=10 (relative)"),
                dev,
                0.03f64.max(Z_LIMIT * rel_stderr),
            ));
        }
    }

    // Wishart first negative moment at K = 0.
    let (m, n) = (16, 4);
    let geometry = SystemGeometry::new(m, vec![0.1, 0.5, -0.4, 1.2])?;
    let profile = FadingProfile::with_common_k(0.0, vec![1.0; n])?;
    let model = ChannelModel::new(&geometry, &profile)?;
    let samples: Vec<Option<Vec<f64>>> = run_parallel(options.workers, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream(options.seed, 0x3A48, t as u64);
                inverse_diagonal(&gram(&model.draw(&mut rng).h), MAX_CONDITION).ok()
            })
            .collect()
    })?;
    let kept: Vec<Vec<f64>> = samples.into_iter().flatten().collect();
    for u in 0..n {
        let column: Vec<f64> = kept.iter().map(|d| d[u]).collect();
        let z = SampleStats::from_slice(&column).z_score(1.0 / (m - n) as f64);
        report.checks.push(CheckOutcome::at_most(
            format!("wishart E[(H^H H)^-1]_{u}{u} M=16 N=4"),
            z,
            Z_LIMIT,
        ));
    }
    Ok(())
}

/// Mean over draws of `max |(1/M) X^H X - target|` for growing `M`.
fn trend(
    sizes: &[usize],
    mut deviation: impl FnMut(usize, u64) -> Result<f64>,
) -> Result<Vec<f64>> {
    sizes
        .iter()
        .map(|&m| {
            let values: Vec<f64> = (0..TREND_DRAWS as u64)
                .map(|t| deviation(m, t))
                .collect::<Result<_>>()?;
            Ok(SampleStats::from_slice(&values).mean)
        })
        .collect()
}

fn push_trend(report: &mut ValidationReport, name: &str, values: &[f64]) {
    // deviation is the largest ratio of consecutive values; it must stay below 1
    let worst = values.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    report.checks.push(CheckOutcome {
        name: name.into(),
        passed: worst < 1.0,
        deviation: worst,
        threshold: 1.0,
    });
}

fn convergence_checks(options: &ValidateOptions, report: &mut ValidationReport) -> Result<()> {
    let sizes = [64, 128, 256];
    let angles = vec![0.3, -0.5, 1.0];
    let k = vec![1.0, 4.0, 0.5];
    let beta = vec![1.0, 0.2, 2.5];

    let lemma1 = trend(&sizes, |m, t| {
        let geometry = SystemGeometry::new(m, angles.clone())?;
        let profile = FadingProfile::new(k.clone(), vec![1.0; 3])?;
        let mut rng = substream(options.seed, 0x1E1, combine_keys(m as u64, t));
        let h = ChannelModel::new(&geometry, &profile)?.draw(&mut rng).h;
        let g = gram(&h).unscale(m as f64);
        Ok((0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .map(|(a, b)| (g[(a, b)].re - if a == b { 1.0 } else { 0.0 }).hypot(g[(a, b)].im))
            .fold(0.0, f64::max))
    })?;
    push_trend(
        report,
        "lemma1 max|H^H H / M - I| shrinks as M doubles",
        &lemma1,
    );

    let p_p = 5.0;
    let eta = eta(&beta, p_p);
    let lemma3 = trend(&sizes, |m, t| {
        let geometry = SystemGeometry::new(m, angles.clone())?;
        let profile = FadingProfile::new(k.clone(), beta.clone())?;
        let scheme = PilotScheme::with_pilot_power(3, p_p / 3.0, p_p)?;
        let mut rng = substream(options.seed, 0x1E3, combine_keys(m as u64, t));
        let draw = ChannelModel::new(&geometry, &profile)?.draw(&mut rng);
        let g = gram(&mmse_estimate(&draw, &profile, &scheme, &mut rng)?.g_hat).unscale(m as f64);
        Ok((0..3)
            .map(|n| (g[(n, n)].re - beta[n] * (k[n] + eta[n]) / (k[n] + 1.0)).abs())
            .fold(0.0, f64::max))
    })?;
    push_trend(
        report,
        "lemma3 |g_hat^H g_hat / M - limit| shrinks as M doubles",
        &lemma3,
    );
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn identity_checks(report: &mut ValidationReport) -> Result<()> {
    let angles = vec![0.2, -0.9, 0.55, 1.3, -0.05];
    let beta = vec![1.0, 0.05, 0.4, 2.0, 0.7];
    let geometry = SystemGeometry::new(64, angles.clone())?;
    let rayleigh = FadingProfile::with_common_k(0.0, beta.clone())?;
    let (p_u, tau) = (3.0, 8);
    let scheme = PilotScheme::new(tau, p_u)?;

    let d = max_abs_diff(
        &approx_mrc_perfect(&geometry, &rayleigh, p_u)?,
        &rayleigh_mrc_perfect(64, &beta, p_u),
    );
    report.checks.push(CheckOutcome::at_most(
        "MRC perfect at K=0 equals Rayleigh form",
        d,
        1e-12,
    ));
    let d = max_abs_diff(
        &approx_mrc_imperfect(&geometry, &rayleigh, &scheme)?,
        &rayleigh_mrc_imperfect(64, &beta, p_u, tau),
    );
    report.checks.push(CheckOutcome::at_most(
        "MRC imperfect at K=0 equals Rayleigh form",
        d,
        1e-12,
    ));

    let ricean = FadingProfile::new(vec![0.0, 2.0, 5.0, 0.5, 12.0], beta.clone())?;
    let strong = PilotScheme::with_pilot_power(tau, p_u, 1e12)?;
    let d = max_abs_diff(
        &approx_mrc_imperfect(&geometry, &ricean, &strong)?,
        &approx_mrc_perfect(&geometry, &ricean, p_u)?,
    );
    report.checks.push(CheckOutcome::at_most(
        "MRC imperfect at p_p=1e12 equals perfect",
        d,
        1e-6,
    ));
    let d = max_abs_diff(
        &approx_zf_imperfect(&geometry, &ricean, &strong)?,
        &approx_zf_perfect(&geometry, &ricean, p_u)?,
    );
    report.checks.push(CheckOutcome::at_most(
        "ZF imperfect at p_p=1e12 equals perfect",
        d,
        1e-6,
    ));

    let mut mismatches = 0usize;
    for alpha in [0.0, 0.5, 1.0, 1.5] {
        let law = ScalingLaw::new(alpha, 40.0)?;
        for csi in Csi::ALL {
            for m in [16, 128, 1024] {
                for (&b, k) in beta.iter().zip([0.0, 1.0, 7.0, 0.3, 100.0]) {
                    let mrc = det_equiv_rate(&law, m, b, k, tau, csi, Receiver::Mrc);
                    let zf = det_equiv_rate(&law, m, b, k, tau, csi, Receiver::Zf);
                    mismatches += usize::from(mrc.to_bits() != zf.to_bits());
                }
            }
        }
    }
    report.checks.push(CheckOutcome::at_most(
        "det-equiv MRC and ZF bit-identical",
        mismatches as f64,
        0.0,
    ));

    let below = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| y - x)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let gap = below(
        &rayleigh_mrc_perfect(64, &beta, p_u),
        &rayleigh_mrc_perfect_lower_bound(64, &beta, p_u),
    );
    report.checks.push(CheckOutcome {
        name: "Rayleigh MRC perfect exceeds M-1 bound".into(),
        passed: gap < 0.0,
        deviation: gap,
        threshold: 0.0,
    });
    let gap = below(
        &rayleigh_mrc_imperfect(64, &beta, p_u, tau),
        &rayleigh_mrc_imperfect_lower_bound(64, &beta, p_u, tau),
    );
    report.checks.push(CheckOutcome {
        name: "Rayleigh MRC imperfect exceeds M-1 bound".into(),
        passed: gap < 0.0,
        deviation: gap,
        threshold: 0.0,
    });
    Ok(())
}

/// Runs the whole suite.
pub fn validate(options: &ValidateOptions) -> Result<ValidationReport> {
    if matches!(options.trials, Some(t) if t < 2) {
        return Err(Error::InvalidArgument(
            "validation needs at least 2 trials".into(),
        ));
    }
    let mut report = ValidationReport::default();
    moment_checks(options, &mut report)?;
    estimator_checks(options, &mut report)?;
    convergence_checks(options, &mut report)?;
    identity_checks(&mut report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_pass() {
        let mut report = ValidationReport::default();
        identity_checks(&mut report).unwrap();
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.checks.len(), 7);
    }

    #[test]
    fn phi_mutation_is_caught_by_lemma2() {
        let options = ValidateOptions {
            trials: Some(20_000),
            phi_perturbation: 0.1,
            ..Default::default()
        };
        let mut report = ValidationReport::default();
        moment_checks(&options, &mut report).unwrap();
        assert!(report
            .group("lemma2 M=8 K=10 E|x_0^H x_1|^2")
            .any(|c| !c.passed));
    }

    #[test]
    fn report_formatting() {
        let report = ValidationReport {
            checks: vec![
                CheckOutcome::at_most("a", 1.0, 2.0),
                CheckOutcome::at_most("b", 3.0, 2.0),
            ],
        };
        let text = report.to_string();
        assert!(text.starts_with("PASS a"));
        assert!(text.ends_with("2 checks, 1 failed"));
        assert!(!report.all_passed());
    }
}
