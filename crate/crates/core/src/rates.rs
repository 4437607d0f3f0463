//! Per-realization SINR of MRC and ZF receivers and Monte Carlo rate
//! estimation under perfect and estimated CSI.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::channel::{ChannelModel, FadingProfile, SystemGeometry};
use crate::error::{Error, Result};
use crate::estimation::{error_interference, mmse_estimate, EstimateDraw, PilotScheme};
use crate::linalg::{gram, inverse_diagonal, CMatrix, MAX_CONDITION};
use crate::rng::substream;
use crate::stats::SampleStats;

/// Largest tolerated fraction of discarded (ill-conditioned) trials.
pub const MAX_DISCARD_FRACTION: f64 = 1e-3;

/// Smallest accepted Monte Carlo trial count.
pub const MIN_TRIALS: usize = 100;

/// Default trial count per operating point.
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    Mrc,
    Zf,
}

impl Receiver {
    pub const ALL: [Receiver; 2] = [Receiver::Mrc, Receiver::Zf];

    pub fn check_dimensions(self, antennas: usize, users: usize) -> Result<()> {
        if self == Receiver::Zf && antennas < users + 1 {
            return Err(Error::TooFewAntennas {
                m: antennas,
                n: users,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Receiver::Mrc => "mrc",
            Receiver::Zf => "zf",
        })
    }
}

impl FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrc" => Ok(Receiver::Mrc),
            "zf" => Ok(Receiver::Zf),
            other => Err(Error::Config(format!(
                "unknown receiver `{other}` (expected mrc or zf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Csi {
    Perfect,
    Imperfect,
}

impl Csi {
    pub const ALL: [Csi; 2] = [Csi::Perfect, Csi::Imperfect];
}

impl fmt::Display for Csi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Csi::Perfect => "perfect",
            Csi::Imperfect => "imperfect",
        })
    }
}

impl FromStr for Csi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "perfect" => Ok(Csi::Perfect),
            "imperfect" => Ok(Csi::Imperfect),
            other => Err(Error::Config(format!(
                "unknown CSI state `{other}` (expected perfect or imperfect)"
            ))),
        }
    }
}

/// Monte Carlo rate of every user for one receiver and CSI state.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    /// Mean `log2(1 + SINR)` per user, bits/s/Hz.
    pub per_user: Vec<f64>,
    /// Sum rate including the `(T - tau) / T` factor for estimated CSI.
    pub sum_rate: f64,
    pub stderr: Vec<f64>,
    /// Standard error of `sum_rate`, from the per-trial sums.
    pub sum_stderr: f64,
    pub trials: usize,
    pub discarded: usize,
}

/// MRC SINR of every user from the Gram matrix `A^H A` of the receiver's channel.
///
/// `noise_inflation` is 1 for perfect CSI and `1 + sum_i p_u err_var_i` otherwise.
fn mrc_from_gram(gram: &CMatrix, p_u: f64, noise_inflation: f64) -> Vec<f64> {
    let n = gram.nrows();
    (0..n)
        .map(|u| {
            let norm2 = gram[(u, u)].re;
            let interference: f64 = (0..n)
                .filter(|&i| i != u)
                .map(|i| gram[(u, i)].norm_sqr())
                .sum();
            p_u * norm2 * norm2 / (p_u * interference + noise_inflation * norm2)
        })
        .collect()
}

fn zf_from_gram(gram: &CMatrix, p_u: f64, noise_inflation: f64) -> Result<Vec<f64>> {
    let diag =
        inverse_diagonal(gram, MAX_CONDITION).map_err(|cond| Error::SingularGram { cond })?;
    Ok(diag
        .into_iter()
        .map(|d| p_u / (noise_inflation * d))
        .collect())
}

fn sinr_from_gram(
    gram: &CMatrix,
    p_u: f64,
    noise_inflation: f64,
    kind: Receiver,
) -> Result<Vec<f64>> {
    match kind {
        Receiver::Mrc => Ok(mrc_from_gram(gram, p_u, noise_inflation)),
        Receiver::Zf => zf_from_gram(gram, p_u, noise_inflation),
    }
}

/// SINR of every user with the true channel known.
pub fn sinr_perfect_all(g: &CMatrix, p_u: f64, kind: Receiver) -> Result<Vec<f64>> {
    kind.check_dimensions(g.nrows(), g.ncols())?;
    sinr_from_gram(&gram(g), p_u, 1.0, kind)
}

/// SINR of user `n` with the true channel known.
pub fn sinr_perfect(g: &CMatrix, n: usize, p_u: f64, kind: Receiver) -> Result<f64> {
    check_user(n, g.ncols())?;
    Ok(sinr_perfect_all(g, p_u, kind)?[n])
}

/// SINR of every user when detecting with the MMSE estimate, estimation
/// error treated as worst-case uncorrelated Gaussian noise.
pub fn sinr_imperfect_all(
    est: &EstimateDraw,
    profile: &FadingProfile,
    scheme: &PilotScheme,
    kind: Receiver,
) -> Result<Vec<f64>> {
    kind.check_dimensions(est.g_hat.nrows(), est.g_hat.ncols())?;
    let inflation = 1.0 + error_interference(profile, scheme);
    sinr_from_gram(&gram(&est.g_hat), scheme.p_u(), inflation, kind)
}

pub fn sinr_imperfect(
    est: &EstimateDraw,
    profile: &FadingProfile,
    scheme: &PilotScheme,
    n: usize,
    kind: Receiver,
) -> Result<f64> {
    check_user(n, est.g_hat.ncols())?;
    Ok(sinr_imperfect_all(est, profile, scheme, kind)?[n])
}

fn check_user(n: usize, users: usize) -> Result<()> {
    if n >= users {
        return Err(Error::InvalidArgument(format!(
            "user index {n} out of range for {users} users"
        )));
    }
    Ok(())
}

/// Sum of per-user rates, scaled by `(T - tau) / T` for estimated CSI.
pub fn sum_rate(per_user: &[f64], csi: Csi, coherence: usize, tau: usize) -> Result<f64> {
    if tau > coherence {
        return Err(Error::InvalidPilot(format!(
            "tau = {tau} exceeds T = {coherence}"
        )));
    }
    let total: f64 = per_user.iter().sum();
    Ok(match csi {
        Csi::Perfect => total,
        Csi::Imperfect => total * (coherence - tau) as f64 / coherence as f64,
    })
}

/// Fixed large-scale quantities shared by all trials of an operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: SystemGeometry,
    pub profile: FadingProfile,
}

impl Scenario {
    pub fn new(geometry: SystemGeometry, profile: FadingProfile) -> Result<Self> {
        if geometry.users() != profile.users() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} users, geometry has {}",
                profile.users(),
                geometry.users()
            )));
        }
        Ok(Scenario { geometry, profile })
    }
}

/// Trial count, seeding and parallelism of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloPlan {
    pub trials: usize,
    pub master_seed: u64,
    /// Identifies the operating point; trial substreams are keyed by it.
    pub stream_key: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl MonteCarloPlan {
    pub fn new(trials: usize, master_seed: u64) -> Self {
        MonteCarloPlan {
            trials,
            master_seed,
            stream_key: 0,
            workers: 0,
        }
    }

    pub fn with_stream_key(mut self, key: u64) -> Self {
        self.stream_key = key;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

pub(crate) fn run_parallel<T, F>(workers: usize, job: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Rate of one receiver/CSI combination.
pub fn estimate_rate(
    scenario: &Scenario,
    scheme: &PilotScheme,
    kind: Receiver,
    csi: Csi,
    plan: &MonteCarloPlan,
) -> Result<RateEstimate> {
    Ok(estimate_rates(scenario, scheme, &[(kind, csi)], plan)?.remove(0))
}

/// Rates of several receiver/CSI combinations evaluated on the same draws.
///
/// Each trial draws the channel first and the pilot noise second from its own
/// substream, so a combination's result does not depend on which other
/// combinations are requested alongside it.
pub fn estimate_rates(
    scenario: &Scenario,
    scheme: &PilotScheme,
    targets: &[(Receiver, Csi)],
    plan: &MonteCarloPlan,
) -> Result<Vec<RateEstimate>> {
    if plan.trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TRIALS} trials, got {}",
            plan.trials
        )));
    }
    let (m, n) = (scenario.geometry.antennas(), scenario.geometry.users());
    for (kind, _) in targets {
        kind.check_dimensions(m, n)?;
    }
    let needs_estimate = targets.iter().any(|(_, c)| *c == Csi::Imperfect);
    if needs_estimate {
        scheme.check_users(n)?;
    }
    let model = ChannelModel::new(&scenario.geometry, &scenario.profile)?;
    let inflation = 1.0 + error_interference(&scenario.profile, scheme);
    let p_u = scheme.p_u();

    let trial = |t: usize| -> Vec<Option<Vec<f64>>> {
        let mut rng = substream(plan.master_seed, plan.stream_key, t as u64);
        let draw = model.draw(&mut rng);
        let perfect_gram = targets
            .iter()
            .any(|(_, c)| *c == Csi::Perfect)
            .then(|| gram(&draw.g));
        let est_gram = needs_estimate.then(|| {
            let est = mmse_estimate(&draw, &scenario.profile, scheme, &mut rng)
                .expect("validated scheme");
            gram(&est.g_hat)
        });
        targets
            .iter()
            .map(|(kind, csi)| {
                let sinr = match csi {
                    Csi::Perfect => sinr_from_gram(perfect_gram.as_ref().unwrap(), p_u, 1.0, *kind),
                    Csi::Imperfect => {
                        sinr_from_gram(est_gram.as_ref().unwrap(), p_u, inflation, *kind)
                    }
                };
                sinr.ok()
                    .map(|s| s.into_iter().map(|x| (1.0 + x).log2()).collect())
            })
            .collect()
    };

    let outcomes: Vec<Vec<Option<Vec<f64>>>> = run_parallel(plan.workers, || {
        (0..plan.trials).into_par_iter().map(trial).collect()
    })?;

    targets
        .iter()
        .enumerate()
        .map(|(idx, (_, csi))| {
            let kept: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o[idx].as_ref()).collect();
            let discarded = plan.trials - kept.len();
            if discarded as f64 > MAX_DISCARD_FRACTION * plan.trials as f64 {
                return Err(Error::TooManyDiscards {
                    discarded,
                    trials: plan.trials,
                });
            }
            let factor = match csi {
                Csi::Perfect => 1.0,
                Csi::Imperfect => scheme.payload_fraction(),
            };
            let mut per_user = Vec::with_capacity(n);
            let mut stderr = Vec::with_capacity(n);
            for u in 0..n {
                let column: Vec<f64> = kept.iter().map(|r| r[u]).collect();
                let s = SampleStats::from_slice(&column);
                per_user.push(s.mean);
                stderr.push(s.stderr);
            }
            let sums: Vec<f64> = kept.iter().map(|r| r.iter().sum()).collect();
            let sum_stats = SampleStats::from_slice(&sums);
            Ok(RateEstimate {
                sum_rate: sum_rate(&per_user, *csi, scheme.coherence(), scheme.tau())?,
                sum_stderr: sum_stats.stderr * factor,
                per_user,
                stderr,
                trials: plan.trials,
                discarded,
            })
        })
        .collect()
}
