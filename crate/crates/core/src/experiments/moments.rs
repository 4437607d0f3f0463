//! Monte Carlo counterparts of the closed-form channel moments.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::analytic::MomentSet;
use crate::channel::{ChannelModel, FadingProfile, SystemGeometry};
use crate::error::Result;
use crate::estimation::{mmse_estimate, PilotScheme};
use crate::linalg::CMatrix;
use crate::rates::run_parallel;
use crate::rng::substream;
use crate::stats::SampleStats;

const LEMMA2_STREAM: u64 = 0x4D02;
const LEMMA4_STREAM: u64 = 0x4D04;

/// Sample statistics of the same quantities a [`MomentSet`] holds.
#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub norm2: Vec<SampleStats>,
    pub norm4: Vec<SampleStats>,
    /// Off-diagonal entries only; `cross2[(n, n)]` repeats `norm4[n]`.
    pub cross2: DMatrix<SampleStats>,
}

/// One compared moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentComparison {
    pub label: String,
    pub closed_form: f64,
    pub estimate: SampleStats,
}

impl MomentComparison {
    pub fn z_score(&self) -> f64 {
        self.estimate.z_score(self.closed_form)
    }
}

/// Per trial: `||x_n||^2` for all n, `||x_n||^4` for all n, then `|x_a^H x_b|^2` for a < b.
fn column_moments(x: &CMatrix) -> Vec<f64> {
    let n = x.ncols();
    let gram = x.ad_mul(x);
    let mut out = Vec::with_capacity(2 * n + n * (n - 1) / 2);
    out.extend((0..n).map(|a| gram[(a, a)].re));
    out.extend((0..n).map(|a| gram[(a, a)].re.powi(2)));
    for a in 0..n {
        for b in a + 1..n {
            out.push(gram[(a, b)].norm_sqr());
        }
    }
    out
}

fn summarize(samples: Vec<Vec<f64>>, users: usize) -> MomentEstimate {
    let width = samples.first().map_or(0, Vec::len);
    let stats: Vec<SampleStats> = (0..width)
        .map(|j| SampleStats::from_slice(&samples.iter().map(|s| s[j]).collect::<Vec<_>>()))
        .collect();
    let norm2 = stats[..users].to_vec();
    let norm4 = stats[users..2 * users].to_vec();
    let mut cross2 = DMatrix::from_fn(users, users, |a, _| norm4[a]);
    let mut idx = 2 * users;
    for a in 0..users {
        for b in a + 1..users {
            cross2[(a, b)] = stats[idx];
            cross2[(b, a)] = stats[idx];
            idx += 1;
        }
    }
    MomentEstimate {
        norm2,
        norm4,
        cross2,
    }
}

/// Moments of the small-scale fading `H` over `trials` draws.
pub fn simulate_lemma2(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<MomentEstimate> {
    let model = ChannelModel::new(geometry, profile)?;
    let samples = run_parallel(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream(seed, LEMMA2_STREAM, t as u64);
                column_moments(&model.draw(&mut rng).h)
            })
            .collect()
    })?;
    Ok(summarize(samples, profile.users()))
}

/// Moments of the MMSE estimate `G_hat` over `trials` draws at pilot power `p_p`.
pub fn simulate_lemma4(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    p_p: f64,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<MomentEstimate> {
    let model = ChannelModel::new(geometry, profile)?;
    let users = profile.users();
    let scheme = PilotScheme::with_pilot_power(users, p_p / users as f64, p_p)?;
    let samples: Vec<Result<Vec<f64>>> = run_parallel(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream(seed, LEMMA4_STREAM, t as u64);
                let draw = model.draw(&mut rng);
                let est = mmse_estimate(&draw, profile, &scheme, &mut rng)?;
                Ok(column_moments(&est.g_hat))
            })
            .collect()
    })?;
    Ok(summarize(
        samples.into_iter().collect::<Result<_>>()?,
        users,
    ))
}

/// Pairs every closed-form moment with its estimate.
pub fn compare_moments(closed: &MomentSet, estimate: &MomentEstimate) -> Vec<MomentComparison> {
    let n = closed.norm2.len();
    let mut out = Vec::new();
    for a in 0..n {
        out.push(MomentComparison {
            label: format!("E||x_{a}||^2"),
            closed_form: closed.norm2[a],
            estimate: estimate.norm2[a],
        });
        out.push(MomentComparison {
            label: format!("E||x_{a}||^4"),
            closed_form: closed.norm4[a],
            estimate: estimate.norm4[a],
        });
        for b in a + 1..n {
            out.push(MomentComparison {
                label: format!("E|x_{a}^H x_{b}|^2"),
                closed_form: closed.cross2[(a, b)],
                estimate: estimate.cross2[(a, b)],
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{lemma2_moments, lemma4_moments};

    #[test]
    fn lemma2_matches_at_small_size() {
        let g = SystemGeometry::new(8, vec![0.4, -0.1]).unwrap();
        let p = FadingProfile::with_common_k(1.0, vec![1.0, 1.0]).unwrap();
        let est = simulate_lemma2(&g, &p, 50_000, 3, 0).unwrap();
        for c in compare_moments(&lemma2_moments(&g, &p).unwrap(), &est) {
            assert!(c.z_score() < 4.0, "{} z = {}", c.label, c.z_score());
        }
    }

    #[test]
    fn lemma4_matches_at_small_size() {
        let g = SystemGeometry::new(16, vec![0.4, -0.1]).unwrap();
        let p = FadingProfile::new(vec![1.0, 1.0], vec![1.0, 0.5]).unwrap();
        let est = simulate_lemma4(&g, &p, 10.0, 50_000, 4, 0).unwrap();
        for c in compare_moments(&lemma4_moments(&g, &p, 10.0).unwrap(), &est) {
            assert!(c.z_score() < 4.0, "{} z = {}", c.label, c.z_score());
        }
    }

    #[test]
    fn estimates_do_not_depend_on_workers() {
        let g = SystemGeometry::new(8, vec![0.4, -0.1, 0.9]).unwrap();
        let p = FadingProfile::with_common_k(2.0, vec![1.0; 3]).unwrap();
        let a = simulate_lemma2(&g, &p, 500, 1, 1).unwrap();
        let b = simulate_lemma2(&g, &p, 500, 1, 7).unwrap();
        assert_eq!(a.cross2, b.cross2);
    }
}
