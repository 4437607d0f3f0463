//! Sweep engine: one user drop, a Monte Carlo run and the matching closed
//! forms at every grid point.

use crate::analytic::{
    approx_mrc_imperfect, approx_mrc_perfect, approx_zf_imperfect, approx_zf_perfect,
    det_equiv_rate, ScalingLaw,
};
use crate::channel::{drop_users, FadingProfile, ScenarioDrop, SystemGeometry};
use crate::error::Result;
use crate::estimation::PilotScheme;
use crate::rates::{estimate_rates, sum_rate, Csi, MonteCarloPlan, Receiver, Scenario};
use crate::rng::{combine_keys, substream};
use crate::units::db_to_linear;

use super::config::{ExperimentConfig, GridPoint, ScenarioConfig};

/// Stream key reserved for user drops.
const DROP_STREAM: u64 = 0xD809;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario_id: u64,
    pub antennas: usize,
    pub users: usize,
    pub k_db: f64,
    pub p_u_db: f64,
    pub alpha: f64,
    pub receiver: Receiver,
    pub csi: Csi,
    pub rate_sim: f64,
    pub rate_approx: f64,
    pub rate_det_equiv: f64,
    pub stderr: f64,
    pub trials: usize,
    pub discarded: usize,
    pub seed: u64,
}

/// User drop number `scenario_id` of a configuration.
pub fn scenario_drop(scenario: &ScenarioConfig, scenario_id: u64) -> Result<ScenarioDrop> {
    let mut rng = substream(scenario.drop_seed, DROP_STREAM, scenario_id);
    drop_users(&scenario.layout(), scenario.n, &mut rng)
}

/// Per-user closed-form approximation for one receiver and CSI state.
pub fn approx_rates(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    scheme: &PilotScheme,
    receiver: Receiver,
    csi: Csi,
) -> Result<Vec<f64>> {
    match (receiver, csi) {
        (Receiver::Mrc, Csi::Perfect) => approx_mrc_perfect(geometry, profile, scheme.p_u()),
        (Receiver::Zf, Csi::Perfect) => approx_zf_perfect(geometry, profile, scheme.p_u()),
        (Receiver::Mrc, Csi::Imperfect) => approx_mrc_imperfect(geometry, profile, scheme),
        (Receiver::Zf, Csi::Imperfect) => approx_zf_imperfect(geometry, profile, scheme),
    }
}

fn point_rows(
    config: &ExperimentConfig,
    law: &ScalingLaw,
    point: &GridPoint,
    ordinal: usize,
    drop: &ScenarioDrop,
    scenario_id: u64,
) -> Result<Vec<SweepRow>> {
    let m = point.antennas;
    let n = config.scenario.n;
    let tau = config.tau();
    let coherence = config.sweep.coherence;
    let k = db_to_linear(point.k_db);
    let geometry = drop.geometry(m)?;
    let profile = drop.profile(k)?;
    let p_u_db = config.p_u_db_at(m)?;
    let scheme = PilotScheme::new(tau, db_to_linear(p_u_db))?.with_coherence(coherence)?;

    let targets: Vec<(Receiver, Csi)> = config
        .sweep
        .receivers
        .iter()
        .flat_map(|r| config.sweep.csi.iter().map(move |c| (*r, *c)))
        .collect();
    let plan = MonteCarloPlan::new(config.mc.trials, config.mc.master_seed)
        .with_stream_key(combine_keys(scenario_id, ordinal as u64))
        .with_workers(config.mc.workers);
    let scenario = Scenario::new(geometry.clone(), profile.clone())?;
    let estimates = estimate_rates(&scenario, &scheme, &targets, &plan)?;

    targets
        .iter()
        .zip(estimates)
        .map(|(&(receiver, csi), est)| {
            let approx = approx_rates(&geometry, &profile, &scheme, receiver, csi)?;
            let det: Vec<f64> = profile
                .gains()
                .iter()
                .map(|&b| det_equiv_rate(law, m, b, k, tau, csi, receiver))
                .collect();
            Ok(SweepRow {
                scenario_id,
                antennas: m,
                users: n,
                k_db: point.k_db,
                p_u_db,
                alpha: law.alpha(),
                receiver,
                csi,
                rate_sim: est.sum_rate,
                rate_approx: sum_rate(&approx, csi, coherence, tau)?,
                rate_det_equiv: sum_rate(&det, csi, coherence, tau)?,
                stderr: est.sum_stderr,
                trials: est.trials,
                discarded: est.discarded,
                seed: config.mc.master_seed,
            })
        })
        .collect()
}

/// Evaluates every grid point of `config` in grid order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let law = config.scaling_law()?;
    let mut shared = None;
    let mut rows = Vec::new();
    for (ordinal, point) in config.grid_points().iter().enumerate() {
        let scenario_id = if config.scenario.redrop_per_point {
            point.index as u64
        } else {
            0
        };
        let drop = match (&shared, config.scenario.redrop_per_point) {
            (Some(d), false) => d,
            _ => {
                shared = Some(scenario_drop(&config.scenario, scenario_id)?);
                shared.as_ref().unwrap()
            }
        };
        rows.extend(point_rows(config, &law, point, ordinal, drop, scenario_id)?);
    }
    Ok(rows)
}
