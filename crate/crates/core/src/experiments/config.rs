//! Experiment configuration read from TOML.
//!
//! ```toml
//! [scenario]
//! n = 10
//! drop_seed = 7
//!
//! [sweep]
//! kind = "m_sweep"
//! grid = [50, 100, 200]
//! p_u_db = 10.0
//! k_db = [-inf, 6.0]
//!
//! [mc]
//! trials = 10000
//! master_seed = 1
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::analytic::ScalingLaw;
use crate::channel::CellLayout;
use crate::error::{Error, Result};
use crate::estimation::DEFAULT_COHERENCE;
use crate::rates::{Csi, Receiver, DEFAULT_TRIALS, MIN_TRIALS};
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub mc: McConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub r_h_m: f64,
    pub v: f64,
    pub sigma_db: f64,
    pub n: usize,
    pub drop_seed: u64,
    /// Draw a fresh user drop at every grid point instead of one per sweep.
    pub redrop_per_point: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let layout = CellLayout::default();
        ScenarioConfig {
            cell_radius_m: layout.cell_radius,
            r_h_m: layout.hole_radius,
            v: layout.path_loss_exponent,
            sigma_db: layout.shadow_sigma_db,
            n: 10,
            drop_seed: 0,
            redrop_per_point: false,
        }
    }
}

impl ScenarioConfig {
    pub fn layout(&self) -> CellLayout {
        CellLayout {
            cell_radius: self.cell_radius_m,
            hole_radius: self.r_h_m,
            path_loss_exponent: self.v,
            shadow_sigma_db: self.sigma_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Grid over `M` at a fixed transmit power.
    MSweep,
    /// Grid over `K` in dB at a fixed `M`.
    KSweep,
    /// Grid over `M` with `p_u = E_u / M^alpha`.
    AlphaSweep,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    pub p_u_db: Option<f64>,
    pub e_u_db: Option<f64>,
    pub alpha: Option<f64>,
    /// Ricean factors in dB for M grids; `-inf` is Rayleigh.
    #[serde(default)]
    pub k_db: Vec<f64>,
    /// Array size for K grids.
    pub m: Option<usize>,
    /// Pilot length, `N` when absent.
    pub tau: Option<usize>,
    #[serde(default = "default_coherence")]
    pub coherence: usize,
    #[serde(default = "default_receivers")]
    pub receivers: Vec<Receiver>,
    #[serde(default = "default_csi")]
    pub csi: Vec<Csi>,
}

fn default_coherence() -> usize {
    DEFAULT_COHERENCE
}

fn default_receivers() -> Vec<Receiver> {
    Receiver::ALL.to_vec()
}

fn default_csi() -> Vec<Csi> {
    Csi::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub trials: usize,
    pub master_seed: u64,
    /// 0 lets the thread pool pick.
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            workers: 0,
        }
    }
}

/// One operating point of a sweep, before any user drop is made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub antennas: usize,
    pub k_db: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn tau(&self) -> usize {
        self.sweep.tau.unwrap_or(self.scenario.n)
    }

    /// Power law of the sweep; a fixed power is the `alpha = 0` case.
    pub fn scaling_law(&self) -> Result<ScalingLaw> {
        let s = &self.sweep;
        let (e_u_db, alpha) = match (s.p_u_db, s.e_u_db, s.alpha) {
            (Some(p), None, None) => (p, 0.0),
            (None, Some(e), Some(a)) => (e, a),
            _ => {
                return Err(Error::Config(
                    "give either p_u_db alone or both e_u_db and alpha".into(),
                ))
            }
        };
        if s.kind == SweepKind::AlphaSweep && s.p_u_db.is_some() {
            return Err(Error::Config("alpha_sweep needs e_u_db and alpha".into()));
        }
        ScalingLaw::new(alpha, db_to_linear(e_u_db)).map_err(|e| Error::Config(e.to_string()))
    }

    /// Power in dB at `M` antennas, `E_u[dB] - 10 alpha log10(M)`.
    pub fn p_u_db_at(&self, antennas: usize) -> Result<f64> {
        let law = self.scaling_law()?;
        let base = self.sweep.p_u_db.or(self.sweep.e_u_db).unwrap_or_default();
        Ok(base - 10.0 * law.alpha() * (antennas as f64).log10())
    }

    /// Operating points in output order.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        match self.sweep.kind {
            SweepKind::KSweep => {
                let m = self.sweep.m.unwrap_or_default();
                self.sweep
                    .grid
                    .iter()
                    .enumerate()
                    .map(|(index, &k_db)| GridPoint {
                        index,
                        antennas: m,
                        k_db,
                    })
                    .collect()
            }
            SweepKind::MSweep | SweepKind::AlphaSweep => self
                .sweep
                .grid
                .iter()
                .enumerate()
                .flat_map(|(index, &m)| {
                    self.sweep.k_db.iter().map(move |&k_db| GridPoint {
                        index,
                        antennas: m as usize,
                        k_db,
                    })
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        self.scenario
            .layout()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let n = self.scenario.n;
        if n == 0 {
            return cfg("scenario.n must be at least 1".into());
        }
        let s = &self.sweep;
        if s.grid.is_empty() {
            return cfg("sweep.grid is empty".into());
        }
        if s.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return cfg("sweep.grid must be strictly increasing".into());
        }
        if s.receivers.is_empty() || s.csi.is_empty() {
            return cfg("sweep.receivers and sweep.csi must be nonempty".into());
        }
        self.scaling_law()?;
        let mut antenna_counts = Vec::new();
        match s.kind {
            SweepKind::KSweep => {
                let Some(m) = s.m else {
                    return cfg("k_sweep needs sweep.m".into());
                };
                if !s.k_db.is_empty() {
                    return cfg("k_sweep takes its K values from sweep.grid, not sweep.k_db".into());
                }
                if s.grid.iter().any(|k| k.is_nan() || *k == f64::INFINITY) {
                    return cfg("K grid values must be finite dB or -inf".into());
                }
                antenna_counts.push(m);
            }
            SweepKind::MSweep | SweepKind::AlphaSweep => {
                if s.m.is_some() {
                    return cfg("sweep.m only applies to k_sweep".into());
                }
                if s.k_db.is_empty() {
                    return cfg("sweep.k_db must list at least one K value".into());
                }
                if s.k_db.iter().any(|k| k.is_nan() || *k == f64::INFINITY) {
                    return cfg("sweep.k_db values must be finite dB or -inf".into());
                }
                for &m in &s.grid {
                    if !(m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64) {
                        return cfg(format!("antenna count {m} is not a positive integer"));
                    }
                    antenna_counts.push(m as usize);
                }
            }
        }
        for m in antenna_counts {
            for kind in &s.receivers {
                kind.check_dimensions(m, n)
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        let tau = self.tau();
        if tau < n {
            return cfg(format!("tau = {tau} is below the user count {n}"));
        }
        if tau > s.coherence {
            return cfg(format!(
                "tau = {tau} exceeds the coherence interval {}",
                s.coherence
            ));
        }
        if self.mc.trials < MIN_TRIALS {
            return cfg(format!("mc.trials must be at least {MIN_TRIALS}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[scenario]
n = 4
drop_seed = 3

[sweep]
kind = "m_sweep"
grid = [50, 100]
p_u_db = 10.0
k_db = [-inf, 6.0]

[mc]
trials = 200
master_seed = 9
"#;

    #[test]
    fn parses_defaults() {
        let c = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(c.scenario.cell_radius_m, 1000.0);
        assert_eq!(c.scenario.v, 3.8);
        assert_eq!(c.sweep.coherence, 196);
        assert_eq!(c.tau(), 4);
        assert_eq!(c.sweep.k_db[0], f64::NEG_INFINITY);
        assert_eq!(c.sweep.receivers, vec![Receiver::Mrc, Receiver::Zf]);
        assert_eq!(c.grid_points().len(), 4);
        assert_eq!(c.scaling_law().unwrap().alpha(), 0.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("drop_seed = 3", "drop_seed = 3\nsigma_bd = 4.0");
        assert!(matches!(
            ExperimentConfig::from_toml(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn grid_must_increase() {
        let text = BASE.replace("[50, 100]", "[100, 50]");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = BASE.replace("[50, 100]", "[]");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn zf_needs_more_antennas_than_users() {
        let text = BASE.replace("[50, 100]", "[4, 100]");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = text.replace("p_u_db = 10.0", "p_u_db = 10.0\nreceivers = [\"mrc\"]");
        assert!(ExperimentConfig::from_toml(&text).is_ok());
    }

    #[test]
    fn power_law_arithmetic() {
        let text = BASE
            .replace("kind = \"m_sweep\"", "kind = \"alpha_sweep\"")
            .replace("p_u_db = 10.0", "e_u_db = 20.0\nalpha = 1.0");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.p_u_db_at(100).unwrap(), 0.0);
        let both = text.replace("alpha = 1.0", "alpha = 1.0\np_u_db = 3.0");
        assert!(ExperimentConfig::from_toml(&both).is_err());
    }

    #[test]
    fn k_sweep_points() {
        let text = BASE
            .replace("kind = \"m_sweep\"", "kind = \"k_sweep\"")
            .replace("grid = [50, 100]", "grid = [-inf, 0.0, 10.0]\nm = 64")
            .replace("k_db = [-inf, 6.0]\n", "");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        let points = c.grid_points();
        assert_eq!(points.len(), 3);
        assert!(points.iter().all(|p| p.antennas == 64));
    }
}
