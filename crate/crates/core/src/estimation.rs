//! Pilot-based MMSE estimation of the scattered channel component.
//!
//! The LOS part and the K-factors are known at the receiver; only
//! `G_w = H_w diag(sqrt(beta))` is estimated from orthogonal pilots. Since the
//! whitened pilot noise `W = N F*` is i.i.d. CN(0, 1), the estimate is drawn
//! directly as `(G_w + W / sqrt(p_p)) diag(eta)` without forming the pilot
//! matrices.

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::{ChannelDraw, FadingProfile};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::complex_normal;

/// Coherence interval (symbols) used when none is given.
pub const DEFAULT_COHERENCE: usize = 196;

/// Training length, data power, pilot power and coherence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotScheme {
    tau: usize,
    p_u: f64,
    p_p: f64,
    coherence: usize,
}

impl PilotScheme {
    /// `p_p = tau * p_u`.
    pub fn new(tau: usize, p_u: f64) -> Result<Self> {
        Self::with_pilot_power(tau, p_u, tau as f64 * p_u)
    }

    /// Decouples the pilot power from `tau * p_u` (used for limit checks).
    pub fn with_pilot_power(tau: usize, p_u: f64, p_p: f64) -> Result<Self> {
        if tau == 0 {
            return Err(Error::InvalidPilot("tau must be positive".into()));
        }
        if !(p_u > 0.0 && p_u.is_finite()) {
            return Err(Error::InvalidPilot(format!(
                "data power {p_u} must be positive"
            )));
        }
        if !(p_p > 0.0 && p_p.is_finite()) {
            return Err(Error::InvalidPilot(format!(
                "pilot power {p_p} must be positive"
            )));
        }
        Ok(PilotScheme {
            tau,
            p_u,
            p_p,
            coherence: DEFAULT_COHERENCE.max(tau),
        })
    }

    pub fn with_coherence(mut self, coherence: usize) -> Result<Self> {
        if self.tau > coherence {
            return Err(Error::InvalidPilot(format!(
                "tau = {} exceeds T = {coherence}",
                self.tau
            )));
        }
        self.coherence = coherence;
        Ok(self)
    }

    /// Orthogonal pilots need `tau >= N`.
    pub fn check_users(&self, users: usize) -> Result<()> {
        if self.tau < users {
            return Err(Error::InvalidPilot(format!(
                "tau = {} < N = {users}",
                self.tau
            )));
        }
        Ok(())
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn p_u(&self) -> f64 {
        self.p_u
    }

    pub fn p_p(&self) -> f64 {
        self.p_p
    }

    pub fn coherence(&self) -> usize {
        self.coherence
    }

    /// `(T - tau) / T`.
    pub fn payload_fraction(&self) -> f64 {
        (self.coherence - self.tau) as f64 / self.coherence as f64
    }
}

/// One realization of the channel estimate and its error statistics.
#[derive(Debug, Clone)]
pub struct EstimateDraw {
    pub g_hat: CMatrix,
    /// Diagonal of `(D^-1 / p_p + I)^-1`.
    pub d_tilde: Vec<f64>,
    pub eta: Vec<f64>,
    /// Per-entry variance of the estimation error, per user.
    pub error_var: Vec<f64>,
}

impl EstimateDraw {
    /// `G_hat - G`.
    pub fn error(&self, draw: &ChannelDraw) -> CMatrix {
        &self.g_hat - &draw.g
    }
}

/// `beta / ((1 + p_p beta)(K + 1))`.
pub fn error_variance(beta: f64, k: f64, p_p: f64) -> f64 {
    beta / ((1.0 + p_p * beta) * (k + 1.0))
}

/// `p_p beta / (1 + p_p beta)` per user.
pub fn eta(beta: &[f64], p_p: f64) -> Vec<f64> {
    beta.iter().map(|b| eta_single(*b, p_p)).collect()
}

pub(crate) fn eta_single(beta: f64, p_p: f64) -> f64 {
    let x = p_p * beta;
    x / (1.0 + x)
}

/// Sum over users of the per-user estimation error power, `sum_i p_u * error_var_i`.
pub fn error_interference(profile: &FadingProfile, scheme: &PilotScheme) -> f64 {
    profile
        .gains()
        .iter()
        .zip(profile.k_factors())
        .map(|(b, k)| scheme.p_u() * error_variance(*b, *k, scheme.p_p()))
        .sum()
}

/// Draws the whitened pilot noise and forms the MMSE channel estimate for `draw`.
pub fn mmse_estimate<R: Rng + ?Sized>(
    draw: &ChannelDraw,
    profile: &FadingProfile,
    scheme: &PilotScheme,
    rng: &mut R,
) -> Result<EstimateDraw> {
    let (m, n) = draw.h_w.shape();
    if profile.users() != n {
        return Err(Error::InvalidProfile(format!(
            "profile has {} users, draw has {n}",
            profile.users()
        )));
    }
    let p_p = scheme.p_p();
    if !(p_p > 0.0) {
        return Err(Error::InvalidPilot("pilot power must be positive".into()));
    }
    let noise_scale = 1.0 / p_p.sqrt();
    let eta = eta(profile.gains(), p_p);
    let los = profile.los_weights();
    let scatter = profile.scatter_weights();
    let w = DMatrix::from_vec(
        m,
        n,
        (0..m * n).map(|_| complex_normal(rng)).collect::<Vec<_>>(),
    );

    let mut g_hat = CMatrix::zeros(m, n);
    for col in 0..n {
        let amp = profile.gains()[col].sqrt();
        for row in 0..m {
            let g_w = draw.h_w[(row, col)] * amp;
            let g_w_hat = (g_w + w[(row, col)] * noise_scale) * eta[col];
            g_hat[(row, col)] = draw.h_bar[(row, col)] * (amp * los[col]) + g_w_hat * scatter[col];
        }
    }
    let error_var = profile
        .gains()
        .iter()
        .zip(profile.k_factors())
        .map(|(b, k)| error_variance(*b, *k, p_p))
        .collect();
    Ok(EstimateDraw {
        g_hat,
        d_tilde: eta.clone(),
        eta,
        error_var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_fast_fading, ChannelModel, SystemGeometry};
    use crate::rng::substream;
    use crate::stats::SampleStats;

    fn max_abs(a: &CMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn error_variance_values() {
        assert!((error_variance(1.0, 0.0, 10.0) - 1.0 / 11.0).abs() < 1e-15);
        assert!((error_variance(1.0, 1.0, 10.0) - 1.0 / 22.0).abs() < 1e-15);
        assert!((error_variance(2.0, 0.0, 10.0) - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn eta_values_and_limits() {
        assert!((eta(&[1.0], 10.0)[0] - 10.0 / 11.0).abs() < 1e-15);
        assert!((eta(&[1.0], 1e15)[0] - 1.0).abs() < 1e-12);
        assert!(eta(&[1.0], 1e-15)[0] < 1e-12);
    }

    #[test]
    fn scheme_couples_pilot_power() {
        let s = PilotScheme::new(10, 2.5).unwrap();
        assert_eq!(s.p_p(), 25.0);
        assert_eq!(s.coherence(), 196);
        assert!(s.check_users(11).is_err());
        assert!(PilotScheme::new(10, 0.0).is_err());
        assert!(PilotScheme::with_pilot_power(10, 1.0, 0.0).is_err());
        assert!(PilotScheme::new(200, 1.0)
            .unwrap()
            .with_coherence(196)
            .is_err());
    }

    fn setup() -> (SystemGeometry, FadingProfile) {
        (
            SystemGeometry::new(12, vec![0.3, -0.7]).unwrap(),
            FadingProfile::new(vec![0.5, 3.0], vec![1.0, 0.2]).unwrap(),
        )
    }

    #[test]
    fn strong_pilots_recover_the_channel() {
        let (g, p) = setup();
        let mut rng = substream(1, 0, 0);
        let d = draw_fast_fading(&g, &p, &mut rng).unwrap();
        let s = PilotScheme::with_pilot_power(2, 1.0, 1e12).unwrap();
        let e = mmse_estimate(&d, &p, &s, &mut rng).unwrap();
        assert!(max_abs(&e.error(&d)) < 1e-4);
    }

    #[test]
    fn weak_pilots_leave_only_los() {
        let (g, p) = setup();
        let mut rng = substream(1, 0, 1);
        let d = draw_fast_fading(&g, &p, &mut rng).unwrap();
        let s = PilotScheme::with_pilot_power(2, 1.0, 1e-12).unwrap();
        let e = mmse_estimate(&d, &p, &s, &mut rng).unwrap();
        let mut los = d.h_bar.clone();
        for (col, w) in p.los_weights().iter().enumerate() {
            let scale = w * p.gains()[col].sqrt();
            los.column_mut(col).scale_mut(scale);
        }
        assert!(max_abs(&(&e.g_hat - &los)) < 1e-4);
    }

    #[test]
    fn estimate_is_uncorrelated_with_its_error() {
        let (g, p) = setup();
        let model = ChannelModel::new(&g, &p).unwrap();
        let s = PilotScheme::new(2, 5.0).unwrap();
        let trials = 100_000;
        for user in 0..2 {
            let mut re = Vec::with_capacity(trials);
            let mut im = Vec::with_capacity(trials);
            let mean_hat =
                model.steering()[(4, user)] * (p.los_weights()[user] * p.gains()[user].sqrt());
            for t in 0..trials {
                let mut rng = substream(9, user as u64, t as u64);
                let d = model.draw(&mut rng);
                let e = mmse_estimate(&d, &p, &s, &mut rng).unwrap();
                let xi = e.g_hat[(4, user)] - d.g[(4, user)];
                let prod = (e.g_hat[(4, user)] - mean_hat).conj() * xi;
                re.push(prod.re);
                im.push(prod.im);
            }
            assert!(SampleStats::from_slice(&re).z_score(0.0) < 4.0);
            assert!(SampleStats::from_slice(&im).z_score(0.0) < 4.0);
        }
    }
}
