//! Closed-form rate results: finite-M approximations, deterministic
//! equivalents, power-scaling limits and channel moments.

mod approx;
mod moments;

pub use approx::{
    approx_mrc_imperfect, approx_mrc_perfect, approx_zf_imperfect, approx_zf_perfect,
    k_infinity_approx, rayleigh_mrc_imperfect, rayleigh_mrc_imperfect_lower_bound,
    rayleigh_mrc_perfect, rayleigh_mrc_perfect_lower_bound, sigma_hat, sigma_tilde,
};
pub use moments::{lemma2_moments, lemma4_moments, MomentSet};
pub(crate) use moments::{lemma2_with_kernel, lemma4_with_kernel};

use nalgebra::DMatrix;

use crate::channel::{phi, FadingProfile, SystemGeometry, HALF_WAVELENGTH};
use crate::error::{Error, Result};
use crate::rates::{Csi, Receiver};
use crate::stats::SampleStats;

/// Power law `p_u = E_u / M^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLaw {
    alpha: f64,
    e_u: f64,
}

impl ScalingLaw {
    pub fn new(alpha: f64, e_u: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scaling exponent {alpha} must be >= 0"
            )));
        }
        if !(e_u > 0.0 && e_u.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "power budget {e_u} must be positive"
            )));
        }
        Ok(Self { alpha, e_u })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn e_u(&self) -> f64 {
        self.e_u
    }

    pub fn power_at(&self, antennas: usize) -> f64 {
        self.e_u / (antennas as f64).powf(self.alpha)
    }
}

pub(crate) fn require_half_wavelength(geometry: &SystemGeometry) -> Result<()> {
    if geometry.is_half_wavelength() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!(
            "closed forms need spacing ratio {HALF_WAVELENGTH}, got {}",
            geometry.spacing_ratio()
        )))
    }
}

pub(crate) fn check_inputs(geometry: &SystemGeometry, profile: &FadingProfile) -> Result<()> {
    if geometry.users() != profile.users() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} users, geometry has {}",
            profile.users(),
            geometry.users()
        )));
    }
    Ok(())
}

/// Symmetric matrix of `phi(theta_n, theta_i, M)`; the diagonal is `M`.
pub fn phi_matrix(geometry: &SystemGeometry) -> DMatrix<f64> {
    let theta = geometry.angles();
    let m = geometry.antennas();
    DMatrix::from_fn(theta.len(), theta.len(), |a, b| phi(theta[a], theta[b], m))
}

/// Large-M deterministic equivalent of one user's rate under `law`.
///
/// MRC and ZF share the same equivalent, so `kind` does not change the result.
pub fn det_equiv_rate(
    law: &ScalingLaw,
    antennas: usize,
    beta: f64,
    k: f64,
    tau: usize,
    csi: Csi,
    _kind: Receiver,
) -> f64 {
    let m = antennas as f64;
    let (alpha, e_u) = (law.alpha, law.e_u);
    let snr = match csi {
        Csi::Perfect => e_u * beta / m.powf(alpha - 1.0),
        Csi::Imperfect => {
            e_u * beta * k / (m.powf(alpha - 1.0) * (k + 1.0))
                + tau as f64 * e_u * e_u * beta * beta / (m.powf(2.0 * alpha - 1.0) * (k + 1.0))
        }
    };
    (1.0 + snr).log2()
}

/// Rate reached as `M -> infinity` under the largest admissible power cut.
///
/// Perfect CSI and LOS imperfect CSI use `p_u = E_u / M`; Rayleigh imperfect
/// CSI uses `p_u = E_u / sqrt(M)`.
pub fn scaled_power_limit(k: f64, e_u: f64, beta: f64, tau: usize, csi: Csi) -> f64 {
    let snr = match csi {
        Csi::Perfect => e_u * beta,
        Csi::Imperfect if k > 0.0 => k * e_u * beta / (k + 1.0),
        Csi::Imperfect => tau as f64 * e_u * e_u * beta * beta,
    };
    (1.0 + snr).log2()
}

/// Gap between `log2(1 + E[X]/E[Y])` and `E[log2(1 + X/Y)]`-type bounds,
/// estimated from paired samples of the numerator `X` and denominator `Y`.
pub fn lemma0_offset(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "need equal nonempty sample sets, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let total: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let s_total = SampleStats::from_slice(&total);
    let s_y = SampleStats::from_slice(y);
    if !(s_total.mean > 0.0 && s_y.mean > 0.0) {
        return Err(Error::InvalidArgument(
            "sample means must be positive".into(),
        ));
    }
    let rel = |s: &SampleStats| s.variance / (s.mean * s.mean);
    Ok(((1.0 + rel(&s_total)) * (1.0 + rel(&s_y))).log2())
}
