//! Closed-form second and fourth moments of channel columns.

use nalgebra::DMatrix;

use super::{phi_matrix, require_half_wavelength};
use crate::channel::{FadingProfile, SystemGeometry};
use crate::error::{Error, Result};
use crate::estimation::eta;

/// Per-user `E||x_n||^2`, `E||x_n||^4` and the matrix of `E|x_n^H x_i|^2`
/// (whose diagonal repeats `norm4`).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub norm2: Vec<f64>,
    pub norm4: Vec<f64>,
    pub cross2: DMatrix<f64>,
}

fn check(geometry: &SystemGeometry, profile: &FadingProfile) -> Result<()> {
    require_half_wavelength(geometry)?;
    if geometry.users() != profile.users() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} users, geometry has {}",
            profile.users(),
            geometry.users()
        )));
    }
    Ok(())
}

/// Moments of the small-scale fading columns `h_n`.
pub fn lemma2_moments(geometry: &SystemGeometry, profile: &FadingProfile) -> Result<MomentSet> {
    check(geometry, profile)?;
    lemma2_with_kernel(geometry, profile, &phi_matrix(geometry))
}

/// Same as [`lemma2_moments`] with a caller-supplied `phi` matrix.
pub(crate) fn lemma2_with_kernel(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    phi: &DMatrix<f64>,
) -> Result<MomentSet> {
    let m = geometry.antennas() as f64;
    let k = profile.k_factors();
    let n = profile.users();
    let norm2 = vec![m; n];
    let norm4: Vec<f64> = k
        .iter()
        .map(|kn| (2.0 * m * kn + m) / (kn + 1.0).powi(2) + m * m)
        .collect();
    let cross2 = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            norm4[a]
        } else {
            (k[a] * k[b] * phi[(a, b)].powi(2) + m * (k[a] + k[b]) + m)
                / ((k[a] + 1.0) * (k[b] + 1.0))
        }
    });
    Ok(MomentSet {
        norm2,
        norm4,
        cross2,
    })
}

/// Moments of the estimated channel columns `g_hat_n` for pilot power `p_p`.
pub fn lemma4_moments(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    p_p: f64,
) -> Result<MomentSet> {
    check(geometry, profile)?;
    if !(p_p > 0.0) {
        return Err(Error::InvalidPilot(format!(
            "pilot power {p_p} must be positive"
        )));
    }
    lemma4_with_kernel(geometry, profile, p_p, &phi_matrix(geometry))
}

pub(crate) fn lemma4_with_kernel(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    p_p: f64,
    phi: &DMatrix<f64>,
) -> Result<MomentSet> {
    let m = geometry.antennas() as f64;
    let k = profile.k_factors();
    let beta = profile.gains();
    let eta = eta(beta, p_p);
    let n = profile.users();
    let norm2: Vec<f64> = (0..n)
        .map(|u| beta[u] * m * (k[u] + eta[u]) / (k[u] + 1.0))
        .collect();
    let norm4: Vec<f64> = (0..n)
        .map(|u| {
            let (kn, en) = (k[u], eta[u]);
            beta[u].powi(2) / (kn + 1.0).powi(2)
                * (m * m * kn * kn + (2.0 * m * kn + 2.0 * m * m * kn) * en + (m * m + m) * en * en)
        })
        .collect();
    let cross2 = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            norm4[a]
        } else {
            beta[a] * beta[b] / ((k[a] + 1.0) * (k[b] + 1.0))
                * (k[a] * k[b] * phi[(a, b)].powi(2)
                    + m * k[b] * eta[a]
                    + m * k[a] * eta[b]
                    + m * eta[a] * eta[b])
        }
    });
    Ok(MomentSet {
        norm2,
        norm4,
        cross2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma2_norms() {
        let g = SystemGeometry::new(12, vec![0.1, -0.6]).unwrap();
        let p = FadingProfile::new(vec![0.0, 7.0], vec![1.0, 1.0]).unwrap();
        let s = lemma2_moments(&g, &p).unwrap();
        assert_eq!(s.norm2, vec![12.0, 12.0]);
        assert!((s.norm4[0] - (12.0 + 144.0)).abs() < 1e-12);
        assert_eq!(s.cross2[(0, 0)], s.norm4[0]);
        assert!((s.cross2[(0, 1)] - s.cross2[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn lemma4_reduces_to_lemma2_for_perfect_pilots() {
        let g = SystemGeometry::new(16, vec![0.3, -0.2, 0.9]).unwrap();
        let beta = vec![2.0, 0.5, 1.5];
        let p = FadingProfile::new(vec![0.0, 1.0, 6.0], beta.clone()).unwrap();
        let l2 = lemma2_moments(&g, &p).unwrap();
        let l4 = lemma4_moments(&g, &p, 1e14).unwrap();
        for a in 0..3 {
            assert!((l4.norm2[a] - beta[a] * l2.norm2[a]).abs() < 1e-9 * l4.norm2[a]);
            for b in 0..3 {
                let scaled = beta[a] * beta[b] * l2.cross2[(a, b)];
                assert!((l4.cross2[(a, b)] - scaled).abs() < 1e-9 * scaled.abs().max(1.0));
            }
        }
    }

    #[test]
    fn lemma4_rayleigh_fourth_moment() {
        let g = SystemGeometry::new(10, vec![0.3]).unwrap();
        let p = FadingProfile::new(vec![0.0], vec![0.7]).unwrap();
        let s = lemma4_moments(&g, &p, 4.0).unwrap();
        let eta = 2.8 / 3.8;
        assert!((s.norm4[0] - 0.49 * eta * eta * 110.0).abs() < 1e-12);
    }

    #[test]
    fn non_half_wavelength_spacing_is_rejected() {
        let g = SystemGeometry::with_spacing(8, vec![0.1, 0.2], 0.3).unwrap();
        let p = FadingProfile::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(lemma2_moments(&g, &p).is_err());
    }
}
