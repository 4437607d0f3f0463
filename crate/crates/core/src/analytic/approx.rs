//! Finite-M rate approximations, their Rayleigh special cases and the
//! K -> infinity limits.

use num_complex::Complex64;

use super::{check_inputs, phi_matrix, require_half_wavelength};
use crate::channel::{steering_matrix, FadingProfile, SystemGeometry};
use crate::error::{Error, Result};
use crate::estimation::{error_interference, eta, PilotScheme};
use crate::linalg::{inverse_diagonal, CMatrix, MAX_CONDITION};
use crate::rates::Receiver;

fn rate(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// MRC with the true channel known.
pub fn approx_mrc_perfect(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    p_u: f64,
) -> Result<Vec<f64>> {
    check_inputs(geometry, profile)?;
    require_half_wavelength(geometry)?;
    let phi = phi_matrix(geometry);
    let m = geometry.antennas() as f64;
    let (k, beta) = (profile.k_factors(), profile.gains());
    let n = profile.users();
    Ok((0..n)
        .map(|u| {
            let kn = k[u];
            let interference: f64 = (0..n)
                .filter(|&i| i != u)
                .map(|i| {
                    beta[i] * (kn * k[i] * phi[(u, i)].powi(2) + m * (kn + k[i]) + m) / (k[i] + 1.0)
                })
                .sum();
            let num = p_u * beta[u] * (2.0 * m * kn + m + m * m * (kn + 1.0).powi(2));
            let den = p_u * (kn + 1.0) * interference + m * (kn + 1.0).powi(2);
            rate(num / den)
        })
        .collect())
}

/// Rayleigh (K = 0) form of [`approx_mrc_perfect`].
pub fn rayleigh_mrc_perfect(antennas: usize, beta: &[f64], p_u: f64) -> Vec<f64> {
    rayleigh_mrc_perfect_with(antennas as f64 + 1.0, beta, p_u)
}

/// Earlier Rayleigh lower bound with `M - 1` in place of `M + 1`.
pub fn rayleigh_mrc_perfect_lower_bound(antennas: usize, beta: &[f64], p_u: f64) -> Vec<f64> {
    rayleigh_mrc_perfect_with(antennas as f64 - 1.0, beta, p_u)
}

fn rayleigh_mrc_perfect_with(gain: f64, beta: &[f64], p_u: f64) -> Vec<f64> {
    let total: f64 = beta.iter().sum();
    beta.iter()
        .map(|b| rate(p_u * b * gain / (p_u * (total - b) + 1.0)))
        .collect()
}

/// MRC detecting with the MMSE estimate.
pub fn approx_mrc_imperfect(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    scheme: &PilotScheme,
) -> Result<Vec<f64>> {
    check_inputs(geometry, profile)?;
    require_half_wavelength(geometry)?;
    let phi = phi_matrix(geometry);
    let m = geometry.antennas() as f64;
    let (k, beta) = (profile.k_factors(), profile.gains());
    let (p_u, p_p) = (scheme.p_u(), scheme.p_p());
    let eta = eta(beta, p_p);
    let n = profile.users();
    Ok((0..n)
        .map(|u| {
            let (kn, en) = (k[u], eta[u]);
            let interference: f64 = (0..n)
                .filter(|&i| i != u)
                .map(|i| {
                    beta[i] * (kn * k[i] * phi[(u, i)].powi(2) + m * en * (k[i] + 1.0) + m * kn)
                        / (k[i] + 1.0)
                })
                .sum();
            let num = p_u
                * beta[u]
                * (m * m * kn * kn
                    + (2.0 * m * kn + 2.0 * m * m * kn) * en
                    + (m + m * m) * en * en);
            let den = p_u * (kn + 1.0) * interference
                + m * p_u * beta[u] * (kn + en) / (1.0 + beta[u] * p_p)
                + m * (kn + 1.0) * (kn + en);
            rate(num / den)
        })
        .collect())
}

/// Rayleigh (K = 0) form of [`approx_mrc_imperfect`] with `p_p = tau p_u`.
pub fn rayleigh_mrc_imperfect(antennas: usize, beta: &[f64], p_u: f64, tau: usize) -> Vec<f64> {
    rayleigh_mrc_imperfect_with(antennas as f64 + 1.0, beta, p_u, tau)
}

/// Earlier Rayleigh estimated-CSI lower bound with `M - 1` in place of `M + 1`.
pub fn rayleigh_mrc_imperfect_lower_bound(
    antennas: usize,
    beta: &[f64],
    p_u: f64,
    tau: usize,
) -> Vec<f64> {
    rayleigh_mrc_imperfect_with(antennas as f64 - 1.0, beta, p_u, tau)
}

fn rayleigh_mrc_imperfect_with(gain: f64, beta: &[f64], p_u: f64, tau: usize) -> Vec<f64> {
    let tau = tau as f64;
    let total: f64 = beta.iter().sum();
    beta.iter()
        .map(|b| {
            let num = tau * p_u * p_u * b * b * gain;
            let den = p_u * (tau * p_u * b + 1.0) * (total - b) + (tau + 1.0) * p_u * b + 1.0;
            rate(num / den)
        })
        .collect()
}

/// `(1/M) S H_bar^H H_bar S` with `S = diag(sqrt(K / (K + 1)))`.
fn los_covariance(geometry: &SystemGeometry, profile: &FadingProfile) -> CMatrix {
    let h_bar = steering_matrix(geometry);
    let m = geometry.antennas() as f64;
    let w = profile.los_weights();
    let mut c = h_bar.ad_mul(&h_bar).unscale(m);
    let n = c.nrows();
    for a in 0..n {
        for b in 0..n {
            c[(a, b)] *= w[a] * w[b];
        }
    }
    c
}

fn with_diagonal(mut c: CMatrix, diag: &[f64]) -> CMatrix {
    for (i, d) in diag.iter().enumerate() {
        c[(i, i)] += Complex64::new(*d, 0.0);
    }
    c
}

/// Central-Wishart covariance for the true channel: `(Omega + I)^-1 + los_covariance`.
pub fn sigma_hat(geometry: &SystemGeometry, profile: &FadingProfile) -> Result<CMatrix> {
    check_inputs(geometry, profile)?;
    let diag: Vec<f64> = profile
        .k_factors()
        .iter()
        .map(|k| 1.0 / (k + 1.0))
        .collect();
    Ok(with_diagonal(los_covariance(geometry, profile), &diag))
}

/// Central-Wishart covariance for the estimate: `Lambda + los_covariance`,
/// `Lambda = diag(eta / (K + 1))`.
pub fn sigma_tilde(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    p_p: f64,
) -> Result<CMatrix> {
    check_inputs(geometry, profile)?;
    let eta = eta(profile.gains(), p_p);
    let diag: Vec<f64> = eta
        .iter()
        .zip(profile.k_factors())
        .map(|(e, k)| e / (k + 1.0))
        .collect();
    Ok(with_diagonal(los_covariance(geometry, profile), &diag))
}

fn zf_rates(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    sigma: &CMatrix,
    p_u: f64,
    inflation: f64,
) -> Result<Vec<f64>> {
    let (m, n) = (geometry.antennas(), geometry.users());
    let diag =
        inverse_diagonal(sigma, MAX_CONDITION).map_err(|cond| Error::SingularSigma { cond })?;
    let dof = (m - n) as f64;
    Ok(diag
        .iter()
        .zip(profile.gains())
        .map(|(d, b)| rate(p_u * b * dof / (inflation * d)))
        .collect())
}

/// ZF with the true channel known.
pub fn approx_zf_perfect(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    p_u: f64,
) -> Result<Vec<f64>> {
    Receiver::Zf.check_dimensions(geometry.antennas(), geometry.users())?;
    let sigma = sigma_hat(geometry, profile)?;
    zf_rates(geometry, profile, &sigma, p_u, 1.0)
}

/// ZF detecting with the MMSE estimate.
pub fn approx_zf_imperfect(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    scheme: &PilotScheme,
) -> Result<Vec<f64>> {
    Receiver::Zf.check_dimensions(geometry.antennas(), geometry.users())?;
    let sigma = sigma_tilde(geometry, profile, scheme.p_p())?;
    let inflation = 1.0 + error_interference(profile, scheme);
    zf_rates(geometry, profile, &sigma, scheme.p_u(), inflation)
}

/// Rate approximation for a purely deterministic (LOS-only) channel.
///
/// Holds for either CSI state.
pub fn k_infinity_approx(
    geometry: &SystemGeometry,
    beta: &[f64],
    p_u: f64,
    kind: Receiver,
) -> Result<Vec<f64>> {
    let (m, n) = (geometry.antennas(), geometry.users());
    if beta.len() != n {
        return Err(Error::InvalidProfile(format!(
            "{} gains for {n} users",
            beta.len()
        )));
    }
    let mf = m as f64;
    match kind {
        Receiver::Mrc => {
            require_half_wavelength(geometry)?;
            let phi = phi_matrix(geometry);
            Ok((0..n)
                .map(|u| {
                    let interference: f64 = (0..n)
                        .filter(|&i| i != u)
                        .map(|i| beta[i] * phi[(u, i)].powi(2))
                        .sum();
                    rate(p_u * beta[u] * mf * mf / (p_u * interference + mf))
                })
                .collect())
        }
        Receiver::Zf => {
            kind.check_dimensions(m, n)?;
            let h_bar = steering_matrix(geometry);
            let normalized = h_bar.ad_mul(&h_bar).unscale(mf);
            let diag = inverse_diagonal(&normalized, MAX_CONDITION)
                .map_err(|cond| Error::SingularSteering { cond })?;
            let dof = (m - n) as f64;
            Ok(diag
                .iter()
                .zip(beta)
                .map(|(d, b)| rate(p_u * b * dof / d))
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::moments::{lemma2_moments, lemma4_moments};
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    /// `H_bar^H H_bar` rebuilt entry-wise from the array kernel.
    fn steering_gram_from_kernel(geometry: &SystemGeometry) -> DMatrix<Complex64> {
        let m = geometry.antennas();
        let n = geometry.users();
        let theta = geometry.angles();
        DMatrix::from_fn(n, n, |a, b| {
            if a == b {
                Complex64::new(m as f64, 0.0)
            } else {
                let delta = theta[a].sin() - theta[b].sin();
                let phase = (m as f64 - 1.0) * std::f64::consts::PI * delta / 2.0;
                Complex64::from_polar(1.0, phase) * crate::channel::phi(theta[a], theta[b], m)
            }
        })
    }

    fn geometry(m: usize) -> SystemGeometry {
        SystemGeometry::new(m, vec![0.31, -0.52, 1.05, -1.2]).unwrap()
    }

    fn gains() -> Vec<f64> {
        vec![1.0, 0.25, 3.0, 0.05]
    }

    /// `log2(1 + p E{X} / (p E{I} + c E{Y}))` assembled from the moment formulas.
    fn mrc_from_moments(
        p_u: f64,
        norm2: &[f64],
        norm4: &[f64],
        cross: &DMatrix<f64>,
        extra: f64,
    ) -> Vec<f64> {
        let n = norm2.len();
        (0..n)
            .map(|u| {
                let interference: f64 = (0..n).filter(|&i| i != u).map(|i| cross[(u, i)]).sum();
                rate(p_u * norm4[u] / (p_u * interference + extra * norm2[u]))
            })
            .collect()
    }

    #[test]
    fn mrc_perfect_equals_moment_ratio() {
        let g = geometry(40);
        let b = gains();
        let p = FadingProfile::new(vec![0.0, 2.0, 5.0, 0.3], b.clone()).unwrap();
        let l2 = lemma2_moments(&g, &p).unwrap();
        // g_n = sqrt(beta_n) h_n
        let norm2: Vec<f64> = (0..4).map(|u| b[u] * l2.norm2[u]).collect();
        let norm4: Vec<f64> = (0..4).map(|u| b[u] * b[u] * l2.norm4[u]).collect();
        let cross = DMatrix::from_fn(4, 4, |a, c| b[a] * b[c] * l2.cross2[(a, c)]);
        let expected = mrc_from_moments(3.0, &norm2, &norm4, &cross, 1.0);
        let got = approx_mrc_perfect(&g, &p, 3.0).unwrap();
        for (x, y) in got.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mrc_imperfect_equals_moment_ratio() {
        let g = geometry(40);
        let p = FadingProfile::new(vec![0.0, 2.0, 5.0, 0.3], gains()).unwrap();
        let scheme = PilotScheme::new(6, 2.0).unwrap();
        let l4 = lemma4_moments(&g, &p, scheme.p_p()).unwrap();
        let extra = 1.0 + error_interference(&p, &scheme);
        let expected = mrc_from_moments(2.0, &l4.norm2, &l4.norm4, &l4.cross2, extra);
        let got = approx_mrc_imperfect(&g, &p, &scheme).unwrap();
        for (x, y) in got.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn single_user_rayleigh_value() {
        let g = SystemGeometry::new(100, vec![0.0]).unwrap();
        let p = FadingProfile::new(vec![0.0], vec![1.0]).unwrap();
        let r = approx_mrc_perfect(&g, &p, 1.0).unwrap()[0];
        assert!((r - 102f64.log2()).abs() < 1e-12);
        assert!((r - 6.672_425_341_971_495).abs() < 1e-12);
    }

    #[test]
    fn zf_rayleigh_value() {
        let g = SystemGeometry::new(64, vec![0.1, 0.2, -0.3, 0.7]).unwrap();
        let p = FadingProfile::with_common_k(0.0, vec![1.0; 4]).unwrap();
        for r in approx_zf_perfect(&g, &p, 1.0).unwrap() {
            assert!((r - 61f64.log2()).abs() < 1e-12);
            assert!((r - 5.930_737_337_562_887).abs() < 1e-12);
        }
    }

    #[test]
    fn zf_imperfect_rayleigh_is_diagonal() {
        let g = geometry(50);
        let b = gains();
        let p = FadingProfile::with_common_k(0.0, b.clone()).unwrap();
        let scheme = PilotScheme::new(4, 2.0).unwrap();
        let eta = eta(&b, scheme.p_p());
        let inflation = 1.0 + error_interference(&p, &scheme);
        let got = approx_zf_imperfect(&g, &p, &scheme).unwrap();
        for u in 0..4 {
            let expected = rate(2.0 * b[u] * eta[u] * 46.0 / inflation);
            assert!((got[u] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zf_rejects_thin_array() {
        let g = SystemGeometry::new(4, vec![0.1, 0.2, -0.3, 0.7]).unwrap();
        let p = FadingProfile::with_common_k(1.0, vec![1.0; 4]).unwrap();
        assert!(matches!(
            approx_zf_perfect(&g, &p, 1.0),
            Err(Error::TooFewAntennas { .. })
        ));
    }

    #[test]
    fn coincident_angles_are_singular_for_zf_limit() {
        let g = SystemGeometry::new(16, vec![0.2, 0.2]).unwrap();
        let r = k_infinity_approx(&g, &[1.0, 1.0], 1.0, Receiver::Zf);
        assert!(matches!(r, Err(Error::SingularSteering { .. })));
        // MRC is still defined
        assert!(k_infinity_approx(&g, &[1.0, 1.0], 1.0, Receiver::Mrc).is_ok());
    }

    #[test]
    fn k_infinity_single_user_and_orthogonal_los() {
        let g = SystemGeometry::new(32, vec![0.4]).unwrap();
        let r = k_infinity_approx(&g, &[0.5], 2.0, Receiver::Mrc).unwrap()[0];
        assert!((r - (1.0 + 2.0 * 0.5 * 32.0f64).log2()).abs() < 1e-12);

        let m = 32usize;
        let angles: Vec<f64> = (0..4).map(|i| (2.0 * i as f64 / m as f64).asin()).collect();
        let g = SystemGeometry::new(m, angles).unwrap();
        let beta = [1.0, 0.5, 2.0, 0.1];
        let r = k_infinity_approx(&g, &beta, 3.0, Receiver::Zf).unwrap();
        for (u, v) in r.iter().enumerate() {
            assert!((v - (1.0 + 3.0 * beta[u] * 28.0).log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn steering_gram_matches_kernel_form() {
        let g = geometry(24);
        let h = steering_matrix(&g);
        let direct = h.ad_mul(&h);
        let kernel = steering_gram_from_kernel(&g);
        // entry (n, i) of H^H H sums exp(j m pi (sin n - sin i))
        for a in 0..4 {
            for b in 0..4 {
                assert!((direct[(a, b)] - kernel[(a, b)]).norm() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn rayleigh_forms_are_the_k_zero_case(
            m in 11usize..300,
            p_u in 0.01f64..100.0,
            tau in 4usize..50,
            b in proptest::collection::vec(1e-4f64..10.0, 4),
        ) {
            let g = SystemGeometry::new(m, vec![0.31, -0.52, 1.05, -1.2]).unwrap();
            let p = FadingProfile::with_common_k(0.0, b.clone()).unwrap();
            let general = approx_mrc_perfect(&g, &p, p_u).unwrap();
            let special = rayleigh_mrc_perfect(m, &b, p_u);
            for (x, y) in general.iter().zip(&special) {
                prop_assert!((x - y).abs() < 1e-12 * x.max(1.0));
            }
            let scheme = PilotScheme::new(tau, p_u).unwrap();
            let general = approx_mrc_imperfect(&g, &p, &scheme).unwrap();
            let special = rayleigh_mrc_imperfect(m, &b, p_u, tau);
            for (x, y) in general.iter().zip(&special) {
                prop_assert!((x - y).abs() < 1e-12 * x.max(1.0));
            }
        }
    }
}
