//! Ricean channel model: LOS steering structure, random realizations and
//! the single-cell user drop.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::complex_normal;

/// Antenna spacing in wavelengths assumed by the closed-form analysis.
pub const HALF_WAVELENGTH: f64 = 0.5;

/// Threshold on `|sin(pi * delta / 2)|` below which [`phi`] switches to its limit.
pub const PHI_SINGULAR_EPS: f64 = 1e-12;

/// Array size, user count, element spacing and arrival angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGeometry {
    antennas: usize,
    spacing_ratio: f64,
    angles: Vec<f64>,
}

impl SystemGeometry {
    /// Half-wavelength uniform linear array with one arrival angle per user.
    pub fn new(antennas: usize, angles: Vec<f64>) -> Result<Self> {
        Self::with_spacing(antennas, angles, HALF_WAVELENGTH)
    }

    pub fn with_spacing(antennas: usize, angles: Vec<f64>, spacing_ratio: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::InvalidGeometry("need at least one antenna".into()));
        }
        if angles.is_empty() {
            return Err(Error::InvalidGeometry("need at least one user".into()));
        }
        if let Some(bad) = angles.iter().find(|a| !(a.abs() <= FRAC_PI_2)) {
            return Err(Error::InvalidGeometry(format!(
                "arrival angle {bad} outside [-pi/2, pi/2]"
            )));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "spacing ratio {spacing_ratio} must be positive"
            )));
        }
        Ok(SystemGeometry {
            antennas,
            spacing_ratio,
            angles,
        })
    }

    /// Same users and spacing with a different array size.
    pub fn with_antennas(&self, antennas: usize) -> Result<Self> {
        Self::with_spacing(antennas, self.angles.clone(), self.spacing_ratio)
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn users(&self) -> usize {
        self.angles.len()
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn is_half_wavelength(&self) -> bool {
        self.spacing_ratio == HALF_WAVELENGTH
    }
}

/// Per-user Ricean K-factors and large-scale gains, both linear.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProfile {
    k_factors: Vec<f64>,
    gains: Vec<f64>,
}

impl FadingProfile {
    pub fn new(k_factors: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        if k_factors.len() != gains.len() {
            return Err(Error::InvalidProfile(format!(
                "{} K-factors but {} large-scale gains",
                k_factors.len(),
                gains.len()
            )));
        }
        if k_factors.is_empty() {
            return Err(Error::InvalidProfile("empty profile".into()));
        }
        if let Some(k) = k_factors.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
            return Err(Error::InvalidProfile(format!(
                "K-factor {k} must be finite and >= 0"
            )));
        }
        if let Some(b) = gains.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidProfile(format!(
                "large-scale gain {b} must be finite and > 0"
            )));
        }
        Ok(FadingProfile { k_factors, gains })
    }

    /// Same K-factor for every user.
    pub fn with_common_k(k: f64, gains: Vec<f64>) -> Result<Self> {
        Self::new(vec![k; gains.len()], gains)
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }

    pub fn k_factors(&self) -> &[f64] {
        &self.k_factors
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// `sqrt(K / (K + 1))` per user: weight of the LOS term.
    pub fn los_weights(&self) -> Vec<f64> {
        self.k_factors
            .iter()
            .map(|k| (k / (k + 1.0)).sqrt())
            .collect()
    }

    /// `sqrt(1 / (K + 1))` per user: weight of the scattered term.
    pub fn scatter_weights(&self) -> Vec<f64> {
        self.k_factors
            .iter()
            .map(|k| (1.0 / (k + 1.0)).sqrt())
            .collect()
    }
}

/// One channel realization.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// Deterministic LOS component.
    pub h_bar: CMatrix,
    /// Scattered component, i.i.d. CN(0, 1).
    pub h_w: CMatrix,
    /// Small-scale fading mixture.
    pub h: CMatrix,
    /// Full channel `H diag(sqrt(beta))`.
    pub g: CMatrix,
}

/// Entry `(m, n)` is `exp(-j m 2 pi (d / lambda) sin(theta_n))`, `m` counted from zero.
pub fn steering_matrix(geometry: &SystemGeometry) -> CMatrix {
    let m = geometry.antennas();
    let n = geometry.users();
    let k = 2.0 * PI * geometry.spacing_ratio();
    let mut data = Vec::with_capacity(m * n);
    for theta in geometry.angles() {
        let step = k * theta.sin();
        for row in 0..m {
            data.push(Complex64::from_polar(1.0, -(row as f64) * step));
        }
    }
    DMatrix::from_vec(m, n, data)
}

/// Magnitude kernel of the inner product of two half-wavelength steering columns:
/// `sin(M pi delta / 2) / sin(pi delta / 2)` with `delta = sin(theta_n) - sin(theta_i)`.
pub fn phi(theta_n: f64, theta_i: f64, antennas: usize) -> f64 {
    let m = antennas as f64;
    let delta = theta_n.sin() - theta_i.sin();
    let half = 0.5 * PI * delta;
    let den = half.sin();
    if den.abs() < PHI_SINGULAR_EPS {
        m * (m * half).cos() / half.cos()
    } else {
        (m * half).sin() / den
    }
}

/// Precomputed mixing weights for repeated draws from one (geometry, profile) pair.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    h_bar: CMatrix,
    los: Vec<f64>,
    scatter: Vec<f64>,
    amplitude: Vec<f64>,
}

impl ChannelModel {
    pub fn new(geometry: &SystemGeometry, profile: &FadingProfile) -> Result<Self> {
        if geometry.users() != profile.users() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} users, geometry has {}",
                profile.users(),
                geometry.users()
            )));
        }
        Ok(ChannelModel {
            h_bar: steering_matrix(geometry),
            los: profile.los_weights(),
            scatter: profile.scatter_weights(),
            amplitude: profile.gains().iter().map(|b| b.sqrt()).collect(),
        })
    }

    pub fn steering(&self) -> &CMatrix {
        &self.h_bar
    }

    /// Draws `H_w` column by column from `rng` and assembles `H` and `G`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw {
        let (m, n) = self.h_bar.shape();
        let h_w = DMatrix::from_vec(m, n, (0..m * n).map(|_| complex_normal(rng)).collect());
        let mut h = CMatrix::zeros(m, n);
        let mut g = CMatrix::zeros(m, n);
        for col in 0..n {
            let (a, b, s) = (self.los[col], self.scatter[col], self.amplitude[col]);
            for row in 0..m {
                let v = self.h_bar[(row, col)] * a + h_w[(row, col)] * b;
                h[(row, col)] = v;
                g[(row, col)] = v * s;
            }
        }
        ChannelDraw {
            h_bar: self.h_bar.clone(),
            h_w,
            h,
            g,
        }
    }
}

/// One fast-fading realization for the given geometry and profile.
pub fn draw_fast_fading<R: Rng + ?Sized>(
    geometry: &SystemGeometry,
    profile: &FadingProfile,
    rng: &mut R,
) -> Result<ChannelDraw> {
    Ok(ChannelModel::new(geometry, profile)?.draw(rng))
}

/// Circular cell with a central exclusion disk, distance path loss and
/// log-normal shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLayout {
    pub cell_radius: f64,
    pub hole_radius: f64,
    pub path_loss_exponent: f64,
    pub shadow_sigma_db: f64,
}

impl Default for CellLayout {
    fn default() -> Self {
        CellLayout {
            cell_radius: 1000.0,
            hole_radius: 100.0,
            path_loss_exponent: 3.8,
            shadow_sigma_db: 8.0,
        }
    }
}

impl CellLayout {
    pub fn validate(&self) -> Result<()> {
        if !(self.hole_radius > 0.0
            && self.hole_radius < self.cell_radius
            && self.cell_radius.is_finite())
        {
            return Err(Error::InvalidScenario(format!(
                "need 0 < r_h < cell radius (r_h = {}, radius = {})",
                self.hole_radius, self.cell_radius
            )));
        }
        if !(self.shadow_sigma_db >= 0.0) || !self.path_loss_exponent.is_finite() {
            return Err(Error::InvalidScenario(
                "shadowing sigma must be >= 0 and exponent finite".into(),
            ));
        }
        Ok(())
    }

    /// `z / (r / r_h)^v`.
    pub fn large_scale_gain(&self, radius: f64, shadow: f64) -> f64 {
        shadow / (radius / self.hole_radius).powf(self.path_loss_exponent)
    }

    /// CDF of the user distance under area-uniform placement.
    pub fn radius_cdf(&self, r: f64) -> f64 {
        let (r_h, big_r) = (self.hole_radius, self.cell_radius);
        ((r * r - r_h * r_h) / (big_r * big_r - r_h * r_h)).clamp(0.0, 1.0)
    }
}

/// Positions, shadowing and resulting large-scale gains of one user drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDrop {
    pub radii: Vec<f64>,
    pub shadow: Vec<f64>,
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ScenarioDrop {
    pub fn geometry(&self, antennas: usize) -> Result<SystemGeometry> {
        SystemGeometry::new(antennas, self.theta.clone())
    }

    pub fn profile(&self, k: f64) -> Result<FadingProfile> {
        FadingProfile::with_common_k(k, self.beta.clone())
    }
}

/// Drops `users` users uniformly (in area) over the annulus and draws their
/// shadowing and arrival angles.
pub fn drop_users<R: Rng + ?Sized>(
    layout: &CellLayout,
    users: usize,
    rng: &mut R,
) -> Result<ScenarioDrop> {
    layout.validate()?;
    if users == 0 {
        return Err(Error::InvalidScenario("need at least one user".into()));
    }
    let (r_h2, big_r2) = (layout.hole_radius.powi(2), layout.cell_radius.powi(2));
    let mut drop = ScenarioDrop {
        radii: Vec::with_capacity(users),
        shadow: Vec::with_capacity(users),
        theta: Vec::with_capacity(users),
        beta: Vec::with_capacity(users),
    };
    for _ in 0..users {
        let u: f64 = rng.random();
        let r = (r_h2 + u * (big_r2 - r_h2))
            .sqrt()
            .clamp(layout.hole_radius, layout.cell_radius);
        let x: f64 = rng.sample(StandardNormal);
        let z = 10f64.powf(layout.shadow_sigma_db * x / 10.0);
        let theta = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        drop.radii.push(r);
        drop.shadow.push(z);
        drop.theta.push(theta);
        drop.beta.push(layout.large_scale_gain(r, z));
    }
    Ok(drop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stats::SampleStats;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn broadside_column_is_all_ones() {
        let g = SystemGeometry::new(5, vec![0.0, 0.3]).unwrap();
        let s = steering_matrix(&g);
        for m in 0..5 {
            assert!((s[(m, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn thirty_degree_column_two_antennas() {
        let g = SystemGeometry::new(2, vec![PI / 6.0]).unwrap();
        let s = steering_matrix(&g);
        assert!((s[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s[(1, 0)] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn non_default_spacing_changes_phase() {
        let g = SystemGeometry::with_spacing(2, vec![FRAC_PI_2], 0.25).unwrap();
        let s = steering_matrix(&g);
        assert!((s[(1, 0)] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn phi_known_values() {
        assert_eq!(phi(0.2, 0.2, 8), 8.0);
        assert!((phi(PI / 6.0, 0.0, 2) - 2f64.sqrt()).abs() < 1e-12);
        // delta = 2 limit, M even: sin(M pi) / sin(pi) -> M cos(M pi) / cos(pi) = -M
        assert!((phi(FRAC_PI_2, -FRAC_PI_2, 4) + 4.0).abs() < 1e-9);
        assert!((phi(FRAC_PI_2, -FRAC_PI_2, 5) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn phi_matches_brute_force_geometric_sum() {
        let (tn, ti, m) = (0.3f64, -0.2f64, 16);
        let delta = tn.sin() - ti.sin();
        let sum: Complex64 = (0..m)
            .map(|k| Complex64::from_polar(1.0, k as f64 * PI * delta))
            .sum();
        assert!((phi(tn, ti, m).abs() - sum.norm()).abs() < 1e-12);
    }

    #[test]
    fn geometry_rejects_bad_inputs() {
        assert!(SystemGeometry::new(0, vec![0.0]).is_err());
        assert!(SystemGeometry::new(4, vec![]).is_err());
        assert!(SystemGeometry::new(4, vec![2.0]).is_err());
        assert!(FadingProfile::new(vec![-1.0], vec![1.0]).is_err());
        assert!(FadingProfile::new(vec![1.0], vec![0.0]).is_err());
        assert!(FadingProfile::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn rayleigh_profile_gives_pure_scatter() {
        let g = SystemGeometry::new(6, vec![0.1, -0.4]).unwrap();
        let p = FadingProfile::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let d = draw_fast_fading(&g, &p, &mut substream(1, 0, 0)).unwrap();
        assert_eq!(d.h, d.h_w);
    }

    #[test]
    fn huge_k_collapses_to_los() {
        let g = SystemGeometry::new(16, vec![0.1, -0.4, 0.9]).unwrap();
        let p = FadingProfile::with_common_k(1e12, vec![1.0; 3]).unwrap();
        let d = draw_fast_fading(&g, &p, &mut substream(2, 0, 0)).unwrap();
        let dev = (&d.h - &d.h_bar)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-5, "max deviation {dev}");
    }

    #[test]
    fn entry_mean_matches_los_term() {
        let g = SystemGeometry::new(3, vec![0.5]).unwrap();
        let k = 2.0;
        let p = FadingProfile::new(vec![k], vec![1.0]).unwrap();
        let model = ChannelModel::new(&g, &p).unwrap();
        let mut rng = substream(3, 0, 0);
        let draws = 100_000;
        let mut re = Vec::with_capacity(draws);
        let mut im = Vec::with_capacity(draws);
        for _ in 0..draws {
            let z = model.draw(&mut rng).h[(2, 0)];
            re.push(z.re);
            im.push(z.im);
        }
        let expected = Complex64::from_polar((k / (k + 1.0)).sqrt(), -2.0 * PI * 0.5f64.sin());
        assert!(SampleStats::from_slice(&re).z_score(expected.re) < 4.0);
        assert!(SampleStats::from_slice(&im).z_score(expected.im) < 4.0);
    }

    #[test]
    fn gain_scaling_is_exact() {
        let g = SystemGeometry::new(8, vec![0.2, -0.1]).unwrap();
        let p1 = FadingProfile::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let p4 = FadingProfile::new(vec![1.0, 1.0], vec![4.0, 1.0]).unwrap();
        let d1 = draw_fast_fading(&g, &p1, &mut substream(4, 0, 9)).unwrap();
        let d4 = draw_fast_fading(&g, &p4, &mut substream(4, 0, 9)).unwrap();
        let n1 = d1.g.column(0).norm_squared();
        let n4 = d4.g.column(0).norm_squared();
        assert!((n4 - 4.0 * n1).abs() <= 1e-12 * n4);
    }

    #[test]
    fn drop_gain_formula() {
        let layout = CellLayout::default();
        assert_eq!(layout.large_scale_gain(100.0, 1.0), 1.0);
        assert!((layout.large_scale_gain(1000.0, 1.0) - 10f64.powf(-3.8)).abs() < 1e-18);
    }

    #[test]
    fn drop_rejects_inverted_annulus() {
        let layout = CellLayout {
            hole_radius: 1000.0,
            ..CellLayout::default()
        };
        assert!(drop_users(&layout, 3, &mut substream(0, 0, 0)).is_err());
    }

    #[test]
    fn drop_radii_are_area_uniform() {
        // Kolmogorov-Smirnov against (r^2 - r_h^2) / (R^2 - r_h^2); critical
        // value at level 0.01 is 1.628 / sqrt(n).
        let layout = CellLayout::default();
        let n = 100_000;
        let d = drop_users(&layout, n, &mut substream(5, 0, 0)).unwrap();
        let mut radii = d.radii.clone();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, r) in radii.iter().enumerate() {
            let f = layout.radius_cdf(*r);
            ks = ks
                .max((f - i as f64 / n as f64).abs())
                .max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(ks < 1.628 / (n as f64).sqrt(), "KS statistic {ks}");
        for (i, b) in d.beta.iter().enumerate() {
            assert_eq!(*b, d.shadow[i] / (d.radii[i] / 100.0).powf(3.8));
            assert!(d.radii[i] >= 100.0 && d.radii[i] <= 1000.0);
            assert!(d.theta[i] >= -FRAC_PI_2 && d.theta[i] < FRAC_PI_2);
        }
    }

    #[test]
    fn lln_gram_error_shrinks_with_antennas() {
        let profile = FadingProfile::new(vec![0.0, 1.0, 10.0], vec![1.0; 3]).unwrap();
        let angles = vec![0.3, -0.5, 0.9];
        let mut errs = Vec::new();
        for m in [64usize, 128, 256] {
            let g = SystemGeometry::new(m, angles.clone()).unwrap();
            let model = ChannelModel::new(&g, &profile).unwrap();
            let mut total = 0.0;
            for t in 0..100 {
                let d = model.draw(&mut substream(6, m as u64, t));
                let w = d.h.ad_mul(&d.h).unscale(m as f64);
                let dev = (0..3)
                    .flat_map(|i| (0..3).map(move |j| (i, j)))
                    .map(|(i, j)| {
                        (w[(i, j)] - if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm()
                    })
                    .fold(0.0, f64::max);
                total += dev;
            }
            errs.push(total / 100.0);
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    proptest! {
        #[test]
        fn steering_columns_have_norm_m(
            m in 1usize..64,
            angles in proptest::collection::vec(-FRAC_PI_2..FRAC_PI_2, 1..6),
        ) {
            let g = SystemGeometry::new(m, angles).unwrap();
            let s = steering_matrix(&g);
            for z in s.iter() {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
            for col in s.column_iter() {
                prop_assert!((col.norm_squared() - m as f64).abs() < 1e-9);
            }
        }

        #[test]
        fn phi_magnitude_equals_steering_inner_product(
            m in 1usize..40,
            a in -FRAC_PI_2..FRAC_PI_2,
            b in -FRAC_PI_2..FRAC_PI_2,
        ) {
            let g = SystemGeometry::new(m, vec![a, b]).unwrap();
            let s = steering_matrix(&g);
            let inner = s.column(0).dotc(&s.column(1)).norm();
            prop_assert!((phi(a, b, m).abs() - inner).abs() < 1e-7 * (m as f64));
        }
    }
}
