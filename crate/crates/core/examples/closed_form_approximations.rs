//! Closed-form rate approximations next to a Monte Carlo reference.

use ricean_mimo::analytic::{
    approx_mrc_imperfect, approx_mrc_perfect, approx_zf_imperfect, approx_zf_perfect,
};
use ricean_mimo::channel::{FadingProfile, SystemGeometry};
use ricean_mimo::estimation::PilotScheme;
use ricean_mimo::rates::{estimate_rates, Csi, MonteCarloPlan, Receiver, Scenario};

fn main() {
    let angles = vec![-1.0, -0.45, 0.0, 0.35, 0.9, 1.3];
    let beta = vec![1.0, 0.3, 0.6, 0.1, 0.9, 0.4];
    let p_u = 2.0;
    let scheme = PilotScheme::new(6, p_u).unwrap();
    let targets = [
        (Receiver::Mrc, Csi::Perfect),
        (Receiver::Zf, Csi::Perfect),
        (Receiver::Mrc, Csi::Imperfect),
        (Receiver::Zf, Csi::Imperfect),
    ];
    for m in [32, 128] {
        let geometry = SystemGeometry::new(m, angles.clone()).unwrap();
        let profile = FadingProfile::with_common_k(2.0, beta.clone()).unwrap();
        let approx = [
            approx_mrc_perfect(&geometry, &profile, p_u).unwrap(),
            approx_zf_perfect(&geometry, &profile, p_u).unwrap(),
            approx_mrc_imperfect(&geometry, &profile, &scheme).unwrap(),
            approx_zf_imperfect(&geometry, &profile, &scheme).unwrap(),
        ];
        let scenario = Scenario::new(geometry, profile).unwrap();
        let sim =
            estimate_rates(&scenario, &scheme, &targets, &MonteCarloPlan::new(1000, 5)).unwrap();
        println!("M = {m}");
        for (i, (receiver, csi)) in targets.iter().enumerate() {
            let per_user_sim: f64 = sim[i].per_user.iter().sum();
            let per_user_approx: f64 = approx[i].iter().sum();
            println!(
                "  {receiver:>3} {csi:>9}: sim {per_user_sim:7.3}  approx {per_user_approx:7.3}"
            );
        }
    }
}
