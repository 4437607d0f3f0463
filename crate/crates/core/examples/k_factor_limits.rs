//! As K grows the closed forms converge to the pure line-of-sight limit,
//! and the CSI quality stops mattering.

use ricean_mimo::analytic::{
    approx_mrc_imperfect, approx_mrc_perfect, approx_zf_perfect, k_infinity_approx,
};
use ricean_mimo::channel::{FadingProfile, SystemGeometry};
use ricean_mimo::estimation::PilotScheme;
use ricean_mimo::rates::Receiver;

fn main() {
    let geometry = SystemGeometry::new(100, vec![-0.9, -0.3, 0.2, 0.7]).unwrap();
    let beta = vec![1.0, 0.2, 0.5, 0.05];
    let p_u = 10.0;
    let scheme = PilotScheme::new(4, p_u).unwrap();
    let sum = |v: Vec<f64>| v.iter().sum::<f64>();
    println!("{:>8} {:>10} {:>12} {:>10}", "K", "MRC", "MRC (est.)", "ZF");
    for k in [0.1, 1.0, 10.0, 100.0, 1e4, 1e8] {
        let profile = FadingProfile::with_common_k(k, beta.clone()).unwrap();
        println!(
            "{k:>8.0e} {:>10.4} {:>12.4} {:>10.4}",
            sum(approx_mrc_perfect(&geometry, &profile, p_u).unwrap()),
            sum(approx_mrc_imperfect(&geometry, &profile, &scheme).unwrap()),
            sum(approx_zf_perfect(&geometry, &profile, p_u).unwrap())
        );
    }
    println!(
        "{:>8} {:>10.4} {:>12} {:>10.4}",
        "limit",
        sum(k_infinity_approx(&geometry, &beta, p_u, Receiver::Mrc).unwrap()),
        "",
        sum(k_infinity_approx(&geometry, &beta, p_u, Receiver::Zf).unwrap())
    );
}
