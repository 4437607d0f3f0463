//! Deterministic equivalents under p_u = E_u / M^alpha and the limits
//! they approach as the array grows.

use ricean_mimo::analytic::{det_equiv_rate, scaled_power_limit, ScalingLaw};
use ricean_mimo::rates::{Csi, Receiver};

fn main() {
    let (e_u, beta, tau) = (100.0, 0.5, 10);
    for (alpha, k, csi) in [
        (1.0, 0.0, Csi::Perfect),
        (1.0, 4.0, Csi::Imperfect),
        (0.5, 0.0, Csi::Imperfect),
        (2.0, 4.0, Csi::Perfect),
    ] {
        let law = ScalingLaw::new(alpha, e_u).unwrap();
        let values: Vec<String> = [16, 64, 256, 1024, 4096]
            .iter()
            .map(|&m| {
                format!(
                    "{:.4}",
                    det_equiv_rate(&law, m, beta, k, tau, csi, Receiver::Mrc)
                )
            })
            .collect();
        println!("alpha = {alpha}, K = {k}, {csi:>9}: {}", values.join("  "));
    }
    println!(
        "\nlimits: perfect {:.4}, imperfect K=4 {:.4}, imperfect K=0 {:.4}",
        scaled_power_limit(4.0, e_u, beta, tau, Csi::Perfect),
        scaled_power_limit(4.0, e_u, beta, tau, Csi::Imperfect),
        scaled_power_limit(0.0, e_u, beta, tau, Csi::Imperfect)
    );
}
