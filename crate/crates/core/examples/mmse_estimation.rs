//! Pilot-based MMSE estimation of the scattered channel part and the
//! resulting error variance.

use ricean_mimo::channel::{ChannelModel, FadingProfile, SystemGeometry};
use ricean_mimo::estimation::{error_variance, eta, mmse_estimate, PilotScheme};
use ricean_mimo::rng::substream;

fn main() {
    let geometry = SystemGeometry::new(32, vec![0.1, -0.4]).unwrap();
    let profile = FadingProfile::new(vec![0.0, 3.98], vec![1.0, 0.1]).unwrap();
    let model = ChannelModel::new(&geometry, &profile).unwrap();

    for p_p in [0.1, 1.0, 10.0, 1000.0] {
        let scheme = PilotScheme::with_pilot_power(2, p_p / 2.0, p_p).unwrap();
        let trials = 2000;
        let mut mse = [0.0; 2];
        for t in 0..trials {
            let mut rng = substream(3, 0, t);
            let draw = model.draw(&mut rng);
            let est = mmse_estimate(&draw, &profile, &scheme, &mut rng).unwrap();
            let err = est.error(&draw);
            for (u, slot) in mse.iter_mut().enumerate() {
                *slot += err.column(u).norm_squared() / (32 * trials) as f64;
            }
        }
        let eta = eta(profile.gains(), p_p);
        println!(
            "p_p = {p_p:>7}: eta = ({:.3}, {:.3}), error variance sim ({:.4e}, {:.4e}) formula ({:.4e}, {:.4e})",
            eta[0],
            eta[1],
            mse[0],
            mse[1],
            error_variance(1.0, 0.0, p_p),
            error_variance(0.1, 3.98, p_p)
        );
    }
}
