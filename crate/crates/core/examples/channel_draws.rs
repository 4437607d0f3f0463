//! Ricean channel realizations: the K-factor moves each column between
//! pure scattering and the deterministic steering vector.

use ricean_mimo::channel::{ChannelModel, FadingProfile, SystemGeometry};
use ricean_mimo::linalg::gram;
use ricean_mimo::rng::substream;

fn main() {
    let geometry = SystemGeometry::new(64, vec![0.25, -0.6, 1.0]).unwrap();
    for k in [0.0, 1.0, 10.0, 1e6] {
        let profile = FadingProfile::with_common_k(k, vec![1.0, 0.1, 0.01]).unwrap();
        let model = ChannelModel::new(&geometry, &profile).unwrap();
        let draw = model.draw(&mut substream(7, 0, 0));
        let to_los = (&draw.h - &draw.h_bar).column(0).norm() / 8.0;
        let g = gram(&draw.h).unscale(64.0);
        println!(
            "K = {k:>9}: |h_0 - h_bar_0|/sqrt(M) = {to_los:.4}, (1/M) h_0^H h_1 = {:+.4}{:+.4}j, ||g_2||^2 = {:.4}",
            g[(0, 1)].re,
            g[(0, 1)].im,
            draw.g.column(2).norm_squared()
        );
    }
}
