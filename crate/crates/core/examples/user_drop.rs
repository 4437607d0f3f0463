//! Random user placement in a circular cell with path loss and
//! log-normal shadowing.

use ricean_mimo::channel::{drop_users, CellLayout};
use ricean_mimo::rng::substream;
use ricean_mimo::units::linear_to_db;

fn main() {
    let layout = CellLayout::default();
    let drop = drop_users(&layout, 8, &mut substream(1, 0, 0)).unwrap();
    println!(
        "{:>4} {:>9} {:>9} {:>10} {:>10}",
        "user", "r (m)", "theta", "shadow dB", "beta dB"
    );
    for u in 0..8 {
        println!(
            "{u:>4} {:>9.1} {:>9.3} {:>10.2} {:>10.2}",
            drop.radii[u],
            drop.theta[u],
            linear_to_db(drop.shadow[u]),
            linear_to_db(drop.beta[u])
        );
    }
    println!(
        "\ncell-edge user without shadowing: beta = {:.4e}",
        layout.large_scale_gain(1000.0, 1.0)
    );
}
