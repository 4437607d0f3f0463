//! Monte Carlo MRC and ZF rates for one operating point, perfect and
//! estimated CSI, evaluated on the same channel draws.

use ricean_mimo::channel::{FadingProfile, SystemGeometry};
use ricean_mimo::estimation::PilotScheme;
use ricean_mimo::rates::{estimate_rates, Csi, MonteCarloPlan, Receiver, Scenario};

fn main() {
    let geometry = SystemGeometry::new(64, vec![-1.1, -0.5, 0.05, 0.6, 1.2]).unwrap();
    let profile = FadingProfile::with_common_k(4.0, vec![1.0, 0.5, 0.2, 0.8, 0.05]).unwrap();
    let scenario = Scenario::new(geometry, profile).unwrap();
    let scheme = PilotScheme::new(5, 10.0).unwrap();
    let targets: Vec<(Receiver, Csi)> = Receiver::ALL
        .iter()
        .flat_map(|r| Csi::ALL.iter().map(move |c| (*r, *c)))
        .collect();
    let plan = MonteCarloPlan::new(2000, 42);

    for ((receiver, csi), est) in targets
        .iter()
        .zip(estimate_rates(&scenario, &scheme, &targets, &plan).unwrap())
    {
        let users: Vec<String> = est.per_user.iter().map(|r| format!("{r:.3}")).collect();
        println!(
            "{receiver:>3} {csi:>9}: sum {:.3} +- {:.3} bits/s/Hz, per user [{}]",
            est.sum_rate,
            est.sum_stderr,
            users.join(", ")
        );
    }
}
