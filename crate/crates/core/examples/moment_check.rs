//! Closed-form channel moments against Monte Carlo averages.

use ricean_mimo::analytic::{lemma2_moments, lemma4_moments};
use ricean_mimo::channel::{FadingProfile, SystemGeometry};
use ricean_mimo::experiments::{compare_moments, simulate_lemma2, simulate_lemma4};

fn main() {
    let geometry = SystemGeometry::new(16, vec![0.4, -0.1]).unwrap();
    let profile = FadingProfile::new(vec![1.0, 5.0], vec![1.0, 0.5]).unwrap();
    let unit = FadingProfile::new(vec![1.0, 5.0], vec![1.0, 1.0]).unwrap();
    let trials = 20_000;

    let h = compare_moments(
        &lemma2_moments(&geometry, &unit).unwrap(),
        &simulate_lemma2(&geometry, &unit, trials, 1, 0).unwrap(),
    );
    let g = compare_moments(
        &lemma4_moments(&geometry, &profile, 10.0).unwrap(),
        &simulate_lemma4(&geometry, &profile, 10.0, trials, 2, 0).unwrap(),
    );
    for (title, rows) in [("H", h), ("G_hat, p_p = 10", g)] {
        println!("{title}");
        for c in rows {
            println!(
                "  {:<16} closed {:>10.4}  sim {:>10.4}  z {:>5.2}",
                c.label,
                c.closed_form,
                c.estimate.mean,
                c.z_score()
            );
        }
    }
}
