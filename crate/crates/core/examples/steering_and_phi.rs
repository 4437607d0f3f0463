//! LOS steering columns and the array kernel that measures how strongly
//! two users' line-of-sight paths overlap.

use ricean_mimo::channel::{phi, steering_matrix, SystemGeometry};
use std::f64::consts::FRAC_PI_6;

fn main() {
    let geometry = SystemGeometry::new(2, vec![FRAC_PI_6, 0.0]).unwrap();
    let h_bar = steering_matrix(&geometry);
    println!("M = 2 steering matrix for theta = (pi/6, 0):");
    for row in 0..2 {
        let cells: Vec<String> = (0..2)
            .map(|c| format!("{:+.3}{:+.3}j", h_bar[(row, c)].re, h_bar[(row, c)].im))
            .collect();
        println!("  [{}]", cells.join(", "));
    }

    println!("\nphi(theta_n, theta_i, M) for theta_n = 0.3, theta_i = -0.2:");
    for m in [8, 16, 32, 64, 128] {
        println!(
            "  M = {m:>3}: phi = {:+.5}, phi / M = {:+.5}",
            phi(0.3, -0.2, m),
            phi(0.3, -0.2, m) / m as f64
        );
    }
    println!("\ncoincident users give phi = M: {}", phi(0.7, 0.7, 8));
}
