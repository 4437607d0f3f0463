//! The built-in validation suite at a reduced trial count.

use ricean_mimo::experiments::{validate, ValidateOptions};

fn main() {
    let report = validate(&ValidateOptions {
        trials: Some(5_000),
        ..Default::default()
    })
    .unwrap();
    println!("{report}");
    if !report.all_passed() {
        std::process::exit(3);
    }
}
