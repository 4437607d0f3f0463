//! dB conversions. Configuration values are in dB; everything internal is linear.

pub fn db_to_linear(db: f64) -> f64 {
    if db == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(db / 10.0)
    }
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
