//! Flat CSV output of sweep rows.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::sweep::SweepRow;

pub const CSV_HEADER: &str =
    "scenario_id,M,N,K_dB,p_u_dB,alpha,receiver,csi,rate_sim,rate_approx,rate_det_equiv,stderr,trials,discarded,seed";

/// Plain decimal with 9 significant digits; infinities as `inf`/`-inf`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.00000000".into();
    }
    // Round through scientific notation so carries are handled once.
    let sci = format!("{:.8e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

pub fn format_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.scenario_id.to_string(),
            r.antennas.to_string(),
            r.users.to_string(),
            format_number(r.k_db),
            format_number(r.p_u_db),
            format_number(r.alpha),
            r.receiver.to_string(),
            r.csi.to_string(),
            format_number(r.rate_sim),
            format_number(r.rate_approx),
            format_number(r.rate_det_equiv),
            format_number(r.stderr),
            r.trials.to_string(),
            r.discarded.to_string(),
            r.seed.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes `rows` to `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to write".into()));
    }
    fs::write(path, format_csv(rows))?;
    Ok(())
}

/// Parses text produced by [`format_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidArgument("unexpected CSV header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::InvalidArgument(format!("line {}: bad {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 15 {
                return Err(bad("field count"));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(f[k]));
            let int = |k: usize| f[k].parse::<u64>().map_err(|_| bad(f[k]));
            Ok(SweepRow {
                scenario_id: int(0)?,
                antennas: int(1)? as usize,
                users: int(2)? as usize,
                k_db: num(3)?,
                p_u_db: num(4)?,
                alpha: num(5)?,
                receiver: f[6].parse()?,
                csi: f[7].parse()?,
                rate_sim: num(8)?,
                rate_approx: num(9)?,
                rate_det_equiv: num(10)?,
                stderr: num(11)?,
                trials: int(12)? as usize,
                discarded: int(13)? as usize,
                seed: int(14)?,
            })
        })
        .collect()
}
