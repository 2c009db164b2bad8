//! CSV emission. Floats are written like C's `%.12g`.

use std::io::Write;

use super::config::SweepConfig;
use super::run::{Crossing, CrossingStatus, SweepRow};
use crate::error::Result;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub const COLUMNS: [&str; 19] = [
    "protocol",
    "detection",
    "L_km",
    "epsilon",
    "V_A",
    "T",
    "chi_line",
    "chi_det",
    "chi_total",
    "I_AB",
    "chi_BE",
    "delta_I",
    "delta_I_clamped",
    "lambda_1",
    "lambda_2",
    "lambda_3",
    "lambda_4",
    "lambda_5",
    "path",
];

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits in `%g` style:
/// fixed notation for decimal exponents in `[−4, 12)`, scientific otherwise,
/// trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

pub fn format_row(row: &SweepRow) -> String {
    let r = &row.report;
    let b = &r.budget;
    let mut fields = vec![
        row.protocol.name().to_string(),
        row.detection.name().to_string(),
    ];
    fields.extend(
        [
            row.length_km,
            row.excess_noise,
            row.va,
            b.transmittance,
            b.chi_line,
            b.chi_det,
            b.chi_total,
            r.i_ab,
            r.chi_be,
            r.delta_i,
            r.delta_i_clamped,
        ]
        .into_iter()
        .chain(r.all_symplectic())
        .map(format_float),
    );
    fields.push(row.path.name().to_string());
    fields.join(",")
}

/// Header block, column names, one line per row, then the zero-crossing
/// summary. All lines end in `\n`.
pub fn write_csv(
    out: &mut impl Write,
    config: &SweepConfig,
    rows: &[SweepRow],
    crossings: &[Crossing],
) -> Result<()> {
    writeln!(out, "# cvqkd sweep")?;
    writeln!(out, "# version = {}", env!("CARGO_PKG_VERSION"))?;
    for line in config.to_config_string().lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{}", COLUMNS.join(","))?;
    for row in rows {
        writeln!(out, "{}", format_row(row))?;
    }
    writeln!(
        out,
        "# zero crossings: protocol,detection,epsilon,L_max_km,status"
    )?;
    for c in crossings {
        let status = match c.status {
            CrossingStatus::Crossed => "crossed",
            CrossingStatus::PositiveThroughout => "positive_at_grid_end",
            CrossingStatus::NeverPositive => "never_positive",
        };
        let l_max = c.l_max_km.map_or_else(|| "nan".to_string(), format_float);
        writeln!(
            out,
            "# {},{},{},{},{}",
            c.protocol.name(),
            c.detection.name(),
            format_float(c.excess_noise),
            l_max,
            status
        )?;
    }
    Ok(())
}
