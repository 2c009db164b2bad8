//! Parameter sweeps, variance optimisation, CSV output and the validation
//! suite behind the command-line tool.

pub mod config;
pub mod csv;
pub mod optimize;
pub mod run;
pub mod validate;

pub use config::{load_config, parse_config, PathChoice, Protocol, SweepConfig, VaSetting};
pub use run::{run_sweep, run_sweep_with_threads, zero_crossings, SweepRow};

use crate::error::Result;
use crate::modulation::{correlation_z, gaussian_correlation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRow {
    pub va: f64,
    pub z4: f64,
    pub z8: f64,
    pub zg: f64,
}

/// `(V_A, Z₄, Z₈, Z_G)` for each modulation variance.
pub fn sweep_correlation(va_grid: &[f64]) -> Result<Vec<CorrelationRow>> {
    va_grid
        .iter()
        .map(|&va| {
            let alpha = (va / 2.0).sqrt();
            Ok(CorrelationRow {
                va,
                z4: correlation_z(4, alpha)?,
                z8: correlation_z(8, alpha)?,
                zg: gaussian_correlation(va),
            })
        })
        .collect()
}

/// A full sweep rendered as CSV text.
pub fn sweep_csv(config: &SweepConfig, threads: Option<usize>) -> Result<String> {
    let rows = match threads {
        Some(n) => run_sweep_with_threads(config, n)?,
        None => run_sweep(config)?,
    };
    let mut buf = Vec::new();
    csv::write_csv(&mut buf, config, &rows, &zero_crossings(&rows))?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}
