//! Row output in CSV or line-delimited JSON, plus the stdout summary.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Records,
}

pub fn write_rows<T: Serialize>(rows: &[T], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Records => {
            let mut w = io::BufWriter::new(sink);
            for row in rows {
                serde_json::to_writer(&mut w, row)?;
                writeln!(w)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Pass count and worst error of a comparison run.
#[derive(Debug, Default)]
pub struct Tally {
    pub rows: usize,
    pub passed: usize,
    pub max_error: f64,
}

impl Tally {
    pub fn record(&mut self, error: f64, pass: bool) {
        self.rows += 1;
        self.passed += usize::from(pass);
        if error.is_nan() || error > self.max_error {
            self.max_error = error;
        }
    }

    pub fn all_pass(&self) -> bool {
        self.passed == self.rows
    }

    pub fn summary(&self, command: &str, started: Instant) -> String {
        format!(
            "{command}: {}/{} rows pass, max error {:.3e}, wall time {:.3}s",
            self.passed,
            self.rows,
            self.max_error,
            started.elapsed().as_secs_f64()
        )
    }
}

/// `x₁ x₂ … | u₁ u₂ …` with full precision.
pub fn format_point(x: &[f64], u: &[f64]) -> String {
    let join = |v: &[f64]| v.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(" ");
    format!("{} | {}", join(x), join(u))
}
