//! Metrics CSV and run-metadata sidecar output.
//!
//! The metrics schema is fixed: `algo,W,k,R,delta,seed_base,runs,
//! global_error,global_variance,local_error,pearson,wall_ms`. `run` output
//! prepends a `position` column (one row per query point); `sweep` output is
//! exactly the schema. Inapplicable fields (R for the dynamic algorithm, an
//! unknown deletion fraction, an undefined Pearson coefficient) are left
//! empty. Everything except `wall_ms` is deterministic for a given
//! invocation; wall time is measured and also recorded in the sidecar.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const METRICS_HEADER: &str =
    "algo,W,k,R,delta,seed_base,runs,global_error,global_variance,local_error,pearson,wall_ms";

#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub position: Option<u64>,
    pub algo: &'static str,
    pub workers: u32,
    pub budget: u64,
    pub ratio: Option<f64>,
    pub delta: Option<f64>,
    pub seed_base: u64,
    pub runs: u32,
    pub global_error: f64,
    pub global_variance: f64,
    pub local_error: f64,
    pub pearson: Option<f64>,
    pub wall_ms: u64,
}

fn opt<T: std::fmt::Display>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

impl MetricsRow {
    fn to_line(&self, with_position: bool) -> String {
        let mut line = String::new();
        if with_position {
            let _ = write!(line, "{},", opt(self.position));
        }
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algo,
            self.workers,
            self.budget,
            opt(self.ratio),
            opt(self.delta),
            self.seed_base,
            self.runs,
            self.global_error,
            self.global_variance,
            self.local_error,
            opt(self.pearson),
            self.wall_ms,
        );
        line
    }
}

/// Writes metric rows as CSV. `with_position` prepends the position column
/// (used by `run`; `sweep` emits the bare schema).
pub fn write_metrics_csv(
    path: &Path,
    rows: &[MetricsRow],
    with_position: bool,
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    if with_position {
        writeln!(out, "position,{METRICS_HEADER}")?;
    } else {
        writeln!(out, "{METRICS_HEADER}")?;
    }
    for row in rows {
        writeln!(out, "{}", row.to_line(with_position))?;
    }
    out.flush()
}

/// Sidecar path for an output file: `<output>.meta`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes the line-oriented `key=value` metadata sidecar next to an output
/// file.
pub fn write_sidecar(out: &Path, entries: &[(&str, String)]) -> io::Result<()> {
    let mut file = BufWriter::new(File::create(sidecar_path(out))?);
    for (key, value) in entries {
        writeln!(file, "{key}={value}")?;
    }
    file.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> MetricsRow {
        MetricsRow {
            position: None,
            algo: "ar",
            workers: 10,
            budget: 500,
            ratio: Some(0.2),
            delta: None,
            seed_base: 7,
            runs: 100,
            global_error: 0.125,
            global_variance: 2.5,
            local_error: 0.5,
            pearson: Some(0.75),
            wall_ms: 12,
        }
    }

    #[test]
    fn line_format_matches_schema() {
        assert_eq!(row().to_line(false), "ar,10,500,0.2,,7,100,0.125,2.5,0.5,0.75,12");
        let mut with_pos = row();
        with_pos.position = Some(42);
        assert_eq!(
            with_pos.to_line(true),
            "42,ar,10,500,0.2,,7,100,0.125,2.5,0.5,0.75,12"
        );
    }

    #[test]
    fn empty_fields_for_inapplicable_values() {
        let mut r = row();
        r.ratio = None;
        r.pearson = None;
        assert_eq!(r.to_line(false), "ar,10,500,,,7,100,0.125,2.5,0.5,,12");
    }

    #[test]
    fn sidecar_is_adjacent() {
        assert_eq!(sidecar_path(Path::new("out/metrics.csv")), Path::new("out/metrics.csv.meta"));
    }
}
