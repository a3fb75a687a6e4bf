use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qer_core::channel::to_nested;
use qer_core::recovery::{Method, RecoveryResult};

use crate::config::CliError;
use crate::sweep::{crossings, SweepRecord};

/// Differences below this are treated as ties when locating crossings; it
/// covers the solver's optimality gap.
pub const CROSSING_SLACK: f64 = 1e-7;

pub const CSV_HEADER: [&str; 7] = ["gamma", "f_optimal", "f_qec", "f_none", "gap", "iterations", "wall_time"];

/// Decimal rendering with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let decimals = (16 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

pub fn sweep_csv(records: &[SweepRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_cfg = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(to_cfg)?;
    for r in records {
        w.write_record([
            format_real(r.gamma),
            opt_real(r.f_optimal),
            opt_real(r.f_qec),
            opt_real(r.f_none),
            opt_real(r.gap),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            format_real(r.wall_time),
        ])
        .map_err(to_cfg)?;
    }
    w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))
}

#[derive(Debug, Serialize)]
pub struct SweepCrossings {
    pub qec_vs_none: Vec<f64>,
    pub optimal_vs_none: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepDocument<'a> {
    pub code: String,
    pub recoveries: Vec<Method>,
    pub tol: f64,
    pub records: &'a [SweepRecord],
    pub crossings: SweepCrossings,
}

impl<'a> SweepDocument<'a> {
    pub fn new(code: String, recoveries: Vec<Method>, tol: f64, records: &'a [SweepRecord]) -> Self {
        let crossings = SweepCrossings {
            qec_vs_none: crossings(records, |r| r.f_qec, |r| r.f_none, CROSSING_SLACK),
            optimal_vs_none: crossings(records, |r| r.f_optimal, |r| r.f_none, CROSSING_SLACK),
        };
        Self { code, recoveries, tol, records, crossings }
    }
}

type Nested = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize)]
pub struct SolutionDocument {
    pub gamma: f64,
    pub method: Method,
    pub fidelity: f64,
    pub choi: Nested,
    pub kraus: Vec<Nested>,
    pub dual_gap: Option<f64>,
}

impl SolutionDocument {
    pub fn new(r: &RecoveryResult) -> Self {
        Self {
            gamma: r.gamma.unwrap_or(f64::NAN),
            method: r.method,
            fidelity: r.fidelity,
            choi: to_nested(r.recovery.matrix()),
            kraus: r.kraus.elements().iter().map(to_nested).collect(),
            dual_gap: r.certificate.as_ref().map(|c| c.gap),
        }
    }
}

pub fn to_json_bytes(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec(value).map_err(|e| CliError::Config(format!("json: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// gnuplot script that draws every fidelity column of `csv` against γ and
/// renders to `<script stem>.png`.
pub fn gnuplot_script(csv: &Path, script: &Path, title: &str) -> String {
    let png = script.with_extension("png");
    let quote = |p: &Path| p.display().to_string().replace('\'', "''");
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set output '{png}'\n\
         set title '{title}'\n\
         set xlabel 'gamma'\n\
         set ylabel 'entanglement fidelity'\n\
         set key bottom left\n\
         set grid\n\
         data = '{csv}'\n\
         plot data using 1:2 with linespoints title 'optimal', \\\n     \
         data using 1:3 with linespoints title 'qec', \\\n     \
         data using 1:4 with lines title 'no recovery'\n",
        png = quote(&png),
        csv = quote(csv),
        title = title.replace('\'', "''"),
    )
}

/// `(γ, value)` pairs for `column`, skipping empty cells.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let bad = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let headers = reader.headers().map_err(bad)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: no column {name:?}", path.display())))
    };
    let (gi, ci) = (find("gamma")?, find(column)?);
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(bad)?;
        let cell = |i: usize| row.get(i).unwrap_or("").trim().to_string();
        let (g, v) = (cell(gi), cell(ci));
        if g.is_empty() || v.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("{}: row {}: bad number {s:?}", path.display(), line + 2)))
        };
        out.push((parse(&g)?, parse(&v)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.5), "0.50000000000000000");
        assert_eq!(format_real(0.0), "0.0000000000000000");
        assert_eq!(format_real(1.0), "1.0000000000000000");
        assert_eq!(format_real(0.012), "0.012000000000000000");
        let x = 0.9881715688586634_f64;
        assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        assert_eq!(format_real(12.5), "12.500000000000000");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![SweepRecord {
            gamma: 0.1,
            f_optimal: Some(0.98),
            f_qec: None,
            f_none: Some(0.95),
            gap: Some(1e-9),
            iterations: Some(9),
            wall_time: 0.25,
            error: None,
        }];
        let bytes = sweep_csv(&recs).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let path = dir.path().join("s.csv");
        atomic_write(&path, &bytes).unwrap();
        assert_eq!(read_column(&path, "f_optimal").unwrap(), vec![(0.1, 0.98)]);
        assert!(read_column(&path, "f_qec").unwrap().is_empty());
        assert!(read_column(&path, "nope").is_err());
    }

    #[test]
    fn atomic_write_reports_bad_directory() {
        let err = atomic_write(Path::new("/nonexistent/dir/out.csv"), b"x").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
