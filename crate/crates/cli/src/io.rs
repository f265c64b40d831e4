use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use curstat::mle::ObservedSample;

use crate::CliError;

/// Rounds to 9 significant digits and prints the shortest decimal that reads
/// back as the rounded value.
pub fn fmt9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    round9(v).to_string()
}

pub fn round9(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.8e}")
        .parse()
        .expect("scientific notation parses")
}

/// Reads a CSV with header `t,delta`; lines starting with `#` are skipped.
pub fn read_sample(path: &Path) -> Result<ObservedSample, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "delta" {
        return Err(CliError::Input(format!(
            "{}: expected header \"t,delta\", found \"{}\"",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| CliError::Input(format!("{} line {line}: {what}", path.display()));
        if row.len() != 2 {
            return Err(bad("expected two fields"));
        }
        let t: f64 = row[0]
            .parse()
            .map_err(|_| bad(&format!("time \"{}\" is not a number", &row[0])))?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(bad(&format!("time {t} must be finite and nonnegative")));
        }
        let delta: u8 = match &row[1] {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(&format!("indicator \"{other}\" must be 0 or 1"))),
        };
        records.push((t, delta));
    }
    if records.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no observations",
            path.display()
        )));
    }
    ObservedSample::new(&records).map_err(CliError::from)
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f =
                File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
        None => Ok(Box::new(io::BufWriter::new(io::stdout()))),
    }
}

pub fn write_rows(
    path: Option<&Path>,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let out = open_output(path)?;
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| CliError::Input(format!("writing output: {e}"));
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| CliError::Input(format!("writing output: {e}")))
}
