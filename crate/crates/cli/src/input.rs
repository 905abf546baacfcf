//! Single-column CSV input.

use std::fs::File;
use std::io::{self, Read};

use tweedie_divergence::Dataset;

use crate::CliError;

/// Reads a dataset from `path`, or from `stdin` when `path` is `-`.
pub fn read_dataset(path: &str, stdin: &mut dyn Read) -> Result<Dataset, CliError> {
    let mut text = String::new();
    if path == "-" {
        stdin
            .read_to_string(&mut text)
            .map_err(|e| io_error("-", e))?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| io_error(path, e))?;
    }
    parse_column(&text)
}

fn io_error(path: &str, e: io::Error) -> CliError {
    CliError::Input(format!("cannot read {path}: {e}"))
}

/// Parses one numeric column. A non-numeric first row is taken as a header;
/// any later row that fails to parse is an error naming its 1-based line.
pub fn parse_column(text: &str) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 1 {
            return Err(CliError::Input(format!(
                "line {line}: expected one column, found {}",
                record.len()
            )));
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(CliError::Input(format!(
                    "line {line}: non-finite value {v}"
                )))
            }
            Err(_) if first => {}
            Err(_) => {
                return Err(CliError::Input(format!(
                    "line {line}: cannot parse {field:?} as a number"
                )))
            }
        }
        first = false;
    }
    Ok(Dataset::new(values)?)
}
