//! CSV ingestion into a role-mapped [`Dataset`].

use std::fs::File;
use std::io::{self, Read};

use mzipmed_core::{Dataset, Roles};

use crate::error::{CliError, CliResult};

/// A dataset read from CSV together with ingestion counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub rows_read: usize,
    /// Rows skipped because a mapped cell was empty or `NA`.
    pub rows_dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

/// Opens `path`, or standard input when `path` is `-`.
pub fn open_source(path: &str) -> CliResult<Box<dyn Read>> {
    if path == "-" {
        return Ok(Box::new(io::stdin()));
    }
    File::open(path)
        .map(|f| Box::new(f) as Box<dyn Read>)
        .map_err(|e| CliError::input(format!("cannot open '{path}': {e}")))
}

/// Reads a headed CSV and keeps the columns named in `roles`.
///
/// Rows are numbered from 1 after the header. Rows with a missing mapped
/// cell are dropped and counted; any other non-numeric mapped cell, or an
/// outcome that is not a non-negative integer, is an error.
pub fn read_dataset<R: Read>(reader: R, roles: &Roles) -> CliResult<LoadedData> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::input(format!("cannot read CSV header: {e}")))?.clone();

    let mut names: Vec<String> = vec![roles.outcome.clone(), roles.exposure.clone(), roles.mediator.clone()];
    names.extend(roles.covariates.iter().cloned());
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(CliError::input(format!("column '{name}' is mapped to more than one role")));
        }
    }
    let idx: Vec<usize> = names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::input(format!("column '{name}' not found in CSV header")))
        })
        .collect::<CliResult<_>>()?;

    let mut columns = vec![Vec::new(); names.len()];
    let (mut rows_read, mut rows_dropped) = (0, 0);
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::input(format!("row {row}: {e}")))?;
        rows_read += 1;
        let cells: Vec<&str> = idx.iter().map(|&j| record.get(j).unwrap_or("")).collect();
        if cells.iter().any(|c| is_missing(c)) {
            rows_dropped += 1;
            continue;
        }
        for ((cell, name), col) in cells.iter().zip(&names).zip(columns.iter_mut()) {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::input(format!("row {row}, column '{name}': '{cell}' is not a number")))?;
            col.push(v);
        }
        let y = columns[0][columns[0].len() - 1];
        if y < 0.0 || y.fract() != 0.0 {
            return Err(CliError::input(format!(
                "row {row}, column '{}': outcome must be a non-negative integer, got {y}",
                roles.outcome
            )));
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::input("CSV has no complete data rows"));
    }
    let dataset = Dataset::new(names, columns, roles.clone())?;
    Ok(LoadedData { dataset, rows_read, rows_dropped })
}

/// Writes every column of `data` as a headed CSV.
///
/// A closed downstream pipe ends the write quietly.
pub fn write_dataset<W: io::Write>(data: &Dataset, writer: W) -> CliResult<()> {
    let cols: Vec<&[f64]> = data.names().iter().map(|n| data.column(n)).collect::<Result<_, _>>()?;
    let mut wtr = csv::Writer::from_writer(writer);
    let mut write = || -> csv::Result<()> {
        wtr.write_record(data.names())?;
        for i in 0..data.n_rows() {
            wtr.write_record(cols.iter().map(|c| c[i].to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    };
    match write() {
        Err(e) if !is_broken_pipe(&e) => Err(CliError::input(format!("cannot write CSV: {e}"))),
        _ => Ok(()),
    }
}

fn is_broken_pipe(e: &csv::Error) -> bool {
    matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;

    fn roles(cov: &[&str]) -> Roles {
        Roles {
            outcome: "y".into(),
            exposure: "x".into(),
            mediator: "m".into(),
            covariates: cov.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn reads_mapped_columns_and_drops_missing_rows() {
        let csv = "id,y,x,m,c\na,0,1,0.5,2\nb,3,0,,1\nc,1,1,-0.25,NA\nd,2,0,1.5,3\n";
        let got = read_dataset(csv.as_bytes(), &roles(&["c"])).unwrap();
        assert_eq!(got.rows_read, 4);
        assert_eq!(got.rows_dropped, 2);
        assert_eq!(got.dataset.column("y").unwrap(), &[0.0, 2.0]);
        assert_eq!(got.dataset.column("c").unwrap(), &[2.0, 3.0]);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let err = read_dataset("y,x,m\n1,0,0.1\n2,abc,0.3\n".as_bytes(), &roles(&[])).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Input);
        assert!(err.message.contains("row 2") && err.message.contains("'x'"), "{}", err.message);
    }

    #[test]
    fn negative_outcome_rejected() {
        let err = read_dataset("y,x,m\n1,0,0.1\n-1,1,0.3\n".as_bytes(), &roles(&[])).unwrap_err();
        assert!(err.message.contains("row 2") && err.message.contains("'y'"), "{}", err.message);
    }

    #[test]
    fn missing_column_rejected() {
        let err = read_dataset("y,x\n1,0\n".as_bytes(), &roles(&[])).unwrap_err();
        assert!(err.message.contains("'m'"));
    }

    #[test]
    fn write_then_read_is_lossless() {
        let data = Dataset::new(
            vec!["y".into(), "x".into(), "m".into()],
            vec![vec![0.0, 4.0], vec![1.0, 0.0], vec![0.1 + 0.2, -1.0 / 3.0]],
            roles(&[]),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&data, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice(), &roles(&[])).unwrap();
        assert_eq!(back.dataset, data);
    }
}
