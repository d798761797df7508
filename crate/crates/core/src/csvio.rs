//! Text formats used by the command line tool.
//!
//! A dataset is a CSV file with a header row. The column named `y` is the
//! response; every other column, in file order, is a predictor. Reals are
//! written with 17 significant digits so they parse back to the same bits.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub x: DenseMatrix,
    pub y: Vec<f64>,
}

/// Round-trip decimal form of `v`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::Input(format!("line {}: {e}", pos.line())),
        None => Error::Input(e.to_string()),
    }
}

pub fn parse_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let y_cols: Vec<usize> = (0..header.len()).filter(|&i| &header[i] == "y").collect();
    let y_col = match y_cols.as_slice() {
        [i] => *i,
        [] => return Err(Error::Input("line 1: no column named \"y\"".into())),
        _ => {
            return Err(Error::Input(
                "line 1: more than one column named \"y\"".into(),
            ))
        }
    };
    if header.len() < 2 {
        return Err(Error::Input(
            "line 1: need at least one predictor column".into(),
        ));
    }
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != y_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let p = feature_names.len();
    let mut data = Vec::new();
    let mut y = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != header.len() {
            return Err(Error::Input(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Input(format!("line {line}: cannot parse {field:?} as a number"))
            })?;
            if !v.is_finite() {
                return Err(Error::Input(format!(
                    "line {line}: non-finite value {field:?}"
                )));
            }
            if i == y_col {
                y.push(v);
            } else {
                data.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::Input("dataset has no rows".into()));
    }
    let x = DenseMatrix::new(y.len(), p, data)?;
    Ok(Dataset {
        feature_names,
        x,
        y,
    })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_dataset(file)
}

/// Writes `x1,...,xp,y`.
pub fn write_dataset<W: Write>(out: W, x: &DenseMatrix, y: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=x.cols()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, yi) in y.iter().enumerate().take(x.rows()) {
        let mut row: Vec<String> = x.row(i).iter().map(|v| fmt_real(*v)).collect();
        row.push(fmt_real(*yi));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `feature,coefficient` rows with 1-based feature numbers.
pub fn write_coefficients<W: Write>(out: W, beta: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "coefficient"])
        .map_err(csv_err)?;
    for (j, b) in beta.iter().enumerate() {
        w.write_record([(j + 1).to_string(), fmt_real(*b)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `feature,coefficient` table back.
pub fn parse_coefficients<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let field = record
            .get(1)
            .ok_or_else(|| Error::Input("missing coefficient column".into()))?;
        out.push(
            field
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("cannot parse {field:?} as a number")))?,
        );
    }
    Ok(out)
}

/// Generic table writer for already-formatted rows.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_column_can_be_anywhere() {
        let d = parse_dataset("a,y,b\n1,2,3\n4,5,6\n".as_bytes()).unwrap();
        assert_eq!(d.feature_names, vec!["a", "b"]);
        assert_eq!(d.y, vec![2.0, 5.0]);
        assert_eq!(d.x.row(1), &[4.0, 6.0]);
    }

    #[test]
    fn malformed_cell_names_line() {
        let err = parse_dataset("x1,y\n1,2\n3,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_dataset("x1,y\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn missing_y_or_predictors_rejected() {
        assert!(parse_dataset("a,b\n1,2\n".as_bytes()).is_err());
        assert!(parse_dataset("y\n1\n".as_bytes()).is_err());
        assert!(parse_dataset("x,y\n".as_bytes()).is_err());
    }

    #[test]
    fn round_trip_is_lossless() {
        let x = DenseMatrix::new(2, 2, vec![0.1, -1.0 / 3.0, 1e-300, 12345.678901234567]).unwrap();
        let y = vec![std::f64::consts::PI, -0.0];
        let mut buf = Vec::new();
        write_dataset(&mut buf, &x, &y).unwrap();
        let d = parse_dataset(buf.as_slice()).unwrap();
        assert_eq!(d.x, x);
        assert_eq!(d.y, y);

        let beta = vec![1.0 / 7.0, 0.0, -2.5e-17];
        let mut buf = Vec::new();
        write_coefficients(&mut buf, &beta).unwrap();
        assert_eq!(parse_coefficients(buf.as_slice()).unwrap(), beta);
    }
}
