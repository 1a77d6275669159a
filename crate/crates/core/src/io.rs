//! CSV input and output.
//!
//! Input files need a header row. Every cell must parse as a finite number.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Header name given to the automatically added intercept column.
pub const INTERCEPT: &str = "(intercept)";

/// A numeric CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    /// Row-major, `header.len()` values per row.
    pub values: Vec<f64>,
}

impl Table {
    pub fn rows(&self) -> usize {
        if self.header.is_empty() {
            0
        } else {
            self.values.len() / self.header.len()
        }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidInput(format!("no column named `{name}` (columns: {})", self.header.join(", ")))
        })
    }
}

/// Reads a header plus numeric rows.
pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::InvalidInput("CSV input has no header row".into()));
    }
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        for (cell, name) in record.iter().zip(&header) {
            let v: f64 = cell.parse().map_err(|_| {
                Error::InvalidInput(format!("line {line}: column `{name}`: `{cell}` is not a number"))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("line {line}: column `{name}`: non-finite value `{cell}`")));
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("CSV input has no data rows".into()));
    }
    Ok(Table { header, values })
}

/// Every column is one coordinate of the observation.
pub fn points_from_table(t: &Table) -> Result<Dataset> {
    Dataset::points(t.header.len(), t.values.clone())
}

/// `response` is the outcome; the other columns are covariates, preceded by
/// a column of ones when `intercept` is set. Returns the covariate names.
pub fn regression_from_table(t: &Table, response: &str, intercept: bool) -> Result<(Dataset, Vec<String>)> {
    let yi = t.column_index(response)?;
    let width = t.header.len();
    let mut names: Vec<String> = Vec::new();
    if intercept {
        names.push(INTERCEPT.to_string());
    }
    names.extend(t.header.iter().enumerate().filter(|&(j, _)| j != yi).map(|(_, h)| h.clone()));
    if names.is_empty() {
        return Err(Error::InvalidInput("regression needs at least one covariate or an intercept".into()));
    }
    let mut covariates = Vec::with_capacity(t.rows() * names.len());
    let mut y = Vec::with_capacity(t.rows());
    for row in t.values.chunks(width) {
        if intercept {
            covariates.push(1.0);
        }
        covariates.extend(row.iter().enumerate().filter(|&(j, _)| j != yi).map(|(_, v)| *v));
        y.push(row[yi]);
    }
    Ok((Dataset::regression(names.len(), covariates, y)?, names))
}

/// Writes a dataset with the given header (`x1..xd` and, for pairs, `y`, by default).
pub fn write_dataset<W: Write>(writer: W, data: &Dataset, header: Option<&[String]>) -> Result<()> {
    let d = data.dim();
    let default: Vec<String> = (1..=d)
        .map(|j| format!("x{j}"))
        .chain(data.is_conditional().then(|| "y".to_string()))
        .collect();
    let header = header.unwrap_or(&default);
    let width = d + usize::from(data.is_conditional());
    if header.len() != width {
        return Err(Error::DimensionMismatch { expected: width, got: header.len() });
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(y) = data.responses() {
            row.push(y[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Serializes rows with a header derived from field names.
pub fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_points() {
        let t = read_table("a,b\n1,2\n3,4.5\n".as_bytes()).unwrap();
        assert_eq!(t.header, vec!["a", "b"]);
        let d = points_from_table(&t).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[3.0, 4.5]);
    }

    #[test]
    fn bad_cells_name_their_line() {
        let e = read_table("a\n1\nfoo\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = read_table("a\n1\n2\nNaN\n".as_bytes()).unwrap_err().to_string();
        assert!(e.contains("line 4") && e.contains("non-finite"), "{e}");
        assert!(read_table("a\n1\ninf\n".as_bytes()).is_err());
        assert!(read_table("a,b\n1,2\n3\n".as_bytes()).is_err());
        assert!(read_table("a\n".as_bytes()).is_err());
    }

    #[test]
    fn regression_columns() {
        let t = read_table("x,y,z\n1,10,2\n3,20,4\n".as_bytes()).unwrap();
        let (d, names) = regression_from_table(&t, "y", true).unwrap();
        assert_eq!(names, vec![INTERCEPT, "x", "z"]);
        assert_eq!(d.row(1), &[1.0, 3.0, 4.0]);
        assert_eq!(d.responses().unwrap(), &[10.0, 20.0]);
        let (d, _) = regression_from_table(&t, "y", false).unwrap();
        assert_eq!(d.dim(), 2);
        assert!(regression_from_table(&t, "w", true).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let d = Dataset::regression(2, vec![1.0, 0.1, 1.0, -0.25], vec![3.5, 1e-7]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d, None).unwrap();
        let t = read_table(buf.as_slice()).unwrap();
        let (back, _) = regression_from_table(&t, "y", false).unwrap();
        assert_eq!(back, d);
        let mut again = Vec::new();
        write_dataset(&mut again, &back, None).unwrap();
        assert_eq!(again, buf);
    }
}
