//! Raw tidy tables: one column per feature, one row per sample.
//!
//! Cells are kept as text when read from CSV so that categoric values
//! round-trip byte for byte; numeric interpretation happens on demand.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Missing,
    Number(f64),
    Text(String),
}

impl Cell {
    /// Parses a raw CSV field. Empty fields and `NA`/`NaN` in any case are missing.
    pub fn from_field(field: &str) -> Cell {
        if is_missing_marker(field) {
            Cell::Missing
        } else {
            Cell::Text(field.to_string())
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Finite numeric reading of the cell, if there is one.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Missing => None,
            Cell::Number(x) => x.is_finite().then_some(*x),
            Cell::Text(s) => s.trim().parse::<f64>().ok().filter(|x| x.is_finite()),
        }
    }

    /// Categoric reading of the cell; numbers stringify.
    pub fn as_text(&self) -> Option<String> {
        match self {
            Cell::Missing => None,
            Cell::Number(x) if x.is_nan() => None,
            Cell::Number(x) => Some(x.to_string()),
            Cell::Text(s) => Some(s.clone()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Missing => Ok(()),
            Cell::Number(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x.is_nan() {
            Cell::Missing
        } else {
            Cell::Number(x)
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<&str>> for Cell {
    fn from(s: Option<&str>) -> Self {
        s.map_or(Cell::Missing, Cell::from)
    }
}

pub fn is_missing_marker(field: &str) -> bool {
    let t = field.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    column_names: Vec<String>,
    columns: Vec<Vec<Cell>>,
    row_count: usize,
}

impl RawTable {
    pub fn new(column_names: Vec<String>, columns: Vec<Vec<Cell>>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if name.is_empty() {
                return Err(Error::EmptyColumnName);
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        let row_count = columns.first().map_or(0, Vec::len);
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != row_count {
                return Err(Error::RaggedColumn {
                    name: name.clone(),
                    expected: row_count,
                    actual: col.len(),
                });
            }
        }
        Ok(Self {
            column_names,
            columns,
            row_count,
        })
    }

    pub fn from_columns<S: Into<String>>(cols: Vec<(S, Vec<Cell>)>) -> Result<Self> {
        let (names, columns) = cols.into_iter().map(|(n, c)| (n.into(), c)).unzip();
        Self::new(names, columns)
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn columns(&self) -> &[Vec<Cell>] {
        &self.columns
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_count == 0 || self.columns.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&[Cell]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    pub fn column_mut(&mut self, name: &str) -> Option<&mut Vec<Cell>> {
        self.column_index(name).map(move |i| &mut self.columns[i])
    }

    /// New table holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        let columns = self
            .columns
            .iter()
            .map(|col| rows.iter().map(|&r| col[r].clone()).collect())
            .collect();
        RawTable {
            column_names: self.column_names.clone(),
            columns,
            row_count: rows.len(),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns: Vec<Vec<Cell>> = vec![Vec::new(); names.len()];
        for record in rdr.records() {
            let record = record?;
            for (col, field) in columns.iter_mut().zip(record.iter()) {
                col.push(Cell::from_field(field));
            }
        }
        Self::new(names, columns)
    }

    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.column_names)?;
        for r in 0..self.row_count {
            wtr.write_record(self.columns.iter().map(|c| c[r].to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_markers() {
        for m in ["", "NA", "na", "NaN", "nan", " NAN "] {
            assert!(Cell::from_field(m).is_missing(), "{m:?}");
        }
        assert!(!Cell::from_field("N/A").is_missing());
    }

    #[test]
    fn csv_round_trip_keeps_text() {
        let src = "a,b\n1.50,x\n,\"y,z\"\nNA,w\n";
        let t = RawTable::read_csv(src.as_bytes()).unwrap();
        assert_eq!(t.row_count(), 3);
        assert_eq!(t.column("a").unwrap()[0], Cell::Text("1.50".into()));
        assert!(t.column("a").unwrap()[1].is_missing());
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b\n1.50,x\n,\"y,z\"\n,w\n");
    }

    #[test]
    fn rejects_duplicates_and_ragged() {
        let dup = RawTable::from_columns(vec![("a", vec![Cell::Missing]), ("a", vec![Cell::Missing])]);
        assert!(matches!(dup, Err(Error::DuplicateColumn(_))));
        let ragged = RawTable::from_columns(vec![("a", vec![Cell::Missing]), ("b", vec![])]);
        assert!(matches!(ragged, Err(Error::RaggedColumn { .. })));
    }

    #[test]
    fn numeric_reading() {
        assert_eq!(Cell::from("-3").as_number(), Some(-3.0));
        assert_eq!(Cell::from("inf").as_number(), None);
        assert_eq!(Cell::Number(2.0).as_text().as_deref(), Some("2"));
    }
}
