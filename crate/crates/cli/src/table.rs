//! CSV tables: a header row and typed cells, written with 17 significant
//! digits and read back exactly.

use std::io::{Read, Write};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(i64::try_from(x).expect("count exceeds i64"))
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(i64::try_from(x).expect("count exceeds i64"))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// `inf`, `-inf`, `nan`, or scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ if s.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') => None,
        _ => s.parse().ok(),
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(s) => parse_float(s),
        }
    }

    /// Equality with `nan == nan`, the comparison used for round trips.
    pub fn same(&self, other: &Cell) -> bool {
        match (self, other) {
            (Cell::Float(a), Cell::Float(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            _ => self == other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).and_then(|c| self.rows.get(row).map(|r| &r[c]))
    }

    /// Appends the rows of `other`, whose header must match.
    pub fn extend(&mut self, other: Table) -> Result<(), CliError> {
        if other.header != self.header {
            return Err(CliError::Data(
                "cannot concatenate tables with different headers".into(),
            ));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn write_to(&self, out: impl Write) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Parses CSV text. Integers become [`Cell::Int`], other numbers and the
    /// special values [`Cell::Float`], anything else [`Cell::Text`].
    pub fn read_from(input: impl Read) -> Result<Table, CliError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
        let mut table = Table::new(header);
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            table.rows.push(record.iter().map(parse_cell).collect());
        }
        Ok(table)
    }

    pub fn from_csv(text: &str) -> Result<Table, CliError> {
        Table::read_from(text.as_bytes())
    }

    /// Cell-wise equality under [`Cell::same`].
    pub fn same(&self, other: &Table) -> bool {
        self.header == other.header
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same(y)))
    }
}

fn parse_cell(s: &str) -> Cell {
    let integral = !s.is_empty() && s.strip_prefix('-').unwrap_or(s).bytes().all(|b| b.is_ascii_digit());
    if integral {
        return match s.parse() {
            Ok(i) => Cell::Int(i),
            Err(_) => Cell::Text(s.to_string()),
        };
    }
    match parse_float(s) {
        Some(x) => Cell::Float(x),
        None => Cell::Text(s.to_string()),
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Data(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn special_values_are_spelled_exactly() {
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn keeps_text_and_integers() {
        let mut t = Table::new(["label", "count", "value"]);
        t.push(vec!["no-nucleation".into(), 42i64.into(), f64::NAN.into()]);
        t.push(vec!["a;b=c".into(), (-3i64).into(), 1e-300.into()]);
        t.push(vec!["x, \"quoted\"".into(), i64::MIN.into(), (-0.0).into()]);
        t.push(vec![u64::MAX.to_string().into(), 0i64.into(), f64::MIN_POSITIVE.into()]);
        let back = Table::from_csv(&t.to_csv()).unwrap();
        assert!(back.same(&t), "{back:?}");
        assert_eq!(back.get(0, "count"), Some(&Cell::Int(42)));
    }

    #[test]
    fn concatenation_needs_matching_headers() {
        let mut a = Table::new(["x"]);
        a.push(vec![1.0.into()]);
        let mut b = Table::new(["x"]);
        b.push(vec![2.0.into()]);
        a.extend(b).unwrap();
        assert_eq!(a.rows().len(), 2);
        assert!(a.extend(Table::new(["y"])).is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(xs in proptest::collection::vec(any::<f64>(), 1..20)) {
            let mut t = Table::new(["x"]);
            for &x in &xs {
                t.push(vec![x.into()]);
            }
            let back = Table::from_csv(&t.to_csv()).unwrap();
            prop_assert!(back.same(&t));
        }
    }
}
