use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

/// One pass/fail check with the numbers behind it.
///
/// `margin` is positive when the check passes with room to spare:
/// `limit - value` for upper bounds, `value - limit` for lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
    pub margin: f64,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value <= limit,
            value,
            limit,
            margin: limit - value,
            detail: detail.into(),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value >= limit,
            value,
            limit,
            margin: value - limit,
            detail: detail.into(),
        }
    }

    /// Strict lower bound, `value > limit`.
    pub fn above(name: impl Into<String>, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            pass: value > limit,
            ..Self::at_least(name, value, limit, detail)
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let value = if ok { 1.0 } else { 0.0 };
        Self::at_least(name, value, 1.0, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub seed: Option<u64>,
    #[serde(rename = "K")]
    pub degree: Option<usize>,
    #[serde(rename = "Q")]
    pub order: Option<usize>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
    pub provenance: Provenance,
}

/// A CSV table. Cells are already formatted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            -0.0,
            1.0,
            6.5625,
            1e-300,
            3.33216e-7,
            1.0 / 3.0,
            2e20,
            -1.5e-12,
            f64::MAX,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{}", num(x));
        }
        assert_eq!(num(1e-10), "1e-10");
    }

    #[test]
    fn check_margins() {
        let c = Check::at_most("a", 1e-9, 1e-8, "");
        assert!(c.pass && c.margin > 0.0);
        assert!(!Check::above("b", 0.0, 0.0, "").pass);
        assert!(Check::at_least("b", 0.0, 0.0, "").pass);
        assert!(!Check::holds("c", false, "").pass);
    }
}
