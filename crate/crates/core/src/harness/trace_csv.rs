use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Mean error traces of several algorithms on a common iteration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCsv {
    pub iters: Vec<usize>,
    /// `(name, values)`, one value per entry of `iters`.
    pub columns: Vec<(String, Vec<f64>)>,
}

impl TraceCsv {
    pub fn new(iters: Vec<usize>) -> Result<Self> {
        if iters.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "iterations must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            iters,
            columns: Vec::new(),
        })
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.iters.len() {
            return Err(Error::InvalidParameter(format!(
                "column has {} values for {} rows",
                values.len(),
                self.iters.len()
            )));
        }
        self.columns.push((name.into(), values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Values use 17 significant digits, enough to round-trip any `f64`.
    pub fn render(&self) -> String {
        let mut s = String::from("iter");
        for (name, _) in &self.columns {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (row, iter) in self.iters.iter().enumerate() {
            write!(s, "{iter}").expect("write to String");
            for (_, values) in &self.columns {
                write!(s, ",{:.16e}", values[row]).expect("write to String");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty CSV".into()))?;
        let mut names = header.split(',');
        if names.next() != Some("iter") {
            return Err(Error::Format("first column must be iter".into()));
        }
        let names: Vec<String> = names.map(str::to_owned).collect();
        let mut iters = Vec::new();
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (n, line) in lines.enumerate() {
            let mut fields = line.split(',');
            let bad = || Error::Format(format!("bad row {}", n + 2));
            iters.push(fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?);
            for col in values.iter_mut() {
                col.push(fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?);
            }
            if fields.next().is_some() {
                return Err(bad());
            }
        }
        let mut out = Self::new(iters).map_err(|e| Error::Format(e.to_string()))?;
        for (name, col) in names.into_iter().zip(values) {
            out.push_column(name, col)?;
        }
        Ok(out)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// `<algo>_mean_relerr`
pub fn column_name(algorithm: &str) -> String {
    format!("{algorithm}_mean_relerr")
}
