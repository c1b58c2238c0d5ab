//! Plain-text instance files.
//!
//! ```text
//! n m j_min j_max
//! i j value        (m lines, 0-based, i < j)
//! ```
//!
//! Reals are written with Rust's shortest round-trip formatting.

use std::io::{BufRead, Write};

use super::generate::check_range;
use super::{Coupling, CouplingMatrix, ProblemError};

/// A coupling matrix together with its declared value range.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub matrix: CouplingMatrix,
    pub j_min: f64,
    pub j_max: f64,
}

impl InstanceFile {
    /// Declares a range; every stored value must fall inside it.
    pub fn new(matrix: CouplingMatrix, j_min: f64, j_max: f64) -> Result<Self, ProblemError> {
        check_range(j_min, j_max)?;
        if let Some(e) = matrix
            .entries()
            .iter()
            .find(|e| e.value < j_min || e.value > j_max)
        {
            return Err(ProblemError::OutOfRange {
                value: e.value,
                j_min,
                j_max,
            });
        }
        if matrix.diag().iter().any(|&d| d != 0.0) {
            return Err(ProblemError::Parse(
                "instance files carry no diagonal".into(),
            ));
        }
        Ok(Self {
            matrix,
            j_min,
            j_max,
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        let q = &self.matrix;
        writeln!(w, "{} {} {} {}", q.n(), q.nnz(), self.j_min, self.j_max)?;
        for e in q.entries() {
            writeln!(w, "{} {} {}", e.i, e.j, e.value)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, ProblemError> {
        let mut lines = r.lines().enumerate().filter_map(|(no, line)| match line {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((no + 1, other)),
        });
        let (_, header) = lines
            .next()
            .ok_or_else(|| ProblemError::Parse("empty instance file".into()))?;
        let header = header.map_err(|e| ProblemError::Parse(e.to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, m, j_min, j_max] = fields[..] else {
            return Err(ProblemError::Parse(format!(
                "header needs 4 fields, got {}",
                fields.len()
            )));
        };
        let n: usize = parse(n, 1)?;
        let m: usize = parse(m, 1)?;
        let j_min: f64 = parse(j_min, 1)?;
        let j_max: f64 = parse(j_max, 1)?;

        let mut entries = Vec::with_capacity(m);
        for (no, line) in lines {
            let line = line.map_err(|e| ProblemError::Parse(e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [i, j, v] = fields[..] else {
                return Err(ProblemError::Parse(format!(
                    "line {no}: expected `i j value`"
                )));
            };
            entries.push(Coupling {
                i: parse(i, no)?,
                j: parse(j, no)?,
                value: parse(v, no)?,
            });
        }
        if entries.len() != m {
            return Err(ProblemError::Parse(format!(
                "header declares {m} entries, found {}",
                entries.len()
            )));
        }
        Self::new(CouplingMatrix::new(n, entries)?, j_min, j_max)
    }
}

fn parse<T: std::str::FromStr>(field: &str, line: usize) -> Result<T, ProblemError> {
    field
        .parse()
        .map_err(|_| ProblemError::Parse(format!("line {line}: cannot parse `{field}`")))
}
