//! Matrix Market coordinate format, `general` symmetry, 1-based indices.
//!
//! Supports the `real`, `integer` and `pattern` fields. Pattern entries read
//! back as `1.0`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

/// Entry-count ceiling for [`CoordinateMatrix::to_dense`].
pub const MAX_DENSE_ENTRIES: usize = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MtxError {
    #[error("missing or malformed %%MatrixMarket header")]
    Header,
    #[error("unsupported matrix market variant: {0}")]
    Unsupported(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("a {rows}x{cols} matrix is too large to densify")]
    TooLarge { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Pattern,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Pattern => "pattern",
        })
    }
}

/// Zero-based triplets `(row, col, value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub field: Field,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CoordinateMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            field: Field::Real,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Nonzero entries of a dense matrix.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut m = Self::new(a.nrows(), a.ncols());
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                if a[(i, j)] != 0.0 {
                    m.push(i, j, a[(i, j)]);
                }
            }
        }
        m
    }

    /// Same positions, values dropped.
    pub fn into_pattern(mut self) -> Self {
        self.field = Field::Pattern;
        self
    }

    /// Scatters into a dense matrix; duplicate positions are summed.
    pub fn to_dense(&self) -> Result<DMatrix<f64>, MtxError> {
        let too_large = MtxError::TooLarge {
            rows: self.nrows,
            cols: self.ncols,
        };
        match self.nrows.checked_mul(self.ncols) {
            Some(total) if total <= MAX_DENSE_ENTRIES => {}
            _ => return Err(too_large),
        }
        let mut a = DMatrix::zeros(self.nrows, self.ncols);
        for &(i, j, v) in &self.entries {
            a[(i, j)] += match self.field {
                Field::Real => v,
                Field::Pattern => 1.0,
            };
        }
        Ok(a)
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate {} general", self.field)?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.entries.len())?;
        for &(i, j, v) in &self.entries {
            match self.field {
                // shortest repr that round-trips
                Field::Real => writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?,
                Field::Pattern => writeln!(out, "{} {}", i + 1, j + 1)?,
            }
        }
        Ok(())
    }

    pub fn to_mtx_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("matrix market output is ASCII")
    }
}

impl FromStr for CoordinateMatrix {
    type Err = MtxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses a coordinate-format Matrix Market document.
pub fn parse(text: &str) -> Result<CoordinateMatrix, MtxError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(MtxError::Header)?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(MtxError::Header);
    }
    if tokens[2] != "coordinate" {
        return Err(MtxError::Unsupported(tokens[2].clone()));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(MtxError::Unsupported(other.to_string())),
    };
    if tokens[4] != "general" {
        return Err(MtxError::Unsupported(tokens[4].clone()));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or(MtxError::Syntax {
        line: 2,
        msg: "missing size line".into(),
    })?;
    let dims = parse_fields::<usize>(size, 3, size_line)?;
    let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);

    let mut m = CoordinateMatrix {
        nrows,
        ncols,
        field,
        // bounded so a forged count cannot force a huge allocation
        entries: Vec::with_capacity(nnz.min(1 << 16)),
    };
    let per_line = match field {
        Field::Real => 3,
        Field::Pattern => 2,
    };
    for (idx, line) in body {
        if m.entries.len() == nnz {
            return Err(MtxError::EntryCount {
                expected: nnz,
                found: nnz + 1,
            });
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != per_line {
            return Err(syntax(idx, format!("expected {per_line} fields")));
        }
        let i: usize = toks[0].parse().map_err(|_| syntax(idx, "bad row index"))?;
        let j: usize = toks[1].parse().map_err(|_| syntax(idx, "bad column index"))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(syntax(idx, format!("index ({i}, {j}) out of bounds")));
        }
        let v = match field {
            Field::Real => {
                let v: f64 = toks[2].parse().map_err(|_| syntax(idx, "bad value"))?;
                if !v.is_finite() {
                    return Err(syntax(idx, "non-finite value"));
                }
                v
            }
            Field::Pattern => 1.0,
        };
        m.entries.push((i - 1, j - 1, v));
    }
    if m.entries.len() != nnz {
        return Err(MtxError::EntryCount {
            expected: nnz,
            found: m.entries.len(),
        });
    }
    Ok(m)
}

fn syntax(idx: usize, msg: impl Into<String>) -> MtxError {
    MtxError::Syntax {
        line: idx + 1,
        msg: msg.into(),
    }
}

fn parse_fields<T: FromStr>(line: &str, count: usize, idx: usize) -> Result<Vec<T>, MtxError> {
    let out: Vec<T> = line
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| syntax(idx, format!("bad token `{t}`"))))
        .collect::<Result<_, _>>()?;
    if out.len() != count {
        return Err(syntax(idx, format!("expected {count} fields")));
    }
    Ok(out)
}
