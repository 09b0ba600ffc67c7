//! Matrix Market coordinate files.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::scalar::Scalar;

const BANNER: &str = "%%MatrixMarket";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

/// Parsed banner line. Only `matrix coordinate` objects are representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixMarketHeader {
    pub field: MmField,
    pub symmetry: MmSymmetry,
}

impl MatrixMarketHeader {
    pub fn parse(line: &str, line_no: usize) -> Result<Self> {
        let err = |message: String| Error::MatrixMarket { line: line_no, message };
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some(BANNER) {
            return Err(err(format!("expected banner {BANNER:?}")));
        }
        let rest: Vec<String> = tokens.map(str::to_ascii_lowercase).collect();
        let [object, format, field, symmetry] = rest.as_slice() else {
            return Err(err(format!("banner needs 4 qualifiers, found {}", rest.len())));
        };
        if object != "matrix" {
            return Err(err(format!("unsupported object {object:?}")));
        }
        if format != "coordinate" {
            return Err(err(format!(
                "unsupported format {format:?}, only coordinate is supported"
            )));
        }
        let field = match field.as_str() {
            "real" | "double" => MmField::Real,
            "integer" => MmField::Integer,
            "pattern" => MmField::Pattern,
            other => return Err(err(format!("unsupported field {other:?}"))),
        };
        let symmetry = match symmetry.as_str() {
            "general" => MmSymmetry::General,
            "symmetric" => MmSymmetry::Symmetric,
            other => return Err(err(format!("unsupported symmetry {other:?}"))),
        };
        Ok(Self { field, symmetry })
    }
}

fn parse_num<V: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<V> {
    let tok = tok.ok_or_else(|| Error::MatrixMarket {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::MatrixMarket {
        line,
        message: format!("cannot parse {what} from {tok:?}"),
    })
}

/// Reads a coordinate Matrix Market stream into canonical CSR.
///
/// Indices are converted from 1-based, pattern entries get value 1,
/// symmetric files have their off-diagonal entries mirrored, and duplicate
/// coordinates are summed.
pub fn read_matrix_market<T: Scalar, R: BufRead>(source: R) -> Result<CsrMatrix<T>> {
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));

    let header = match lines.next() {
        Some((no, line)) => MatrixMarketHeader::parse(&line?, no)?,
        None => {
            return Err(Error::MatrixMarket {
                line: 1,
                message: "empty input".into(),
            })
        }
    };

    let mut size = None;
    for (no, line) in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut toks = t.split_whitespace();
        let m: usize = parse_num(toks.next(), "row count", no)?;
        let k: usize = parse_num(toks.next(), "column count", no)?;
        let nnz: usize = parse_num(toks.next(), "entry count", no)?;
        if toks.next().is_some() {
            return Err(Error::MatrixMarket {
                line: no,
                message: "size line has extra fields".into(),
            });
        }
        size = Some((m, k, nnz, no));
        break;
    }
    let Some((num_rows, num_cols, declared, size_line)) = size else {
        return Err(Error::MatrixMarket {
            line: 1,
            message: "missing size line".into(),
        });
    };
    if header.symmetry == MmSymmetry::Symmetric && num_rows != num_cols {
        return Err(Error::MatrixMarket {
            line: size_line,
            message: format!("symmetric matrix must be square, got {num_rows}x{num_cols}"),
        });
    }

    let mut triples = Vec::with_capacity(declared * if header.symmetry == MmSymmetry::Symmetric { 2 } else { 1 });
    let mut seen = 0usize;
    let mut last_line = size_line;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if seen == declared {
            return Err(Error::MatrixMarket {
                line: no,
                message: format!("more entries than the declared {declared}"),
            });
        }
        let mut toks = t.split_whitespace();
        let r: usize = parse_num(toks.next(), "row index", no)?;
        let c: usize = parse_num(toks.next(), "column index", no)?;
        if r == 0 || r > num_rows || c == 0 || c > num_cols {
            return Err(Error::MatrixMarket {
                line: no,
                message: format!("index ({r}, {c}) outside declared {num_rows}x{num_cols}"),
            });
        }
        let v = match header.field {
            MmField::Pattern => T::one(),
            MmField::Integer => {
                let i: i64 = parse_num(toks.next(), "integer value", no)?;
                T::from_f64_lossy(i as f64)
            }
            MmField::Real => parse_num(toks.next(), "real value", no)?,
        };
        if toks.next().is_some() {
            return Err(Error::MatrixMarket {
                line: no,
                message: "entry has extra fields".into(),
            });
        }
        let (r, c) = (r - 1, c - 1);
        triples.push((r, c, v));
        if header.symmetry == MmSymmetry::Symmetric && r != c {
            triples.push((c, r, v));
        }
        seen += 1;
    }
    if seen < declared {
        return Err(Error::MatrixMarket {
            line: last_line,
            message: format!("truncated entry list: {seen} of {declared} entries"),
        });
    }

    CsrMatrix::from_coo(&triples, num_rows, num_cols)
}

/// Writes `a` as a `real general` coordinate file, 1-based, row-major.
///
/// Values use the shortest representation that parses back to the same
/// bits, so reading the output reproduces `a` exactly.
pub fn write_matrix_market<T: Scalar, W: Write>(a: &CsrMatrix<T>, mut sink: W) -> Result<()> {
    writeln!(sink, "{BANNER} matrix coordinate real general")?;
    writeln!(sink, "{} {} {}", a.num_rows(), a.num_cols(), a.nnz())?;
    for i in 0..a.num_rows() {
        for e in a.row_range(i) {
            writeln!(sink, "{} {} {}", i + 1, a.col_idx()[e] + 1, a.values()[e])?;
        }
    }
    sink.flush()?;
    Ok(())
}
