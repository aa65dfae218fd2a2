//! LIBSVM text format: `label idx:val idx:val …` with 1-based indices.
//! Labels are discarded; the dimension is the largest index seen.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::matrix::DataMatrix;

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    parse_libsvm_str(&text)
}

pub fn parse_libsvm_str(text: &str) -> Result<DataMatrix> {
    let mut row_ptr = vec![0usize];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut d = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("non-empty line");
        label
            .parse::<f64>()
            .map_err(|_| err(format!("bad label {label:?}")))?;

        let start = indices.len();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:val, found {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(err("indices are 1-based; found 0".into()));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad value {val:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value {val}")));
            }
            d = d.max(idx);
            indices.push(idx - 1);
            values.push(val);
        }
        let mut pairs: Vec<(usize, f64)> = indices[start..]
            .iter()
            .copied()
            .zip(values[start..].iter().copied())
            .collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(err("duplicate feature index".into()));
        }
        for (k, (j, x)) in pairs.into_iter().enumerate() {
            indices[start + k] = j;
            values[start + k] = x;
        }
        row_ptr.push(indices.len());
    }

    if row_ptr.len() == 1 {
        return Err(invalid("LIBSVM input contains no data vectors"));
    }
    if d == 0 {
        return Err(invalid("LIBSVM input has no features"));
    }
    DataMatrix::sparse(d, row_ptr, indices, values)
}

/// Writes one line per data vector with label `0`, skipping exact zeros.
pub fn to_libsvm_string(data: &DataMatrix) -> String {
    let mut out = String::new();
    for i in 0..data.n() {
        out.push('0');
        for (j, x) in data.column_dense(i).into_iter().enumerate() {
            if x != 0.0 {
                let _ = write!(out, " {}:{}", j + 1, x);
            }
        }
        out.push('\n');
    }
    out
}
