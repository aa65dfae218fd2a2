//! Per-feature preprocessing. Statistics run over all `n` values of a
//! feature, implicit zeros included; standard deviation is the population
//! one (divide by `n`).

use crate::error::{invalid, Result};
use crate::matrix::{DataMatrix, Storage};

/// Features with a smaller standard deviation are zeroed by [`standardize`].
pub const MIN_STD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preprocessing {
    Standardize,
    MinMax,
    #[default]
    None,
}

impl Preprocessing {
    pub fn apply(self, data: &DataMatrix) -> Result<DataMatrix> {
        match self {
            Preprocessing::Standardize => standardize(data),
            Preprocessing::MinMax => minmax_scale(data),
            Preprocessing::None => Ok(data.clone()),
        }
    }
}

impl std::str::FromStr for Preprocessing {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standardize" => Ok(Self::Standardize),
            "minmax" => Ok(Self::MinMax),
            "none" => Ok(Self::None),
            other => Err(invalid(format!("unknown preprocessing {other:?}"))),
        }
    }
}

fn feature_stats(data: &DataMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (data.n() as f64, data.d());
    let mut sum = vec![0.0; d];
    for i in 0..data.n() {
        data.column(i).axpy_into(1.0, &mut sum);
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let mut var = vec![0.0; d];
    for i in 0..data.n() {
        for (j, x) in data.column_dense(i).into_iter().enumerate() {
            let c = x - mean[j];
            var[j] += c * c;
        }
    }
    (mean, var.into_iter().map(|v| (v / n).sqrt()).collect())
}

/// Zero mean and unit population standard deviation per feature. Always
/// returns dense storage.
pub fn standardize(data: &DataMatrix) -> Result<DataMatrix> {
    if data.n() < 2 {
        return Err(invalid("standardize needs at least two data vectors"));
    }
    let (mean, sd) = feature_stats(data);
    let d = data.d();
    let mut values = Vec::with_capacity(data.n() * d);
    for i in 0..data.n() {
        for (j, x) in data.column_dense(i).into_iter().enumerate() {
            values.push(if sd[j] < MIN_STD { 0.0 } else { (x - mean[j]) / sd[j] });
        }
    }
    DataMatrix::dense(d, data.n(), values)
}

/// Maps each feature onto `[0, 1]`. Sparse input stays sparse; implicit
/// zeros are only materialized for features whose minimum is negative.
pub fn minmax_scale(data: &DataMatrix) -> Result<DataMatrix> {
    let d = data.d();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..data.n() {
        for (j, x) in data.column_dense(i).into_iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    let constant: Vec<bool> = (0..d).map(|j| hi[j] - lo[j] <= 0.0).collect();
    let zeroed = constant
        .iter()
        .enumerate()
        .filter(|(j, &c)| c && (lo[*j] != 0.0))
        .count();
    if zeroed > 0 {
        log::warn!("minmax: {zeroed} constant feature(s) mapped to zero");
    }
    let map = |j: usize, x: f64| if constant[j] { 0.0 } else { (x - lo[j]) / (hi[j] - lo[j]) };

    match data.storage() {
        Storage::Dense { values } => {
            let out = values
                .iter()
                .enumerate()
                .map(|(k, &x)| map(k % d, x))
                .collect();
            DataMatrix::dense(d, data.n(), out)
        }
        Storage::Sparse { row_ptr, indices, values } => {
            // Features where an implicit zero maps to a nonzero value.
            let fill: Vec<usize> = (0..d).filter(|&j| map(j, 0.0) != 0.0).collect();
            let mut new_ptr = vec![0];
            let mut new_idx = Vec::new();
            let mut new_val = Vec::new();
            for i in 0..data.n() {
                let (a, b) = (row_ptr[i], row_ptr[i + 1]);
                let mut stored = indices[a..b].iter().zip(&values[a..b]).peekable();
                let mut fills = fill.iter().peekable();
                loop {
                    let next_stored = stored.peek().map(|(j, _)| **j);
                    let next_fill = fills.peek().map(|j| **j);
                    match (next_stored, next_fill) {
                        (None, None) => break,
                        (Some(js), nf) if nf.is_none_or(|jf| js <= jf) => {
                            let (j, x) = stored.next().expect("peeked");
                            if nf == Some(js) {
                                fills.next();
                            }
                            new_idx.push(*j);
                            new_val.push(map(*j, *x));
                        }
                        (_, Some(jf)) => {
                            fills.next();
                            new_idx.push(jf);
                            new_val.push(map(jf, 0.0));
                        }
                        (Some(_), None) => unreachable!(),
                    }
                }
                new_ptr.push(new_idx.len());
            }
            DataMatrix::sparse(d, new_ptr, new_idx, new_val)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_libsvm_str;

    fn feature(data: &DataMatrix, j: usize) -> Vec<f64> {
        (0..data.n()).map(|i| data.column_dense(i)[j]).collect()
    }

    #[test]
    fn standardize_two_values() {
        let a = DataMatrix::from_columns(&[vec![0.0, 5.0, 1.0], vec![2.0, 5.0, 3.0]]).unwrap();
        let s = standardize(&a).unwrap();
        assert_eq!(feature(&s, 0), vec![-1.0, 1.0]);
        assert_eq!(feature(&s, 1), vec![0.0, 0.0]);
        assert_eq!(feature(&s, 2), vec![-1.0, 1.0]);
        assert!(standardize(&DataMatrix::from_columns(&[vec![1.0]]).unwrap()).is_err());
    }

    #[test]
    fn minmax_two_values() {
        let a = DataMatrix::from_columns(&[vec![1.0, 0.0], vec![3.0, 0.0]]).unwrap();
        let s = minmax_scale(&a).unwrap();
        assert_eq!(feature(&s, 0), vec![0.0, 1.0]);
        assert_eq!(feature(&s, 1), vec![0.0, 0.0]);
    }

    #[test]
    fn minmax_keeps_sparse_nonnegative_data_sparse() {
        let a = parse_libsvm_str("1 1:2 3:4\n1 2:1\n1 3:2\n").unwrap();
        let s = minmax_scale(&a).unwrap();
        assert!(s.is_sparse());
        assert_eq!(s.nnz(), a.nnz());
        assert_eq!(s.column_dense(0), vec![1.0, 0.0, 1.0]);
        assert_eq!(s.column_dense(2), vec![0.0, 0.0, 0.5]);
    }

    #[test]
    fn minmax_fills_negative_features() {
        let a = parse_libsvm_str("1 1:-2\n1 2:1\n").unwrap();
        let s = minmax_scale(&a).unwrap();
        assert_eq!(s.column_dense(0), vec![0.0, 0.0]);
        assert_eq!(s.column_dense(1), vec![1.0, 1.0]);
        assert_eq!(s.to_dense(), minmax_scale(&a.to_dense()).unwrap());
    }

    #[test]
    fn all_zero_feature_stays_zero() {
        let a = parse_libsvm_str("1 1:1\n1 1:3\n1 1:2 3:0\n").unwrap();
        assert_eq!(feature(&standardize(&a).unwrap(), 1), vec![0.0; 3]);
        assert_eq!(feature(&minmax_scale(&a).unwrap(), 1), vec![0.0; 3]);
    }
}
