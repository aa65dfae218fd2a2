//! Data-matrix kernels.
//!
//! The dataset `A = [a_1 … a_n]` holds `n` data vectors of dimension `d`,
//! stored either densely (one contiguous column per data vector) or as a
//! row-compressed sparse layout where each compressed row is one data
//! vector. The covariance `C = (1/n) A Aᵀ` is never formed by the
//! mat-vec kernels; [`DataMatrix::explicit_covariance`] builds it only for
//! small `d`.

use std::sync::OnceLock;

use rand::seq::index;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, check_len, dot, norm};

/// Largest dimension for which an explicit `d × d` covariance is built.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 512;

/// Vectors with a smaller Euclidean norm are refused by [`normalize`].
pub const NORMALIZE_FLOOR: f64 = 1e-150;

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    /// `values[i * d + j]` is component `j` of data vector `a_i`.
    Dense { values: Vec<f64> },
    /// Compressed rows, one per data vector. Indices within a row are
    /// strictly increasing.
    Sparse {
        row_ptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

/// Borrowed view of one data vector.
#[derive(Debug, Clone, Copy)]
pub enum ColumnView<'a> {
    Dense(&'a [f64]),
    Sparse {
        indices: &'a [usize],
        values: &'a [f64],
    },
}

impl ColumnView<'_> {
    pub fn dot(&self, v: &[f64]) -> f64 {
        match *self {
            ColumnView::Dense(a) => dot(a, v),
            ColumnView::Sparse { indices, values } => {
                indices.iter().zip(values).map(|(&j, x)| x * v[j]).sum()
            }
        }
    }

    /// out += alpha * a_i
    pub fn axpy_into(&self, alpha: f64, out: &mut [f64]) {
        match *self {
            ColumnView::Dense(a) => axpy(alpha, a, out),
            ColumnView::Sparse { indices, values } => {
                for (&j, x) in indices.iter().zip(values) {
                    out[j] += alpha * x;
                }
            }
        }
    }

    pub fn squared_norm(&self) -> f64 {
        match *self {
            ColumnView::Dense(a) => dot(a, a),
            ColumnView::Sparse { values, .. } => dot(values, values),
        }
    }
}

#[derive(Debug)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    storage: Storage,
    column_norms: OnceLock<Vec<f64>>,
}

impl Clone for DataMatrix {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            d: self.d,
            storage: self.storage.clone(),
            column_norms: OnceLock::new(),
        }
    }
}

impl PartialEq for DataMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.storage == other.storage
    }
}

impl DataMatrix {
    /// Dense data from `n` columns of length `d`, laid out column after column.
    pub fn dense(d: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("data matrix needs n >= 1 and d >= 1"));
        }
        if values.len() != n * d {
            return Err(Error::Dimension {
                expected: n * d,
                found: values.len(),
            });
        }
        if !values.iter().all(|x| x.is_finite()) {
            return Err(invalid("data matrix contains non-finite entries"));
        }
        Ok(Self {
            n,
            d,
            storage: Storage::Dense { values },
            column_norms: OnceLock::new(),
        })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(d * columns.len());
        for c in columns {
            check_len(c, d)?;
            values.extend_from_slice(c);
        }
        Self::dense(d, columns.len(), values)
    }

    /// Sparse data from compressed rows (one row per data vector). Entries
    /// within a row are sorted by index; duplicate indices are rejected.
    pub fn sparse(
        d: usize,
        row_ptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 || row_ptr.len() < 2 {
            return Err(invalid("data matrix needs n >= 1 and d >= 1"));
        }
        let n = row_ptr.len() - 1;
        if row_ptr[0] != 0 || row_ptr[n] != indices.len() || indices.len() != values.len() {
            return Err(invalid("inconsistent compressed-row layout"));
        }
        if row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("row pointers must be non-decreasing"));
        }
        if !values.iter().all(|x| x.is_finite()) {
            return Err(invalid("data matrix contains non-finite entries"));
        }
        let mut indices = indices;
        let mut values = values;
        for i in 0..n {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            let idx = &indices[lo..hi];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                let mut pairs: Vec<(usize, f64)> = idx
                    .iter()
                    .copied()
                    .zip(values[lo..hi].iter().copied())
                    .collect();
                pairs.sort_by_key(|p| p.0);
                if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(invalid(format!("duplicate index in data vector {i}")));
                }
                for (k, (j, x)) in pairs.into_iter().enumerate() {
                    indices[lo + k] = j;
                    values[lo + k] = x;
                }
            }
            if indices[lo..hi].iter().any(|&j| j >= d) {
                return Err(invalid(format!("index out of range in data vector {i}")));
            }
        }
        Ok(Self {
            n,
            d,
            storage: Storage::Sparse {
                row_ptr,
                indices,
                values,
            },
            column_norms: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense { values } => values.iter().filter(|x| **x != 0.0).count(),
            Storage::Sparse { values, .. } => values.len(),
        }
    }

    pub fn column(&self, i: usize) -> ColumnView<'_> {
        match &self.storage {
            Storage::Dense { values } => ColumnView::Dense(&values[i * self.d..(i + 1) * self.d]),
            Storage::Sparse {
                row_ptr,
                indices,
                values,
            } => {
                let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
                ColumnView::Sparse {
                    indices: &indices[lo..hi],
                    values: &values[lo..hi],
                }
            }
        }
    }

    /// Dense copy of data vector `i`.
    pub fn column_dense(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.column(i).axpy_into(1.0, &mut out);
        out
    }

    /// Cached `‖a_i‖²` for every data vector.
    pub fn column_norms(&self) -> &[f64] {
        self.column_norms
            .get_or_init(|| (0..self.n).map(|i| self.column(i).squared_norm()).collect())
    }

    pub fn to_dense(&self) -> DataMatrix {
        let mut values = Vec::with_capacity(self.n * self.d);
        for i in 0..self.n {
            values.extend(self.column_dense(i));
        }
        DataMatrix::dense(self.d, self.n, values).expect("shape preserved")
    }

    /// Sparse copy; exact zeros are dropped.
    pub fn to_sparse(&self) -> DataMatrix {
        let mut row_ptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n {
            for (j, x) in self.column_dense(i).into_iter().enumerate() {
                if x != 0.0 {
                    indices.push(j);
                    values.push(x);
                }
            }
            row_ptr.push(indices.len());
        }
        DataMatrix::sparse(self.d, row_ptr, indices, values).expect("shape preserved")
    }

    /// `(1/n) Σ a_i a_iᵀ` as a row-major `d × d` array. Refused above `limit`.
    pub fn explicit_covariance(&self, limit: usize) -> Result<Vec<f64>> {
        if self.d > limit {
            return Err(Error::Capacity(format!(
                "refusing to materialize a {0}x{0} covariance (limit {limit})",
                self.d
            )));
        }
        let d = self.d;
        let mut c = vec![0.0; d * d];
        for i in 0..self.n {
            let a = self.column_dense(i);
            for r in 0..d {
                if a[r] == 0.0 {
                    continue;
                }
                for s in 0..d {
                    c[r * d + s] += a[r] * a[s];
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        c.iter_mut().for_each(|x| *x *= inv_n);
        Ok(c)
    }
}

/// How mini-batch indices are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    WithoutReplacement,
    WithReplacement,
}

/// Column indices forming one mini-batch `S_t`, kept sorted so the
/// reduction order is fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniBatch {
    indices: Vec<usize>,
}

impl MiniBatch {
    /// Distinct indices, each below `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("mini-batch indices must be distinct"));
        }
        Self::with_repeats(indices, n)
    }

    /// Indices may repeat (with-replacement draws).
    pub fn with_repeats(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("empty mini-batch"));
        }
        if indices.iter().any(|&i| i >= n) {
            return Err(invalid("mini-batch index out of range"));
        }
        indices.sort_unstable();
        Ok(Self { indices })
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }
}

/// `(1/n) A (Aᵀ v)`, as a pass computing `a_iᵀ v` followed by a pass
/// accumulating the scaled columns.
pub fn covariance_matvec(data: &DataMatrix, v: &[f64]) -> Result<Vec<f64>> {
    check_len(v, data.d())?;
    let proj: Vec<f64> = (0..data.n()).map(|i| data.column(i).dot(v)).collect();
    let mut out = vec![0.0; data.d()];
    for (i, p) in proj.into_iter().enumerate() {
        if p != 0.0 {
            data.column(i).axpy_into(p, &mut out);
        }
    }
    let inv_n = 1.0 / data.n() as f64;
    out.iter_mut().for_each(|x| *x *= inv_n);
    Ok(out)
}

/// `(1/|S|) Σ_{l∈S} a_l (a_lᵀ v)`.
pub fn minibatch_matvec(data: &DataMatrix, batch: &MiniBatch, v: &[f64]) -> Result<Vec<f64>> {
    check_len(v, data.d())?;
    if batch.size() == 0 {
        return Err(invalid("empty mini-batch"));
    }
    if batch.indices().iter().any(|&i| i >= data.n()) {
        return Err(invalid("mini-batch index out of range"));
    }
    let mut out = vec![0.0; data.d()];
    for &i in batch.indices() {
        let col = data.column(i);
        let p = col.dot(v);
        if p != 0.0 {
            col.axpy_into(p, &mut out);
        }
    }
    let inv = 1.0 / batch.size() as f64;
    out.iter_mut().for_each(|x| *x *= inv);
    Ok(out)
}

/// `v − (w₀ᵀv / ‖w₀‖²) w₀`.
pub fn project_orthogonal(anchor: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_len(v, anchor.len())?;
    let nn = dot(anchor, anchor);
    if !(nn > 0.0) || !nn.is_finite() {
        return Err(invalid("projection anchor must be a nonzero finite vector"));
    }
    let coef = dot(anchor, v) / nn;
    let mut out = v.to_vec();
    axpy(-coef, anchor, &mut out);
    Ok(out)
}

/// Uniform random subset of `{0,…,n−1}` of the given size.
pub fn sample_minibatch<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Result<MiniBatch> {
    sample_minibatch_with(n, size, Sampling::WithoutReplacement, rng)
}

pub fn sample_minibatch_with<R: Rng + ?Sized>(
    n: usize,
    size: usize,
    sampling: Sampling,
    rng: &mut R,
) -> Result<MiniBatch> {
    if size == 0 {
        return Err(invalid("mini-batch size must be at least 1"));
    }
    match sampling {
        Sampling::WithoutReplacement => {
            if size > n {
                return Err(invalid(format!("mini-batch size {size} exceeds n = {n}")));
            }
            if size == n {
                return Ok(MiniBatch::full(n));
            }
            let mut indices = index::sample(rng, n, size).into_vec();
            indices.sort_unstable();
            Ok(MiniBatch { indices })
        }
        Sampling::WithReplacement => {
            if n == 0 {
                return Err(invalid("cannot sample from an empty dataset"));
            }
            let mut indices: Vec<usize> = (0..size).map(|_| rng.random_range(0..n)).collect();
            indices.sort_unstable();
            Ok(MiniBatch { indices })
        }
    }
}

/// `wᵀCw / wᵀw`.
pub fn rayleigh_quotient(data: &DataMatrix, w: &[f64]) -> Result<f64> {
    check_len(w, data.d())?;
    let ww = dot(w, w);
    if !(ww > 0.0) {
        return Err(invalid("Rayleigh quotient of the zero vector"));
    }
    let cw = covariance_matvec(data, w)?;
    Ok(dot(w, &cw) / ww)
}

const UNIT_TOL: f64 = 1e-9;

/// `1 − (wᵀu₁)²` for unit vectors, clamped into `[0, 1]`.
pub fn error_gap(w: &[f64], u1: &[f64]) -> Result<f64> {
    check_len(w, u1.len())?;
    for (name, v) in [("w", w), ("u1", u1)] {
        let nv = norm(v);
        if (nv - 1.0).abs() > UNIT_TOL {
            return Err(invalid(format!("{name} is not unit norm (‖{name}‖ = {nv})")));
        }
    }
    let c = dot(w, u1);
    Ok((1.0 - c * c).clamp(0.0, 1.0))
}

pub fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let nv = norm(v);
    if !nv.is_finite() {
        return Err(Error::Numeric("cannot normalize a vector with non-finite norm".into()));
    }
    if nv < NORMALIZE_FLOOR {
        return Err(Error::Numeric(format!(
            "cannot normalize a vector of norm {nv:e} (below {NORMALIZE_FLOOR:e})"
        )));
    }
    Ok(v.iter().map(|x| x / nv).collect())
}


#[cfg(test)]
mod tests {
    use super::fixtures::fixture_a;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_dense(d: usize, n: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..d * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        DataMatrix::dense(d, n, values).unwrap()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let scale = norm(b).max(1e-300);
        crate::linalg::max_abs_diff(a, b) / scale
    }

    #[test]
    fn covariance_matvec_fixture() {
        let a = fixture_a();
        assert_eq!(covariance_matvec(&a, &[1.0, 1.0]).unwrap(), vec![2.0, 0.5]);
        assert_eq!(covariance_matvec(&a, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn covariance_matvec_matches_explicit_covariance() {
        // 5 data vectors in dimension 8; C built entry by entry.
        let a = random_dense(8, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut c = vec![vec![0.0; 8]; 8];
        for r in 0..8 {
            for s in 0..8 {
                c[r][s] = (0..5).map(|i| a.column_dense(i)[r] * a.column_dense(i)[s]).sum::<f64>() / 5.0;
            }
        }
        let expected: Vec<f64> = c.iter().map(|row| dot(row, &v)).collect();
        let got = covariance_matvec(&a, &v).unwrap();
        assert!(rel_err(&got, &expected) <= 1e-12);
    }

    #[test]
    fn covariance_matvec_rejects_wrong_length() {
        assert!(matches!(
            covariance_matvec(&fixture_a(), &[1.0]),
            Err(Error::Dimension { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn minibatch_matvec_fixture() {
        let a = fixture_a();
        let b0 = MiniBatch::new(vec![0], 2).unwrap();
        let b1 = MiniBatch::new(vec![1], 2).unwrap();
        assert_eq!(minibatch_matvec(&a, &b0, &[1.0, 1.0]).unwrap(), vec![4.0, 0.0]);
        assert_eq!(minibatch_matvec(&a, &b1, &[1.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        let full = MiniBatch::full(2);
        assert_eq!(
            minibatch_matvec(&a, &full, &[0.3, -0.7]).unwrap(),
            covariance_matvec(&a, &[0.3, -0.7]).unwrap()
        );
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(MiniBatch::new(vec![], 3).is_err());
        assert!(MiniBatch::new(vec![1, 1], 3).is_err());
        assert!(MiniBatch::new(vec![3], 3).is_err());
    }

    #[test]
    fn projection_cases() {
        let w0 = [0.3, -1.2, 0.5];
        let p = project_orthogonal(&w0, &w0).unwrap();
        assert!(norm(&p) < 1e-15);
        assert_eq!(project_orthogonal(&[1.0, 0.0], &[3.0, 4.0]).unwrap(), vec![0.0, 4.0]);
        assert!(project_orthogonal(&[0.0, 0.0], &[3.0, 4.0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let anchor: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = project_orthogonal(&anchor, &v).unwrap();
        assert!(dot(&anchor, &r).abs() <= 1e-12 * norm(&anchor) * norm(&v));
    }

    #[test]
    fn sampling_full_set_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_minibatch(5, 5, &mut rng).unwrap().indices(), &[0, 1, 2, 3, 4]);
        let a = sample_minibatch(100, 7, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_minibatch(100, 7, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(sample_minibatch(3, 4, &mut rng).is_err());
        assert!(sample_minibatch(3, 0, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let zeros = (0..draws)
            .filter(|_| sample_minibatch(2, 1, &mut rng).unwrap().indices()[0] == 0)
            .count();
        let freq = zeros as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn with_replacement_draws_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = sample_minibatch_with(3, 10, Sampling::WithReplacement, &mut rng).unwrap();
        assert_eq!(b.size(), 10);
        assert!(b.indices().iter().all(|&i| i < 3));
    }

    #[test]
    fn rayleigh_quotient_fixture() {
        let a = fixture_a();
        assert_eq!(rayleigh_quotient(&a, &[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(rayleigh_quotient(&a, &[0.0, 1.0]).unwrap(), 0.5);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((rayleigh_quotient(&a, &[h, h]).unwrap() - 1.25).abs() < 1e-15);
        assert!(rayleigh_quotient(&a, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn error_gap_cases() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(error_gap(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(error_gap(&[-1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((error_gap(&[h, h], &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(error_gap(&[2.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn normalize_cases() {
        let v = normalize(&[3.0, 4.0]).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
        assert_eq!(normalize(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(normalize(&[1e-200, 0.0]), Err(Error::Numeric(_))));
        assert!(matches!(normalize(&[0.0, 0.0]), Err(Error::Numeric(_))));
        assert!(matches!(normalize(&[f64::NAN, 1.0]), Err(Error::Numeric(_))));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let dense = random_dense(6, 9, 17);
        let sparse = dense.to_sparse();
        assert!(sparse.is_sparse());
        let v = [0.1, -0.2, 0.3, 0.4, -0.5, 0.6];
        let a = covariance_matvec(&dense, &v).unwrap();
        let b = covariance_matvec(&sparse, &v).unwrap();
        assert!(rel_err(&b, &a) <= 1e-12);
        assert_eq!(sparse.to_dense(), dense);
    }

    #[test]
    fn sparse_constructor_sorts_and_validates() {
        let m = DataMatrix::sparse(3, vec![0, 2], vec![2, 0], vec![1.0, 2.0]).unwrap();
        assert_eq!(m.column_dense(0), vec![2.0, 0.0, 1.0]);
        assert!(DataMatrix::sparse(3, vec![0, 2], vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(DataMatrix::sparse(3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(DataMatrix::dense(2, 1, vec![f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn explicit_covariance_respects_limit() {
        let a = fixture_a();
        assert_eq!(a.explicit_covariance(512).unwrap(), vec![2.0, 0.0, 0.0, 0.5]);
        assert!(matches!(a.explicit_covariance(1), Err(Error::Capacity(_))));
        assert_eq!(a.column_norms(), &[4.0, 1.0]);
    }
}
