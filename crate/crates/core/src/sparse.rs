//! Compressed-sparse-row matrices, triplet assembly and a direct solver.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular to working precision at row {row} (relative residual {residual:.3e})")]
    Singular { row: usize, residual: f64 },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw arrays after checking the structural invariants.
    pub fn try_from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if row_offsets.len() != n_rows + 1 || row_offsets[0] != 0 {
            return Err(SparseError::InvalidStructure("row_offsets length or origin"));
        }
        if *row_offsets.last().unwrap() != col_indices.len() || col_indices.len() != values.len() {
            return Err(SparseError::InvalidStructure("nnz mismatch"));
        }
        for r in 0..n_rows {
            let (a, b) = (row_offsets[r], row_offsets[r + 1]);
            if a > b {
                return Err(SparseError::InvalidStructure("row_offsets decreasing"));
            }
            let cols = &col_indices[a..b];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(SparseError::InvalidStructure("column indices unsorted, duplicated or out of range"));
            }
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut b = CooBuilder::new(rows.len(), n_cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.finalize()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Position of `(i, j)` in `values`, if stored.
    #[inline]
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_offsets[i];
        let cols = &self.col_indices[start..self.row_offsets[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.find(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.n_cols {
            return Err(SparseError::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        Ok(self.mul_vec(x))
    }

    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut b = CooBuilder::new(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(j, i, v);
            }
        }
        b.finalize()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Zeroes row `i` and puts `diag` on its diagonal (which must be stored).
    pub fn replace_row_with_identity(&mut self, i: usize, diag: f64) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.values[r].iter_mut().for_each(|v| *v = 0.0);
        let k = self.find(i, i).expect("diagonal entry not in pattern");
        self.values[k] = diag;
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }
}

/// Triplet accumulator. Duplicates are summed in insertion order, so the
/// result is a deterministic function of the push sequence.
#[derive(Debug, Clone)]
pub struct CooBuilder {
    n_rows: usize,
    n_cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl CooBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, triplets: Vec::new() }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        Self { n_rows, n_cols, triplets: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.n_rows && col < self.n_cols, "triplet ({row}, {col}) out of bounds");
        self.triplets.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// Appends another builder's triplets after this one's.
    pub fn merge(&mut self, other: CooBuilder) {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        self.triplets.extend(other.triplets);
    }

    pub fn finalize(self) -> CsrMatrix {
        let mut order: Vec<usize> = (0..self.triplets.len()).collect();
        // Stable: duplicates keep insertion order.
        order.sort_by_key(|&k| (self.triplets[k].0, self.triplets[k].1));

        let mut row_offsets = vec![0usize; self.n_rows + 1];
        let mut col_indices = Vec::with_capacity(order.len());
        let mut values: Vec<f64> = Vec::with_capacity(order.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = self.triplets[k];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        CsrMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_offsets, col_indices, values }
    }
}

/// Relative residual `‖A x − b‖₂ / max(‖b‖₂, tiny)`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    r / norm2(b).max(f64::MIN_POSITIVE)
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Residual bound the direct solver guarantees.
pub const SOLVE_RTOL: f64 = 1e-10;

/// One-shot sparse LU solve of `A x = b`.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SparseError> {
    DirectSolver::new().solve(a, b).map(|(x, _)| x)
}

/// Sparse LU solver that keeps its symbolic analysis while the matrix
/// pattern stays the same.
///
/// The CSR arrays of `A` are handed to the factorization as the CSC arrays
/// of `Aᵀ`; systems are then solved with the transposed factors.
#[derive(Default)]
pub struct DirectSolver {
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    pub tol: Option<f64>,
    pub factorizations: usize,
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tolerance(tol: f64) -> Self {
        Self { tol: Some(tol), ..Self::default() }
    }

    /// Solves `A x = b`, returning `x` and the achieved relative residual.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, f64), SparseError> {
        if a.n_rows != a.n_cols {
            return Err(SparseError::NotSquare { rows: a.n_rows, cols: a.n_cols });
        }
        if b.len() != a.n_rows {
            return Err(SparseError::DimensionMismatch { expected: a.n_rows, got: b.len() });
        }
        let n = a.n_rows;
        let tol = self.tol.unwrap_or(SOLVE_RTOL);
        if n == 0 {
            return Ok((Vec::new(), 0.0));
        }

        let reuse = matches!(&self.symbolic, Some((ro, ci, _)) if *ro == a.row_offsets && *ci == a.col_indices);
        if !reuse {
            let pattern = SymbolicSparseColMatRef::new_checked(n, n, &a.row_offsets, None, &a.col_indices);
            let sym = SymbolicLu::try_new(pattern).map_err(|e| SparseError::Factorization(format!("{e:?}")))?;
            self.symbolic = Some((a.row_offsets.clone(), a.col_indices.clone(), sym));
        }
        let (_, _, sym) = self.symbolic.as_ref().unwrap();
        // Structurally valid by construction of CsrMatrix.
        let pattern = unsafe { SymbolicSparseColMatRef::new_unchecked(n, n, &a.row_offsets, None, &a.col_indices) };
        let at = SparseColMatRef::new(pattern, &a.values);
        let lu = Lu::try_new_with_symbolic(sym.clone(), at).map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                SparseError::Singular { row: index, residual: f64::INFINITY }
            }
            other => SparseError::Factorization(format!("{other:?}")),
        })?;
        self.factorizations += 1;

        let solve = |rhs: &[f64]| {
            let mut x = rhs.to_vec();
            lu.solve_transpose_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
            x
        };

        let mut x = solve(b);
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(SparseError::Singular { row, residual: f64::INFINITY });
        }
        let mut res = relative_residual(a, &x, b);
        // A few rounds of iterative refinement.
        for _ in 0..3 {
            if res <= tol {
                break;
            }
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let d = solve(&r);
            if d.iter().any(|v| !v.is_finite()) {
                break;
            }
            let trial: Vec<f64> = x.iter().zip(&d).map(|(p, q)| p + q).collect();
            let trial_res = relative_residual(a, &trial, b);
            if trial_res >= res {
                break;
            }
            x = trial;
            res = trial_res;
        }
        if res > tol {
            let ax = a.mul_vec(&x);
            let row = ax
                .iter()
                .zip(b)
                .enumerate()
                .max_by(|(_, (p, q)), (_, (r, s))| (*p - *q).abs().total_cmp(&(*r - *s).abs()))
                .map_or(0, |(i, _)| i);
            return Err(SparseError::Singular { row, residual: res });
        }
        Ok((x, res))
    }
}
