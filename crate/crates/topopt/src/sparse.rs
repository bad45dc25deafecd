//! Compressed-row symmetric matrices and a preconditioned conjugate gradient
//! solver for the SPD systems produced by the FEM and evolution modules.

use crate::error::{Error, Result};
use crate::par;

/// Structurally symmetric sparse matrix in compressed-row storage. Both
/// triangles are stored so matrix-vector products stay row-local.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Assemble from (row, col, value) triplets. Duplicate entries are summed;
    /// rows end up sorted by column.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n || c >= n {
                return Err(Error::IndexOutOfRange { index: r.max(c), n });
            }
        }
        assert!(n <= u32::MAX as usize, "dimension exceeds packed-key range");
        // Sort by a packed (row, col) key. sort_unstable permutes equal keys
        // deterministically for a given input, so duplicate summation order is
        // reproducible.
        let mut entries: Vec<(u64, f64)> = triplets
            .iter()
            .map(|&(r, c, v)| (((r as u64) << 32) | c as u64, v))
            .collect();
        entries.sort_unstable_by_key(|&(key, _)| key);

        let mut row_counts = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut last = None;
        for &(key, v) in &entries {
            if last == Some(key) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push((key & 0xFFFF_FFFF) as usize);
                values.push(v);
                row_counts[(key >> 32) as usize + 1] += 1;
                last = Some(key);
            }
        }
        for r in 0..n {
            row_counts[r + 1] += row_counts[r];
        }
        Ok(Self {
            n,
            row_ptr: row_counts,
            col_idx,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .find(|&(&c, _)| c == i)
                    .map_or(0.0, |(_, &v)| v)
            })
            .collect()
    }

    /// y = A x. Each output entry is the same sequential dot product on both
    /// paths, so the parallel and sequential results are bitwise identical;
    /// small matrices take the sequential path where thread dispatch would
    /// dominate the row work.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        const PAR_MIN_NNZ: usize = 1 << 20;
        if cfg!(feature = "parallel") && self.nnz() >= PAR_MIN_NNZ {
            self.matvec_into_par(x, y);
        } else {
            self.matvec_into_seq(x, y);
        }
    }

    /// Row-parallel matvec, kept callable for benchmarks.
    pub fn matvec_into_par(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row_ptr = &self.row_ptr;
        let col_idx = &self.col_idx;
        let values = &self.values;
        par::fill_indexed(y, |i| {
            let mut acc = 0.0;
            for k in row_ptr[i]..row_ptr[i + 1] {
                acc += values[k] * x[col_idx[k]];
            }
            acc
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Sequential matvec, kept callable for benchmarks.
    pub fn matvec_into_seq(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row_ptr = &self.row_ptr;
        let col_idx = &self.col_idx;
        let values = &self.values;
        par::fill_indexed_seq(y, |i| {
            let mut acc = 0.0;
            for k in row_ptr[i]..row_ptr[i + 1] {
                acc += values[k] * x[col_idx[k]];
            }
            acc
        });
    }

    /// x' A x, sequentially accumulated.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        dot(x, &ax)
    }

    /// max_ij |a_ij - a_ji|; zero for an exactly symmetric matrix.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (jcols, jvals) = self.row(j);
                let vt = jcols
                    .iter()
                    .zip(jvals)
                    .find(|&(&c, _)| c == i)
                    .map_or(0.0, |(_, &w)| w);
                worst = worst.max((v - vt).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precond {
    None,
    Jacobi,
    /// zero fill-in incomplete Cholesky
    Ic0,
}

/// Zero fill-in incomplete Cholesky factor of an SPD matrix: A ~ L L' with
/// the sparsity pattern of the lower triangle of A.
#[derive(Debug, Clone)]
pub struct Ic0Factor {
    // strictly lower part of L, rows sorted by column
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
    diag: Vec<f64>,
    // transpose of the strictly lower part (for the backward sweep)
    t_row_ptr: Vec<usize>,
    t_col: Vec<usize>,
    t_val: Vec<f64>,
}

impl Ic0Factor {
    pub fn new(a: &SparseSymMatrix) -> Result<Self> {
        // retry with a progressively shifted diagonal if a pivot fails
        let mut shift = 0.0;
        for _ in 0..6 {
            match Self::factor(a, shift) {
                Some(f) => return Ok(f),
                None => shift = if shift == 0.0 { 1e-3 } else { shift * 10.0 },
            }
        }
        Err(Error::SingularSystem(
            "incomplete Cholesky breakdown even with diagonal shift".into(),
        ))
    }

    fn factor(a: &SparseSymMatrix, shift: f64) -> Option<Self> {
        let n = a.n();
        // strictly-lower pattern of A
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            let (cols, _) = a.row(i);
            row_ptr[i + 1] = row_ptr[i] + cols.iter().filter(|&&c| c < i).count();
        }
        let nnz = row_ptr[n];
        let mut col = vec![0usize; nnz];
        let mut val = vec![0.0f64; nnz];
        let mut diag = vec![0.0f64; n];

        for i in 0..n {
            let (cols_i, vals_i) = a.row(i);
            let lo = row_ptr[i];
            let mut fill = lo;
            let mut sum_sq = 0.0;
            let mut a_ii = 0.0;
            for (&j, &aij) in cols_i.iter().zip(vals_i) {
                if j < i {
                    // L[i][j] = (A[i][j] - <Lrow_i, Lrow_j>_{k<j}) / L[j][j]
                    let mut s = aij;
                    let (mut p, mut q) = (lo, row_ptr[j]);
                    let (p_end, q_end) = (fill, row_ptr[j + 1]);
                    while p < p_end && q < q_end {
                        match col[p].cmp(&col[q]) {
                            std::cmp::Ordering::Less => p += 1,
                            std::cmp::Ordering::Greater => q += 1,
                            std::cmp::Ordering::Equal => {
                                s -= val[p] * val[q];
                                p += 1;
                                q += 1;
                            }
                        }
                    }
                    let lij = s / diag[j];
                    col[fill] = j;
                    val[fill] = lij;
                    fill += 1;
                    sum_sq += lij * lij;
                } else if j == i {
                    a_ii = aij;
                }
            }
            let d2 = a_ii * (1.0 + shift) - sum_sq;
            if d2 <= 0.0 {
                return None;
            }
            diag[i] = d2.sqrt();
        }

        // transpose of the strictly lower part
        let mut t_row_ptr = vec![0usize; n + 1];
        for &c in &col {
            t_row_ptr[c + 1] += 1;
        }
        for i in 0..n {
            t_row_ptr[i + 1] += t_row_ptr[i];
        }
        let mut t_col = vec![0usize; nnz];
        let mut t_val = vec![0.0f64; nnz];
        let mut cursor = t_row_ptr.clone();
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = col[k];
                t_col[cursor[j]] = i;
                t_val[cursor[j]] = val[k];
                cursor[j] += 1;
            }
        }
        Some(Self {
            row_ptr,
            col,
            val,
            diag,
            t_row_ptr,
            t_col,
            t_val,
        })
    }

    /// z = (L L')^{-1} r via forward and backward substitution.
    pub fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag.len();
        // forward: L y = r, reusing z as y
        for i in 0..n {
            let mut s = r[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s -= self.val[k] * z[self.col[k]];
            }
            z[i] = s / self.diag[i];
        }
        // backward: L' z = y
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.t_row_ptr[i]..self.t_row_ptr[i + 1] {
                s -= self.t_val[k] * z[self.t_col[k]];
            }
            z[i] = s / self.diag[i];
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for SPD systems, stopping at
/// ||b - Ax||_2 <= tol * ||b||_2.
pub fn cg_solve(
    a: &SparseSymMatrix,
    b: &[f64],
    tol: f64,
    maxit: usize,
    precond: Precond,
) -> Result<CgOutcome> {
    cg_solve_warm(a, b, None, tol, maxit, precond)
}

/// CG with an optional initial guess (warm start).
pub fn cg_solve_warm(
    a: &SparseSymMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
    precond: Precond,
) -> Result<CgOutcome> {
    cg_solve_observed(a, b, x0, tol, maxit, precond, |_| {})
}

/// CG exposing every iterate to `observer`; used by tests that track the
/// A-norm of the error.
pub fn cg_solve_observed(
    a: &SparseSymMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
    precond: Precond,
    observer: impl FnMut(&[f64]),
) -> Result<CgOutcome> {
    let applier = match precond {
        Precond::None => Applier::Identity,
        Precond::Jacobi => Applier::Diagonal(
            a.diagonal()
                .iter()
                .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
        Precond::Ic0 => Applier::Factored(Ic0Factor::new(a)?),
    };
    pcg(a, b, x0, tol, maxit, &applier, observer)
}

/// CG with an already-computed incomplete Cholesky preconditioner (the
/// evolution operator factors its fixed matrix once).
pub fn cg_solve_prefactored(
    a: &SparseSymMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
    factor: &Ic0Factor,
    observer: impl FnMut(&[f64]),
) -> Result<CgOutcome> {
    pcg(
        a,
        b,
        x0,
        tol,
        maxit,
        &Applier::FactoredRef(factor),
        observer,
    )
}

enum Applier<'a> {
    Identity,
    Diagonal(Vec<f64>),
    Factored(Ic0Factor),
    FactoredRef(&'a Ic0Factor),
}

impl Applier<'_> {
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Applier::Identity => z.copy_from_slice(r),
            Applier::Diagonal(d) => {
                for i in 0..r.len() {
                    z[i] = r[i] * d[i];
                }
            }
            Applier::Factored(f) => f.apply_into(r, z),
            Applier::FactoredRef(f) => f.apply_into(r, z),
        }
    }
}

fn pcg(
    a: &SparseSymMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
    applier: &Applier<'_>,
    mut observer: impl FnMut(&[f64]),
) -> Result<CgOutcome> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    let mut x = match x0 {
        Some(x0) => {
            assert_eq!(x0.len(), n);
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual_norm: 0.0,
        });
    }

    let mut ax = a.matvec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let mut res = norm(&r);
    if res <= tol * b_norm {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual_norm: res,
        });
    }

    let mut z = vec![0.0; n];
    applier.apply_into(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for iter in 1..=maxit {
        a.matvec_into(&p, &mut ax);
        let pap = dot(&p, &ax);
        if pap <= 0.0 {
            return Err(Error::SolverFailure {
                iterations: iter,
                residual: res,
                tolerance: tol,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ax[i];
        }
        observer(&x);
        res = norm(&r);
        if res <= tol * b_norm {
            return Ok(CgOutcome {
                x,
                iterations: iter,
                residual_norm: res,
            });
        }
        applier.apply_into(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        iterations: maxit,
        residual: res,
        tolerance: tol,
    })
}
