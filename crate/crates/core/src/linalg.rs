//! Sparse symmetric vertex operators and their linear solves.

use std::collections::BTreeMap;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::DMatrix;
use thiserror::Error;

/// What a [`DiscreteOperator`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `Δ`, from jump and killing weights.
    JumpKilling,
    /// `Δ_α`
    Kirchhoff,
    /// `M_α`, diagonal.
    VertexPotential,
    /// `U_α`
    Feller,
    /// `Q₀`, equal to `Δ_0`.
    Trace,
    /// Sums and restrictions of the above.
    Composite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinAlgError {
    #[error("matrix is singular or not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: operator has size {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("conjugate gradients stalled after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Symmetric sparse matrix indexed by vertex number. Entries are stored once
/// per unordered index pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    kind: OperatorKind,
    size: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl DiscreteOperator {
    pub fn zeros(kind: OperatorKind, size: usize) -> Self {
        DiscreteOperator {
            kind,
            size,
            entries: BTreeMap::new(),
        }
    }

    pub fn diagonal_from(kind: OperatorKind, diag: &[f64]) -> Self {
        let mut op = Self::zeros(kind, diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.add(i, i, d);
        }
        op
    }

    pub fn from_dense(kind: OperatorKind, m: &DMatrix<f64>) -> Self {
        let mut op = Self::zeros(kind, m.nrows());
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v != 0.0 {
                    op.add(i, j, v);
                }
            }
        }
        op
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Add `v` to entry `(i, j)` and, for `i ≠ j`, to `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.size && j < self.size, "index out of range");
        *self.entries.entry(key(i, j)).or_insert(0.0) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&key(i, j)).copied().unwrap_or(0.0)
    }

    /// Stored entries `(i, j, v)` with `i <= j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries
            .keys()
            .map(|&(i, j)| if i == j { 1 } else { 2 })
            .sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.get(i, i)).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.size);
        let mut y = vec![0.0; self.size];
        for (&(i, j), &v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// `⟨A x, x⟩`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.size);
        let mut s = 0.0;
        for (&(i, j), &v) in &self.entries {
            if i == j {
                s += v * x[i] * x[i];
            } else {
                s += 2.0 * v * x[i] * x[j];
            }
        }
        s
    }

    /// `⟨A x, y⟩`
    pub fn bilinear_form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn plus(&self, other: &DiscreteOperator) -> DiscreteOperator {
        assert_eq!(self.size, other.size);
        let mut out = self.clone();
        out.kind = OperatorKind::Composite;
        for (&(i, j), &v) in &other.entries {
            out.add(i, j, v);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> DiscreteOperator {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> DiscreteOperator {
        let mut pos = vec![usize::MAX; self.size];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut out = DiscreteOperator::zeros(OperatorKind::Composite, keep.len());
        for (&(i, j), &v) in &self.entries {
            if pos[i] != usize::MAX && pos[j] != usize::MAX {
                out.add(pos[i], pos[j], v);
            }
        }
        out
    }

    /// Rows `rows`, columns `cols` as a dense block, for folding boundary data.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| self.get(rows[a], cols[b]))
    }

    fn to_faer(&self) -> SparseColMat<usize, f64> {
        let mut trip = Vec::with_capacity(self.nnz());
        for (&(i, j), &v) in &self.entries {
            trip.push(Triplet::new(i, j, v));
            if i != j {
                trip.push(Triplet::new(j, i, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.size, self.size, &trip)
            .expect("indices are in range by construction")
    }

    /// Solve `A x = b` for a symmetric positive definite `A`.
    pub fn solve_spd(&self, b: &[f64]) -> Result<SolveReport, LinAlgError> {
        self.solve_many(&[b.to_vec()]).map(|mut v| v.remove(0))
    }

    /// Solve for several right-hand sides with one factorization.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<SolveReport>, LinAlgError> {
        for b in rhs {
            if b.len() != self.size {
                return Err(LinAlgError::DimensionMismatch {
                    expected: self.size,
                    got: b.len(),
                });
            }
        }
        if self.size == 0 {
            return Ok(rhs
                .iter()
                .map(|_| SolveReport {
                    solution: Vec::new(),
                    relative_residual: 0.0,
                    method: SolveMethod::Cholesky,
                })
                .collect());
        }
        if self.size > ITERATIVE_THRESHOLD {
            return rhs
                .iter()
                .map(|b| {
                    let (x, res) = conjugate_gradients(self, b, 1e-12, 10 * self.size)?;
                    Ok(SolveReport {
                        solution: x,
                        relative_residual: res,
                        method: SolveMethod::ConjugateGradients,
                    })
                })
                .collect();
        }
        let a = self.to_faer();
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|_| LinAlgError::NotPositiveDefinite)?;
        let b = Mat::<f64>::from_fn(self.size, rhs.len(), |i, k| rhs[k][i]);
        let x = llt.solve(&b);
        let mut out = Vec::with_capacity(rhs.len());
        for (k, bk) in rhs.iter().enumerate() {
            let sol: Vec<f64> = (0..self.size).map(|i| x[(i, k)]).collect();
            if sol.iter().any(|v| !v.is_finite()) {
                return Err(LinAlgError::NotPositiveDefinite);
            }
            let res = relative_residual(self, &sol, bk);
            out.push(SolveReport {
                solution: sol,
                relative_residual: res,
                method: SolveMethod::Cholesky,
            });
        }
        Ok(out)
    }

    /// Estimate of the spectral condition number `λ_max / λ_min` by power
    /// iteration on `A` and inverse iteration with a Cholesky factor.
    pub fn condition_estimate(&self) -> Result<f64, LinAlgError> {
        if self.size == 0 {
            return Ok(1.0);
        }
        let n = self.size;
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618).fract()).collect();
        let normalize = |v: &mut Vec<f64>| {
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= s);
            s
        };
        let mut v = start.clone();
        normalize(&mut v);
        let mut lmax = 0.0;
        for _ in 0..60 {
            let mut w = self.apply(&v);
            lmax = normalize(&mut w);
            v = w;
        }
        let a = self.to_faer();
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|_| LinAlgError::NotPositiveDefinite)?;
        let mut v = start;
        normalize(&mut v);
        let mut inv = 0.0;
        for _ in 0..60 {
            let b = Mat::<f64>::from_fn(n, 1, |i, _| v[i]);
            let x = llt.solve(&b);
            let mut w: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
            inv = normalize(&mut w);
            v = w;
        }
        Ok(lmax * inv)
    }
}

/// Above this size the iterative solver is used.
pub const ITERATIVE_THRESHOLD: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cholesky,
    ConjugateGradients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `‖A x − b‖₂ / ‖b‖₂` (absolute when `b = 0`).
    pub relative_residual: f64,
    pub method: SolveMethod,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &DiscreteOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.apply(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm2(b);
    if nb > 0.0 {
        norm2(&r) / nb
    } else {
        norm2(&r)
    }
}

/// Jacobi-preconditioned conjugate gradients.
pub fn conjugate_gradients(
    a: &DiscreteOperator,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64), LinAlgError> {
    let n = a.size();
    let diag = a.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(LinAlgError::NotPositiveDefinite);
    }
    let nb = norm2(b);
    if nb == 0.0 {
        return Ok((vec![0.0; n], 0.0));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 0..max_iter {
        let ap = a.apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(LinAlgError::NotPositiveDefinite);
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let res = norm2(&r) / nb;
        if res <= tol {
            return Ok((x, res));
        }
        z = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if it + 1 == max_iter {
            return Err(LinAlgError::NoConvergence {
                iterations: max_iter,
                residual: res,
            });
        }
    }
    Err(LinAlgError::NoConvergence {
        iterations: max_iter,
        residual: f64::NAN,
    })
}
