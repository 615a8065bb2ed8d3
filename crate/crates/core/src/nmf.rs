//! Nonnegative matrix factorization and the two NMF-based tensor baselines.
//!
//! [`nmf`] minimizes `‖X − AB‖_F` with Lee–Seung multiplicative updates,
//! which never increase the objective. [`direct_nmf`] factors every slice of
//! a tensor independently; [`fixed_nmf`] shares one dictionary `A` across all
//! slices by factoring their side-by-side concatenation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{FactorMatrix, Matrix};
use crate::options::SolverOptions;
use crate::rng::SeededRng;
use crate::tensor::{frobenius_distance, slice_mode, stack_slices, Mode, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct NmfResult {
    /// `n1 x r` features.
    pub a: FactorMatrix,
    /// `r x n2` coefficients.
    pub b: FactorMatrix,
    /// `‖X − AB‖_F` after each iteration.
    pub error_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl NmfResult {
    pub fn error(&self) -> f64 {
        *self.error_history.last().expect("at least one iteration runs")
    }

    pub fn reconstruction(&self) -> Matrix {
        self.a.matmul(&self.b).expect("factor shapes agree")
    }
}

pub(crate) fn check_nonneg_matrix(x: &Matrix) -> Result<()> {
    match x.first_invalid_nonneg() {
        Some((index, value)) => Err(Error::NegativeEntry { index, value }),
        None => Ok(()),
    }
}

/// `Aᵀ X` for `A: n x r`, `X: n x m`.
fn transpose_times(a: &Matrix, x: &Matrix) -> Matrix {
    let (r, m) = (a.cols(), x.cols());
    let mut out = Matrix::zeros(r, m);
    let dst = out.as_mut_slice();
    for i in 0..a.rows() {
        let xr = x.row(i);
        for (p, &w) in a.row(i).iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (d, &v) in dst[p * m..(p + 1) * m].iter_mut().zip(xr) {
                *d += w * v;
            }
        }
    }
    out
}

/// `X Bᵀ` for `X: n x m`, `B: r x m`.
fn times_transpose(x: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), b.rows(), |i, p| x.row(i).iter().zip(b.row(p)).map(|(u, v)| u * v).sum())
}

/// `B Bᵀ` for `B: r x m`.
fn row_gram(b: &Matrix) -> Matrix {
    times_transpose(b, b)
}

/// Multiplicative-update NMF `X ≈ AB` with `A: n1 x r`, `B: r x n2`.
///
/// Factors start i.i.d. uniform on `[ε, 1)` scaled by `sqrt(mean(X) / r)`.
/// Each iteration updates `B` then `A`:
///
/// ```text
/// B ← B ∘ (AᵀX) / (AᵀA B + ε)
/// A ← A ∘ (X Bᵀ) / (A B Bᵀ + ε)
/// ```
pub fn nmf(x: &Matrix, r: usize, opts: &SolverOptions) -> Result<NmfResult> {
    opts.validate()?;
    if r == 0 {
        return Err(Error::InvalidRank(r));
    }
    check_nonneg_matrix(x)?;
    let (n1, n2) = (x.rows(), x.cols());
    let eps = opts.epsilon;
    let scale = (x.mean() / r as f64).sqrt();
    let mut rng = SeededRng::new(opts.seed);
    let mut a = Matrix::from_fn(n1, r, |_, _| rng.uniform_range(eps, 1.0) * scale);
    let mut b = Matrix::from_fn(r, n2, |_, _| rng.uniform_range(eps, 1.0) * scale);

    let data_norm = x.frobenius_norm();
    let mut history = Vec::new();
    let mut converged = false;
    for t in 0..opts.max_iters {
        let num = transpose_times(&a, x);
        let den = a.gram().matmul(&b)?;
        for ((v, n), d) in b.as_mut_slice().iter_mut().zip(num.as_slice()).zip(den.as_slice()) {
            *v *= n / (d + eps);
        }

        let num = times_transpose(x, &b);
        let den = a.matmul(&row_gram(&b))?;
        for ((v, n), d) in a.as_mut_slice().iter_mut().zip(num.as_slice()).zip(den.as_slice()) {
            *v *= n / (d + eps);
        }

        let err = x.distance(&a.matmul(&b)?)?;
        let stop = opts.converged(history.last().copied(), err, data_norm);
        history.push(err);
        if stop {
            converged = true;
            log::debug!("nmf converged after {} iterations, error {err}", t + 1);
            break;
        }
    }

    Ok(NmfResult {
        a: FactorMatrix::new_unchecked(a),
        b: FactorMatrix::new_unchecked(b),
        iterations: history.len(),
        error_history: history,
        converged,
    })
}

/// Factors of a slice-wise decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum SlicedFactors {
    /// One `(A_i, S_i)` pair per slice.
    Direct { a: Vec<FactorMatrix>, s: Vec<FactorMatrix> },
    /// A single dictionary `A` shared by every `S_i`.
    Fixed { a: FactorMatrix, s: Vec<FactorMatrix> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlicedDecomposition {
    pub factors: SlicedFactors,
    pub slice_mode: Mode,
    pub shape: [usize; 3],
    /// `‖T − T̂‖_F` against the decomposed tensor.
    pub reconstruction_error: f64,
    /// For Direct NMF the largest per-slice iteration count.
    pub iterations: usize,
    pub converged: bool,
    /// Error trace of the single Fixed NMF solve; empty for Direct NMF.
    pub error_history: Vec<f64>,
}

impl SlicedDecomposition {
    pub fn num_slices(&self) -> usize {
        match &self.factors {
            SlicedFactors::Direct { s, .. } | SlicedFactors::Fixed { s, .. } => s.len(),
        }
    }

    pub fn rank(&self) -> usize {
        match &self.factors {
            SlicedFactors::Direct { s, .. } | SlicedFactors::Fixed { s, .. } => s[0].rows(),
        }
    }

    /// `A_i S_i` (or `A S_i`) for slice `i`.
    pub fn slice_reconstruction(&self, i: usize) -> Matrix {
        let (a, s) = match &self.factors {
            SlicedFactors::Direct { a, s } => (&a[i], &s[i]),
            SlicedFactors::Fixed { a, s } => (a, &s[i]),
        };
        a.matmul(s).expect("factor shapes agree")
    }

    pub fn reconstruct(&self) -> Tensor3 {
        let slices: Vec<Matrix> = (0..self.num_slices()).map(|i| self.slice_reconstruction(i)).collect();
        stack_slices(&slices, self.slice_mode).expect("products of nonnegative factors are nonnegative")
    }
}

fn slices_of(t: &Tensor3, mode: Mode) -> Vec<Matrix> {
    (0..t.dim(mode)).map(|i| slice_mode(t, mode, i).expect("index within range")).collect()
}

/// Independent NMF of every slice along `slice_mode`; slice `i` uses seed `opts.seed + i`.
pub fn direct_nmf(t: &Tensor3, r: usize, slice_mode: Mode, opts: &SolverOptions) -> Result<SlicedDecomposition> {
    let slices = slices_of(t, slice_mode);
    let results = slices
        .par_iter()
        .enumerate()
        .map(|(i, x)| nmf(x, r, &opts.with_seed(opts.seed.wrapping_add(i as u64))))
        .collect::<Result<Vec<_>>>()?;
    let iterations = results.iter().map(|res| res.iterations).max().unwrap_or(0);
    let converged = results.iter().all(|res| res.converged);
    let (a, s) = results.into_iter().map(|res| (res.a, res.b)).unzip();
    let mut dec = SlicedDecomposition {
        factors: SlicedFactors::Direct { a, s },
        slice_mode,
        shape: t.shape(),
        reconstruction_error: 0.0,
        iterations,
        converged,
        error_history: Vec::new(),
    };
    dec.reconstruction_error = frobenius_distance(t, &dec.reconstruct())?;
    Ok(dec)
}

/// NMF of the slices along `slice_mode` joined side by side, `[X_1 | X_2 | …] ≈ A [S_1 | S_2 | …]`.
pub fn fixed_nmf(t: &Tensor3, r: usize, slice_mode: Mode, opts: &SolverOptions) -> Result<SlicedDecomposition> {
    let slices = slices_of(t, slice_mode);
    let width = slices[0].cols();
    let joined = Matrix::hstack(&slices)?;
    let res = nmf(&joined, r, opts)?;
    let s = (0..slices.len())
        .map(|i| res.b.column_block(i * width, (i + 1) * width).map(FactorMatrix::new_unchecked))
        .collect::<Result<Vec<_>>>()?;
    let mut dec = SlicedDecomposition {
        factors: SlicedFactors::Fixed { a: res.a, s },
        slice_mode,
        shape: t.shape(),
        reconstruction_error: 0.0,
        iterations: res.iterations,
        converged: res.converged,
        error_history: res.error_history,
    };
    dec.reconstruction_error = frobenius_distance(t, &dec.reconstruct())?;
    Ok(dec)
}
