//! Nonnegative CP decomposition by hierarchical alternating least squares.
//!
//! One sweep visits the modes in order 1, 2, 3. For mode `m` with factor `F`,
//! `M = unfold(T, m) · KR` (the Khatri–Rao product of the other two factors)
//! and `G` is the Hadamard product of their Gram matrices. Each column is then
//! replaced by its exact nonnegative least-squares minimizer with the other
//! columns held fixed:
//!
//! ```text
//! f_l ← max(0, f_l + (M[:, l] − F G[:, l]) / G[l, l])
//! ```
//!
//! Every column update is an exact block minimization, so the error never
//! increases from one sweep to the next. A column that comes out identically
//! zero is reset to `ε` to keep later Gram diagonals positive.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{FactorMatrix, Matrix};
use crate::options::SolverOptions;
use crate::rng::SeededRng;
use crate::tensor::{cp_distance, mttkrp, CpFactors, Mode, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct NncpdResult {
    pub factors: CpFactors,
    /// `‖T − T̂‖_F` after each sweep.
    pub error_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub seed: u64,
    /// How many times a zero column was reset to `ε`.
    pub rescued_columns: usize,
}

impl NncpdResult {
    pub fn error(&self) -> f64 {
        *self.error_history.last().expect("at least one sweep runs")
    }
}

/// Outcome of [`nncpd_best_of`].
#[derive(Debug, Clone, PartialEq)]
pub struct BestOf {
    pub best: NncpdResult,
    /// Final error of every restart, in seed order.
    pub final_errors: Vec<f64>,
    pub best_index: usize,
}

fn check_input(t: &Tensor3, r: usize, opts: &SolverOptions) -> Result<()> {
    opts.validate()?;
    if r == 0 {
        return Err(Error::InvalidRank(r));
    }
    if let Some(index) = t.as_slice().iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::NegativeEntry { index, value: t.as_slice()[index] });
    }
    Ok(())
}

/// Random start: entries i.i.d. uniform on `[ε, 1)` times `(mean(T) / r)^(1/3)`,
/// drawn for `A`, then `B`, then `C`, row-major.
pub fn init_factors(t: &Tensor3, r: usize, opts: &SolverOptions) -> Result<CpFactors> {
    if r == 0 {
        return Err(Error::InvalidRank(r));
    }
    let scale = (t.mean() / r as f64).cbrt();
    let mut rng = SeededRng::new(opts.seed);
    let [n1, n2, n3] = t.shape();
    let mut draw = |rows: usize| {
        FactorMatrix::new_unchecked(Matrix::from_fn(rows, r, |_, _| rng.uniform_range(opts.epsilon, 1.0) * scale))
    };
    let a = draw(n1);
    let b = draw(n2);
    let c = draw(n3);
    CpFactors::new(a, b, c)
}

/// `(G₁ᵀG₁) ∘ (G₂ᵀG₂)` for the two factors other than `mode`.
fn complement_gram(f: &CpFactors, mode: Mode) -> Matrix {
    let (p, q) = mode.others();
    let mut g = f.factor(p).gram();
    let h = f.factor(q).gram();
    for (x, y) in g.as_mut_slice().iter_mut().zip(h.as_slice()) {
        *x *= y;
    }
    g
}

/// Updates every column of the `mode` factor in place; returns the number of rescued columns.
fn hals_update(t: &Tensor3, f: &mut CpFactors, mode: Mode, eps: f64) -> Result<usize> {
    let m = mttkrp(t, f, mode)?;
    let g = complement_gram(f, mode);
    let r = f.rank();
    let factor = f.factor_mut(mode);
    let rows = factor.rows();
    let mut rescued = 0;
    for l in 0..r {
        let gll = g.get(l, l);
        let mut nonzero = false;
        if gll > 0.0 {
            for i in 0..rows {
                let row = &factor.as_slice()[i * r..(i + 1) * r];
                let fg: f64 = row.iter().enumerate().map(|(p, &v)| v * g.get(p, l)).sum();
                let updated = (row[l] + (m.get(i, l) - fg) / gll).max(0.0);
                factor.set(i, l, updated);
                nonzero |= updated > 0.0;
            }
        }
        if !nonzero {
            for i in 0..rows {
                factor.set(i, l, eps);
            }
            rescued += 1;
        }
    }
    Ok(rescued)
}

/// HALS from a seeded random start (see [`init_factors`]).
pub fn nncpd_hals(t: &Tensor3, r: usize, opts: &SolverOptions) -> Result<NncpdResult> {
    check_input(t, r, opts)?;
    let init = init_factors(t, r, opts)?;
    run_hals(t, init, opts)
}

/// HALS from caller-supplied starting factors.
pub fn nncpd_hals_from(t: &Tensor3, init: CpFactors, opts: &SolverOptions) -> Result<NncpdResult> {
    check_input(t, init.rank(), opts)?;
    if init.shape() != t.shape() {
        return Err(Error::ShapeMismatch(format!(
            "initial factors {:?} do not match tensor {:?}",
            init.shape(),
            t.shape()
        )));
    }
    run_hals(t, init, opts)
}

fn run_hals(t: &Tensor3, mut f: CpFactors, opts: &SolverOptions) -> Result<NncpdResult> {
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut rescued = 0;
    let data_norm = t.frobenius_norm();
    for _ in 0..opts.max_iters {
        for mode in Mode::ALL {
            rescued += hals_update(t, &mut f, mode, opts.epsilon)?;
        }
        let err = cp_distance(t, &f)?;
        let stop = opts.converged(history.last().copied(), err, data_norm);
        history.push(err);
        if stop {
            converged = true;
            break;
        }
    }
    if rescued > 0 {
        log::debug!("nncpd rescued {rescued} zero columns");
    }
    Ok(NncpdResult {
        factors: f,
        iterations: history.len(),
        error_history: history,
        converged,
        seed: opts.seed,
        rescued_columns: rescued,
    })
}

/// Runs HALS with seeds `opts.seed + 0 .. opts.seed + restarts - 1` and keeps the
/// lowest final error (earliest seed on ties).
pub fn nncpd_best_of(t: &Tensor3, r: usize, opts: &SolverOptions, restarts: usize) -> Result<BestOf> {
    if restarts == 0 {
        return Err(Error::InvalidOptions("restarts must be at least 1".into()));
    }
    check_input(t, r, opts)?;
    let runs = (0..restarts)
        .into_par_iter()
        .map(|k| nncpd_hals(t, r, &opts.with_seed(opts.seed.wrapping_add(k as u64))))
        .collect::<Result<Vec<_>>>()?;
    let final_errors: Vec<f64> = runs.iter().map(NncpdResult::error).collect();
    let best_index =
        final_errors.iter().enumerate().fold(0, |best, (k, &e)| if e < final_errors[best] { k } else { best });
    let best = runs.into_iter().nth(best_index).expect("restarts >= 1");
    Ok(BestOf { best, final_errors, best_index })
}

/// A change point in a temporal factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    /// Boundary `b` separates rows `0..b` from rows `b..`; in one-based slice
    /// numbering it lies between slice `b` and slice `b + 1`.
    pub boundary: usize,
    pub magnitude: f64,
}

/// Scores each boundary by the largest absolute first difference across
/// columns and returns the `top_k` highest, ties broken by smaller boundary.
pub fn temporal_spikes(c: &Matrix, top_k: usize) -> Result<Vec<Spike>> {
    if c.rows() < 2 {
        return Err(Error::InvalidDimension(format!("temporal factor needs at least 2 rows, got {}", c.rows())));
    }
    let mut spikes: Vec<Spike> = (1..c.rows())
        .map(|b| {
            let magnitude = c.row(b).iter().zip(c.row(b - 1)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            Spike { boundary: b, magnitude }
        })
        .collect();
    spikes.sort_by(|x, y| y.magnitude.total_cmp(&x.magnitude).then(x.boundary.cmp(&y.boundary)));
    spikes.truncate(top_k);
    Ok(spikes)
}
