//! Dense nonnegative third-order tensors and the CP algebra built on them.
//!
//! Entry `(i, j, k)` of an `n1 x n2 x n3` tensor lives at flat position
//! `(i * n2 + j) * n3 + k` (zero-based). Mode-`m` unfoldings follow the
//! Khatri–Rao convention of [`khatri_rao`], so that for factors `A, B, C`
//!
//! ```text
//! unfold(X, 1) = A · khatri_rao(C, B)ᵀ     column index k * n2 + j
//! unfold(X, 2) = B · khatri_rao(C, A)ᵀ     column index k * n1 + i
//! unfold(X, 3) = C · khatri_rao(B, A)ᵀ     column index j * n1 + i
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{first_invalid_nonneg, FactorMatrix, Matrix};

/// One of the three tensor modes. Displayed and parsed one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    /// Zero-based axis index.
    #[inline]
    pub fn axis(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    /// The two remaining modes in ascending order.
    pub fn others(self) -> (Mode, Mode) {
        match self {
            Mode::One => (Mode::Two, Mode::Three),
            Mode::Two => (Mode::One, Mode::Three),
            Mode::Three => (Mode::One, Mode::Two),
        }
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(m: usize) -> Result<Mode> {
        match m {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            other => Err(Error::InvalidMode(other)),
        }
    }
}

impl From<Mode> for usize {
    fn from(m: Mode) -> usize {
        m.axis() + 1
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.axis() + 1)
    }
}

/// Dense nonnegative `n1 x n2 x n3` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    shape: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(shape: [usize; 3], data: Vec<f64>) -> Result<Self> {
        check_shape(shape)?;
        let len = shape.iter().product::<usize>();
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!("shape {shape:?} needs {len} values, got {}", data.len())));
        }
        if let Some((index, value)) = first_invalid_nonneg(&data) {
            return Err(Error::NegativeEntry { index, value });
        }
        Ok(Tensor3 { shape, data })
    }

    pub fn zeros(shape: [usize; 3]) -> Result<Self> {
        check_shape(shape)?;
        Ok(Tensor3 { shape, data: vec![0.0; shape.iter().product()] })
    }

    /// Fills the tensor from `f(i, j, k)`; fails if `f` produces a negative value.
    pub fn from_fn(shape: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        check_shape(shape)?;
        let [n1, n2, n3] = shape;
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3::new(shape, data)
    }

    pub(crate) fn from_raw(shape: [usize; 3], data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), shape.iter().product::<usize>());
        debug_assert!(first_invalid_nonneg(&data).is_none());
        Tensor3 { shape, data }
    }

    #[inline]
    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    #[inline]
    pub fn dim(&self, mode: Mode) -> usize {
        self.shape[mode.axis()]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Entrywise sum of two tensors of equal shape.
    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        same_shape(self, other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Tensor3::from_raw(self.shape, data))
    }

    /// Multiplies every entry by a nonnegative scalar.
    pub fn scale(&self, factor: f64) -> Result<Tensor3> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor {factor} must be finite and >= 0")));
        }
        Ok(Tensor3::from_raw(self.shape, self.data.iter().map(|v| v * factor).collect()))
    }

    /// Reorders modes: axis `d` of the result is axis `perm[d]` of `self`.
    pub fn permute(&self, perm: [usize; 3]) -> Result<Tensor3> {
        check_permutation(perm)?;
        let shape = [self.shape[perm[0]], self.shape[perm[1]], self.shape[perm[2]]];
        let mut data = Vec::with_capacity(self.data.len());
        let mut src = [0usize; 3];
        for a in 0..shape[0] {
            for b in 0..shape[1] {
                for c in 0..shape[2] {
                    src[perm[0]] = a;
                    src[perm[1]] = b;
                    src[perm[2]] = c;
                    data.push(self.get(src[0], src[1], src[2]));
                }
            }
        }
        Ok(Tensor3::from_raw(shape, data))
    }
}

fn check_shape(shape: [usize; 3]) -> Result<()> {
    if shape.iter().any(|&n| n == 0) {
        return Err(Error::InvalidDimension(format!("tensor dimensions must be positive, got {shape:?}")));
    }
    Ok(())
}

fn check_permutation(perm: [usize; 3]) -> Result<()> {
    let mut seen = [false; 3];
    for &p in &perm {
        if p >= 3 || seen[p] {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..3")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn same_shape(x: &Tensor3, y: &Tensor3) -> Result<()> {
    if x.shape != y.shape {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", x.shape, y.shape)));
    }
    Ok(())
}

/// Rank-`r` CP factors `(A, B, C)` of an `n1 x n2 x n3` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CpFactors {
    a: FactorMatrix,
    b: FactorMatrix,
    c: FactorMatrix,
}

impl CpFactors {
    pub fn new(a: FactorMatrix, b: FactorMatrix, c: FactorMatrix) -> Result<Self> {
        let r = a.rank();
        if b.rank() != r || c.rank() != r {
            return Err(Error::ShapeMismatch(format!("factor ranks differ: {}, {}, {}", a.rank(), b.rank(), c.rank())));
        }
        Ok(CpFactors { a, b, c })
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.a.rows(), self.b.rows(), self.c.rows()]
    }

    pub fn a(&self) -> &FactorMatrix {
        &self.a
    }

    pub fn b(&self) -> &FactorMatrix {
        &self.b
    }

    pub fn c(&self) -> &FactorMatrix {
        &self.c
    }

    pub fn factor(&self, mode: Mode) -> &FactorMatrix {
        match mode {
            Mode::One => &self.a,
            Mode::Two => &self.b,
            Mode::Three => &self.c,
        }
    }

    pub(crate) fn factor_mut(&mut self, mode: Mode) -> &mut Matrix {
        // Callers keep entries nonnegative.
        let f = match mode {
            Mode::One => &mut self.a,
            Mode::Two => &mut self.b,
            Mode::Three => &mut self.c,
        };
        f.matrix_mut()
    }

    pub fn into_parts(self) -> (FactorMatrix, FactorMatrix, FactorMatrix) {
        (self.a, self.b, self.c)
    }

    /// Factors matching `Tensor3::permute(perm)` of the reconstructed tensor.
    pub fn permute(&self, perm: [usize; 3]) -> Result<CpFactors> {
        check_permutation(perm)?;
        let by_axis = [&self.a, &self.b, &self.c];
        CpFactors::new(by_axis[perm[0]].clone(), by_axis[perm[1]].clone(), by_axis[perm[2]].clone())
    }
}

/// Outer product `a ⊗ b ⊗ c` of three nonnegative vectors.
pub fn outer3(a: &[f64], b: &[f64], c: &[f64]) -> Result<Tensor3> {
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::InvalidDimension("outer product of an empty vector".into()));
    }
    for v in [a, b, c] {
        if let Some((index, value)) = first_invalid_nonneg(v) {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    let mut data = Vec::with_capacity(a.len() * b.len() * c.len());
    for &x in a {
        for &y in b {
            let xy = x * y;
            data.extend(c.iter().map(|&z| xy * z));
        }
    }
    Ok(Tensor3::from_raw([a.len(), b.len(), c.len()], data))
}

/// Column position of entry `(i, j, k)` in the mode-`mode` unfolding, together with its row.
#[inline]
fn unfold_position(shape: [usize; 3], mode: Mode, i: usize, j: usize, k: usize) -> (usize, usize) {
    let [n1, n2, _] = shape;
    match mode {
        Mode::One => (i, k * n2 + j),
        Mode::Two => (j, k * n1 + i),
        Mode::Three => (k, j * n1 + i),
    }
}

/// Mode-`mode` matricization (see the module docs for the column order).
pub fn unfold(t: &Tensor3, mode: Mode) -> Matrix {
    let shape = t.shape;
    let rows = shape[mode.axis()];
    let cols = t.len() / rows;
    let mut out = Matrix::zeros(rows, cols);
    let [n1, n2, n3] = shape;
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..n3 {
                let (r, c) = unfold_position(shape, mode, i, j, k);
                out.set(r, c, t.get(i, j, k));
            }
        }
    }
    out
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, mode: Mode, shape: [usize; 3]) -> Result<Tensor3> {
    check_shape(shape)?;
    let rows = shape[mode.axis()];
    let total: usize = shape.iter().product();
    if m.rows() != rows || m.rows() * m.cols() != total {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix cannot be folded along mode {mode} into {shape:?}",
            m.rows(),
            m.cols()
        )));
    }
    Tensor3::from_fn(shape, |i, j, k| {
        let (r, c) = unfold_position(shape, mode, i, j, k);
        m.get(r, c)
    })
}

/// Column-wise Kronecker product: column `l` of the result is `kron(u_l, v_l)`,
/// i.e. row `p * m + q` holds `U[p, l] * V[q, l]`.
pub fn khatri_rao(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    if u.cols() != v.cols() {
        return Err(Error::ShapeMismatch(format!(
            "Khatri-Rao needs equal column counts, got {} and {}",
            u.cols(),
            v.cols()
        )));
    }
    let r = u.cols();
    let m = v.rows();
    Ok(Matrix::from_fn(u.rows() * m, r, |row, l| u.get(row / m, l) * v.get(row % m, l)))
}

/// `Σ_l a_l ⊗ b_l ⊗ c_l`.
pub fn cp_reconstruct(f: &CpFactors) -> Tensor3 {
    let [n1, n2, n3] = f.shape();
    let r = f.rank();
    let (a, b, c) = (f.a(), f.b(), f.c());
    let mut data = Vec::with_capacity(n1 * n2 * n3);
    let mut ab = vec![0.0; r];
    for i in 0..n1 {
        for j in 0..n2 {
            for (l, w) in ab.iter_mut().enumerate() {
                *w = a.get(i, l) * b.get(j, l);
            }
            for k in 0..n3 {
                data.push(ab.iter().zip(c.row(k)).map(|(w, z)| w * z).sum());
            }
        }
    }
    Tensor3::from_raw([n1, n2, n3], data)
}

/// `‖T − cp_reconstruct(f)‖_F` without materializing the reconstruction.
pub fn cp_distance(t: &Tensor3, f: &CpFactors) -> Result<f64> {
    if t.shape != f.shape() {
        return Err(Error::ShapeMismatch(format!("tensor {:?} vs factors {:?}", t.shape, f.shape())));
    }
    let [n1, n2, n3] = t.shape;
    let r = f.rank();
    let (a, b, c) = (f.a(), f.b(), f.c());
    let mut ab = vec![0.0; r];
    let mut acc = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            for (l, w) in ab.iter_mut().enumerate() {
                *w = a.get(i, l) * b.get(j, l);
            }
            let base = t.offset(i, j, 0);
            for k in 0..n3 {
                let x: f64 = ab.iter().zip(c.row(k)).map(|(w, z)| w * z).sum();
                let d = t.data[base + k] - x;
                acc += d * d;
            }
        }
    }
    Ok(acc.sqrt())
}

pub fn frobenius_distance(x: &Tensor3, y: &Tensor3) -> Result<f64> {
    same_shape(x, y)?;
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// The 2-D slice at `index` along `mode`; rows and columns are the remaining
/// modes in ascending order.
pub fn slice_mode(t: &Tensor3, mode: Mode, index: usize) -> Result<Matrix> {
    let size = t.dim(mode);
    if index >= size {
        return Err(Error::IndexOutOfRange { mode: mode.axis() + 1, index, size });
    }
    let (rm, cm) = mode.others();
    let (rows, cols) = (t.dim(rm), t.dim(cm));
    Ok(Matrix::from_fn(rows, cols, |p, q| match mode {
        Mode::One => t.get(index, p, q),
        Mode::Two => t.get(p, index, q),
        Mode::Three => t.get(p, q, index),
    }))
}

/// Reassembles a tensor from its slices along `mode` (inverse of [`slice_mode`]).
pub fn stack_slices(slices: &[Matrix], mode: Mode) -> Result<Tensor3> {
    let first = slices.first().ok_or_else(|| Error::InvalidDimension("no slices to stack".into()))?;
    let (rows, cols) = (first.rows(), first.cols());
    if slices.iter().any(|s| s.rows() != rows || s.cols() != cols) {
        return Err(Error::ShapeMismatch("slices differ in shape".into()));
    }
    let n = slices.len();
    let shape = match mode {
        Mode::One => [n, rows, cols],
        Mode::Two => [rows, n, cols],
        Mode::Three => [rows, cols, n],
    };
    Tensor3::from_fn(shape, |i, j, k| match mode {
        Mode::One => slices[i].get(j, k),
        Mode::Two => slices[j].get(i, k),
        Mode::Three => slices[k].get(i, j),
    })
}

/// Matricized-tensor times Khatri–Rao product, `unfold(T, mode) · KR` where KR is
/// the Khatri–Rao product of the other two factors in the unfolding convention.
/// Computed without forming either operand.
pub fn mttkrp(t: &Tensor3, f: &CpFactors, mode: Mode) -> Result<Matrix> {
    if t.shape != f.shape() {
        return Err(Error::ShapeMismatch(format!("tensor {:?} vs factors {:?}", t.shape, f.shape())));
    }
    let [n1, n2, n3] = t.shape;
    let r = f.rank();
    let (a, b, c) = (f.a(), f.b(), f.c());
    let mut out = Matrix::zeros(t.dim(mode), r);
    let mut w = vec![0.0; r];
    match mode {
        Mode::One => {
            for i in 0..n1 {
                for j in 0..n2 {
                    let base = t.offset(i, j, 0);
                    w.iter_mut().for_each(|v| *v = 0.0);
                    for k in 0..n3 {
                        let x = t.data[base + k];
                        if x != 0.0 {
                            for (acc, z) in w.iter_mut().zip(c.row(k)) {
                                *acc += x * z;
                            }
                        }
                    }
                    let dst = &mut out.as_mut_slice()[i * r..(i + 1) * r];
                    for ((d, acc), y) in dst.iter_mut().zip(&w).zip(b.row(j)) {
                        *d += acc * y;
                    }
                }
            }
        }
        Mode::Two => {
            for i in 0..n1 {
                for j in 0..n2 {
                    let base = t.offset(i, j, 0);
                    w.iter_mut().for_each(|v| *v = 0.0);
                    for k in 0..n3 {
                        let x = t.data[base + k];
                        if x != 0.0 {
                            for (acc, z) in w.iter_mut().zip(c.row(k)) {
                                *acc += x * z;
                            }
                        }
                    }
                    let dst = &mut out.as_mut_slice()[j * r..(j + 1) * r];
                    for ((d, acc), y) in dst.iter_mut().zip(&w).zip(a.row(i)) {
                        *d += acc * y;
                    }
                }
            }
        }
        Mode::Three => {
            for i in 0..n1 {
                for j in 0..n2 {
                    let base = t.offset(i, j, 0);
                    for (l, v) in w.iter_mut().enumerate() {
                        *v = a.get(i, l) * b.get(j, l);
                    }
                    for k in 0..n3 {
                        let x = t.data[base + k];
                        if x != 0.0 {
                            let dst = &mut out.as_mut_slice()[k * r..(k + 1) * r];
                            for (d, ab) in dst.iter_mut().zip(&w) {
                                *d += x * ab;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The Khatri–Rao product paired with `mode` in the unfolding identity.
pub fn khatri_rao_complement(f: &CpFactors, mode: Mode) -> Matrix {
    let kr = match mode {
        Mode::One => khatri_rao(f.c(), f.b()),
        Mode::Two => khatri_rao(f.c(), f.a()),
        Mode::Three => khatri_rao(f.b(), f.a()),
    };
    kr.expect("CpFactors share their rank")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_factor(rows: usize, r: usize, seed: &mut u64) -> FactorMatrix {
        FactorMatrix::new(Matrix::from_fn(rows, r, |_, _| lcg(seed))).unwrap()
    }

    fn random_tensor(shape: [usize; 3], seed: &mut u64) -> Tensor3 {
        Tensor3::from_fn(shape, |_, _, _| lcg(seed)).unwrap()
    }

    #[test]
    fn outer3_identity_case() {
        let t = outer3(&[1.0], &[1.0], &[1.0]).unwrap();
        assert_eq!(t.shape(), [1, 1, 1]);
        assert_eq!(t.as_slice(), &[1.0]);
    }

    #[test]
    fn outer3_hand_case() {
        let t = outer3(&[2.0, 0.0], &[3.0], &[1.0, 1.0]).unwrap();
        assert_eq!(t.shape(), [2, 1, 2]);
        assert_eq!(t.get(0, 0, 0), 6.0);
        assert_eq!(t.get(0, 0, 1), 6.0);
        assert_eq!(t.get(1, 0, 0), 0.0);
        assert_eq!(t.get(1, 0, 1), 0.0);
    }

    #[test]
    fn outer3_zero_and_empty() {
        let t = outer3(&[0.0, 0.0], &[1.0, 2.0], &[3.0]).unwrap();
        assert!(t.as_slice().iter().all(|&v| v == 0.0));
        assert!(matches!(outer3(&[], &[1.0], &[1.0]), Err(Error::InvalidDimension(_))));
        assert!(matches!(outer3(&[-1.0], &[1.0], &[1.0]), Err(Error::NegativeEntry { .. })));
    }

    #[test]
    fn unfold_trivial_and_invalid_mode() {
        let t = Tensor3::new([1, 1, 1], vec![5.0]).unwrap();
        let m = unfold(&t, Mode::One);
        assert_eq!((m.rows(), m.cols(), m.get(0, 0)), (1, 1, 5.0));
        assert!(matches!(Mode::try_from(4), Err(Error::InvalidMode(4))));
        assert!(Mode::try_from(0).is_err());
    }

    #[test]
    fn unfold_of_outer_product_is_a_times_kr_column() {
        let mut seed = 7;
        let a: Vec<f64> = (0..3).map(|_| lcg(&mut seed)).collect();
        let b: Vec<f64> = (0..4).map(|_| lcg(&mut seed)).collect();
        let c: Vec<f64> = (0..5).map(|_| lcg(&mut seed)).collect();
        let t = outer3(&a, &b, &c).unwrap();
        let cm = Matrix::new(5, 1, c.clone()).unwrap();
        let bm = Matrix::new(4, 1, b.clone()).unwrap();
        let kr = khatri_rao(&cm, &bm).unwrap();
        let expected = Matrix::new(3, 1, a.clone()).unwrap().matmul(&kr.transpose()).unwrap();
        let got = unfold(&t, Mode::One);
        assert!(got.distance(&expected).unwrap() <= 1e-15 * expected.frobenius_norm());
    }

    #[test]
    fn fold_round_trips() {
        let mut seed = 11;
        let t = random_tensor([3, 4, 5], &mut seed);
        for mode in Mode::ALL {
            assert_eq!(fold(&unfold(&t, mode), mode, t.shape()).unwrap(), t);
        }
        let one = Matrix::new(1, 1, vec![3.0]).unwrap();
        for mode in Mode::ALL {
            assert_eq!(fold(&one, mode, [1, 1, 1]).unwrap().as_slice(), &[3.0]);
        }
        let m = Matrix::from_fn(2, 6, |i, j| (i * 6 + j) as f64);
        let folded = fold(&m, Mode::One, [2, 2, 3]).unwrap();
        assert_eq!(unfold(&folded, Mode::One), m);
        assert!(matches!(fold(&m, Mode::Three, [2, 2, 3]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn khatri_rao_examples() {
        let u = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let v = Matrix::from_rows(&[vec![3.0]]).unwrap();
        assert_eq!(khatri_rao(&u, &v).unwrap().as_slice(), &[3.0, 6.0]);
        let i1 = Matrix::identity(1);
        assert_eq!(khatri_rao(&i1, &i1).unwrap().as_slice(), &[1.0]);
        assert!(khatri_rao(&Matrix::zeros(2, 2), &Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn khatri_rao_column_norms_multiply() {
        let mut seed = 3;
        let u = random_factor(4, 3, &mut seed);
        let v = random_factor(5, 3, &mut seed);
        let kr = khatri_rao(&u, &v).unwrap();
        for l in 0..3 {
            let norm = |m: &Matrix| m.column(l).iter().map(|x| x * x).sum::<f64>().sqrt();
            let lhs = norm(&kr);
            let rhs = norm(&u) * norm(&v);
            assert!((lhs - rhs).abs() <= 1e-14 * rhs);
        }
    }

    #[test]
    fn cp_reconstruct_matches_brute_force() {
        let mut seed = 5;
        let f = CpFactors::new(
            random_factor(3, 2, &mut seed),
            random_factor(4, 2, &mut seed),
            random_factor(2, 2, &mut seed),
        )
        .unwrap();
        let x = cp_reconstruct(&f);
        for i in 0..3 {
            for j in 0..4 {
                for k in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += f.a().get(i, l) * f.b().get(j, l) * f.c().get(k, l);
                    }
                    assert!((x.get(i, j, k) - s).abs() <= 1e-14 * s.max(1.0));
                }
            }
        }
        let d = cp_distance(&x, &f).unwrap();
        assert!(d <= 1e-14);
    }

    #[test]
    fn cp_reconstruct_rank_one_and_zero() {
        let a = FactorMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let b = FactorMatrix::from_rows(&[vec![3.0]]).unwrap();
        let c = FactorMatrix::from_rows(&[vec![0.5], vec![4.0]]).unwrap();
        let f = CpFactors::new(a, b.clone(), c).unwrap();
        assert_eq!(cp_reconstruct(&f), outer3(&[1.0, 2.0], &[3.0], &[0.5, 4.0]).unwrap());
        let zc = FactorMatrix::from_rows(&[vec![0.0], vec![0.0]]).unwrap();
        let f0 = CpFactors::new(f.a().clone(), b, zc).unwrap();
        assert!(cp_reconstruct(&f0).as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cp_factors_rank_mismatch() {
        let a = FactorMatrix::new(Matrix::zeros(2, 2)).unwrap();
        let b = FactorMatrix::new(Matrix::zeros(2, 1)).unwrap();
        assert!(CpFactors::new(a.clone(), b, a).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let ones = Tensor3::from_fn([2, 2, 2], |_, _, _| 1.0).unwrap();
        let zero = Tensor3::zeros([2, 2, 2]).unwrap();
        assert_eq!(frobenius_distance(&ones, &ones).unwrap(), 0.0);
        assert!((frobenius_distance(&ones, &zero).unwrap() - 8f64.sqrt()).abs() < 1e-15);
        assert!(frobenius_distance(&ones, &Tensor3::zeros([2, 2, 1]).unwrap()).is_err());
        let mut seed = 9;
        for _ in 0..20 {
            let x = random_tensor([2, 3, 2], &mut seed);
            let y = random_tensor([2, 3, 2], &mut seed);
            let z = random_tensor([2, 3, 2], &mut seed);
            let xz = frobenius_distance(&x, &z).unwrap();
            let xy = frobenius_distance(&x, &y).unwrap();
            let yz = frobenius_distance(&y, &z).unwrap();
            assert!(xz <= xy + yz + 1e-12);
        }
    }

    #[test]
    fn slice_examples() {
        let t = Tensor3::from_fn([1, 2, 3], |_, j, k| (j * 3 + k) as f64).unwrap();
        let s = slice_mode(&t, Mode::One, 0).unwrap();
        assert_eq!((s.rows(), s.cols()), (2, 3));
        assert_eq!(s.as_slice(), t.as_slice());
        assert!(matches!(slice_mode(&t, Mode::Two, 2), Err(Error::IndexOutOfRange { .. })));

        let (a, b, c) = ([1.0, 2.0], [3.0, 0.5, 1.0], [2.0, 5.0]);
        let t = outer3(&a, &b, &c).unwrap();
        for k in 0..2 {
            let s = slice_mode(&t, Mode::Three, k).unwrap();
            for i in 0..2 {
                for j in 0..3 {
                    assert_eq!(s.get(i, j), a[i] * b[j] * c[k]);
                }
            }
        }

        let mut seed = 2;
        let t = random_tensor([3, 4, 2], &mut seed);
        for mode in Mode::ALL {
            let slices: Vec<Matrix> = (0..t.dim(mode)).map(|i| slice_mode(&t, mode, i).unwrap()).collect();
            assert_eq!(stack_slices(&slices, mode).unwrap(), t);
        }
    }

    #[test]
    fn mttkrp_matches_explicit_product() {
        let mut seed = 13;
        let t = random_tensor([3, 4, 5], &mut seed);
        let f = CpFactors::new(
            random_factor(3, 2, &mut seed),
            random_factor(4, 2, &mut seed),
            random_factor(5, 2, &mut seed),
        )
        .unwrap();
        for mode in Mode::ALL {
            let explicit = unfold(&t, mode).matmul(&khatri_rao_complement(&f, mode)).unwrap();
            let fast = mttkrp(&t, &f, mode).unwrap();
            assert!(fast.distance(&explicit).unwrap() <= 1e-13 * explicit.frobenius_norm());
        }
    }

    #[test]
    fn permute_round_trip() {
        let mut seed = 17;
        let t = random_tensor([2, 3, 4], &mut seed);
        let p = t.permute([2, 0, 1]).unwrap();
        assert_eq!(p.shape(), [4, 2, 3]);
        assert_eq!(p.get(3, 1, 2), t.get(1, 2, 3));
        assert!(t.permute([0, 0, 1]).is_err());
    }

    #[test]
    fn tensor_rejects_negative() {
        assert!(matches!(Tensor3::new([1, 1, 2], vec![1.0, -1.0]), Err(Error::NegativeEntry { index: 1, .. })));
        assert!(Tensor3::new([1, 1, 2], vec![1.0]).is_err());
        assert!(Tensor3::zeros([0, 1, 1]).is_err());
    }
}
