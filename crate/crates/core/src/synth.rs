//! Seeded synthetic dynamic-topic tensors and noise models.
//!
//! All generators draw from [`SeededRng`] so that a seed pins the output
//! bit-for-bit. Index ranges below are zero-based and half-open.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::{outer3, Mode, Tensor3};

/// Amplitude of the dense noise that turns the correlated-groups tensor `X` into `T`.
pub const CORRELATED_NOISE_SCALE: f64 = 1e-3;

/// Shape of the emergence and shift tensors.
pub const DYNAMIC_SHAPE: [usize; 3] = [14, 30, 20];

/// `sin((k − 1) · 2π/9) + 1` for one-based slice `k`; here `k` is zero-based.
#[inline]
pub fn sinusoid_profile(k: usize) -> f64 {
    (k as f64 * std::f64::consts::TAU / 9.0).sin() + 1.0
}

fn abs_normals(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.standard_normal().abs()).collect()
}

fn indicator(n: usize, range: std::ops::Range<usize>) -> Vec<f64> {
    (0..n).map(|i| if range.contains(&i) { 1.0 } else { 0.0 }).collect()
}

/// The monotonic two-group dataset: clean tensor `x` and noisy `t = x + 1e-3·|Z|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedGroups {
    pub x: Tensor3,
    pub t: Tensor3,
}

/// Time-first `10 x 20 x 30` tensor (time, questions, users) with
///
/// ```text
/// X = 1_{t<10} ⊗ p1 ⊗ u_{0..15} + 1_{t<5} ⊗ p2 ⊗ u_{15..30} + 1_{5≤t<10} ⊗ p3 ⊗ u_{15..30}
/// ```
///
/// where `p1, p2, p3` are `|N(0,1)|` 20-vectors and `u` are user-group
/// indicators. Every mode-1 slice therefore has two blocks of identical
/// columns, and the second block changes between slices 5 and 6 (one-based).
/// With `time_first == false` modes 2 and 3 are swapped, giving `10 x 30 x 20`
/// with correlated rows instead of columns.
///
/// Draw order: `p1`, `p2`, `p3`, then the 6000 noise entries in linearization
/// order of the returned shape.
pub fn gen_correlated_groups(time_first: bool, seed: u64) -> Result<CorrelatedGroups> {
    let mut rng = SeededRng::new(seed);
    let (n_time, n_questions, n_users) = (10, 20, 30);
    let p1 = abs_normals(&mut rng, n_questions);
    let p2 = abs_normals(&mut rng, n_questions);
    let p3 = abs_normals(&mut rng, n_questions);
    let early = indicator(n_users, 0..15);
    let late = indicator(n_users, 15..30);
    let terms = [
        outer3(&vec![1.0; n_time], &p1, &early)?,
        outer3(&indicator(n_time, 0..5), &p2, &late)?,
        outer3(&indicator(n_time, 5..10), &p3, &late)?,
    ];
    let mut x = terms[0].add(&terms[1])?.add(&terms[2])?;
    if !time_first {
        x = x.permute([0, 2, 1])?;
    }
    let noise = Tensor3::new(x.shape(), abs_normals(&mut rng, x.len()))?.scale(CORRELATED_NOISE_SCALE)?;
    let t = x.add(&noise)?;
    Ok(CorrelatedGroups { x, t })
}

/// Emergence-and-fading tensor, `14 x 30 x 20`:
///
/// ```text
/// X[i,j,k] = sin(k · 2π/9) + 1   for j < 15,  k < 10
///          = |z_i|               for j ≥ 15, k < 10
///          = |w_i|               for k ≥ 10
/// ```
///
/// `z` is drawn before `w`, both standard normal 14-vectors.
pub fn gen_emergence(seed: u64) -> Result<Tensor3> {
    let mut rng = SeededRng::new(seed);
    let z = abs_normals(&mut rng, DYNAMIC_SHAPE[0]);
    let w = abs_normals(&mut rng, DYNAMIC_SHAPE[0]);
    Tensor3::from_fn(DYNAMIC_SHAPE, |i, j, k| match (j < 15, k < 10) {
        (true, true) => sinusoid_profile(k),
        (false, true) => z[i],
        (_, false) => w[i],
    })
}

/// Topic-shift tensor, `14 x 30 x 20`: the sinusoid and `|z_i|` blocks swap
/// column halves between the first and second ten slices.
///
/// ```text
/// X[i,j,k] = sin(k · 2π/9) + 1   for (j < 15, k < 10) or (j ≥ 15, k ≥ 10)
///          = |z_i|               otherwise
/// ```
pub fn gen_shift(seed: u64) -> Result<Tensor3> {
    let mut rng = SeededRng::new(seed);
    let z = abs_normals(&mut rng, DYNAMIC_SHAPE[0]);
    Tensor3::from_fn(DYNAMIC_SHAPE, |i, j, k| if (j < 15) == (k < 10) { sinusoid_profile(k) } else { z[i] })
}

/// Serialized as its [`NoiseKind::label`], e.g. `"lowrank2"` or `"dense"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NoiseKind {
    /// `|σ Σ_{i<rank_n} n_a ⊗ n_b ⊗ n_c|` with standard-normal vectors.
    LowRank { rank_n: usize },
    /// `σ |Z|` with i.i.d. standard-normal entries.
    Dense,
}

impl NoiseKind {
    /// Short stable label used in file names and seeds.
    pub fn label(&self) -> String {
        match self {
            NoiseKind::LowRank { rank_n } => format!("lowrank{rank_n}"),
            NoiseKind::Dense => "dense".to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<NoiseKind> {
        if s == "dense" {
            return Ok(NoiseKind::Dense);
        }
        s.strip_prefix("lowrank")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .map(|rank_n| NoiseKind::LowRank { rank_n })
            .ok_or_else(|| Error::InvalidArgument(format!("unknown noise kind {s:?}; use dense or lowrank<N>")))
    }
}

impl TryFrom<String> for NoiseKind {
    type Error = Error;

    fn try_from(s: String) -> Result<NoiseKind> {
        NoiseKind::parse(&s)
    }
}

impl From<NoiseKind> for String {
    fn from(k: NoiseKind) -> String {
        k.label()
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {}", self.sigma)));
        }
        if let NoiseKind::LowRank { rank_n: 0 } = self.kind {
            return Err(Error::InvalidArgument("noise rank must be at least 1".into()));
        }
        Ok(())
    }

    pub fn generate(&self, shape: [usize; 3]) -> Result<Tensor3> {
        self.validate()?;
        match self.kind {
            NoiseKind::LowRank { rank_n } => gen_lowrank_noise(shape, rank_n, self.sigma, self.seed),
            NoiseKind::Dense => gen_dense_noise(shape, self.sigma, self.seed),
        }
    }
}

/// Signed rank-`rank_n` sum `Σ n_a ⊗ n_b ⊗ n_c`, drawn as `n_a, n_b, n_c` per term.
fn signed_lowrank(shape: [usize; 3], rank_n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    let [n1, n2, n3] = shape;
    let mut sum = vec![0.0; n1 * n2 * n3];
    for _ in 0..rank_n {
        let a = rng.normal_vec(n1);
        let b = rng.normal_vec(n2);
        let c = rng.normal_vec(n3);
        let mut idx = 0;
        for &x in &a {
            for &y in &b {
                let xy = x * y;
                for &z in &c {
                    sum[idx] += xy * z;
                    idx += 1;
                }
            }
        }
    }
    sum
}

/// `N = σ |Σ_{i<rank_n} n_a ⊗ n_b ⊗ n_c|`. The unscaled sum depends only on the
/// seed, so `N` is exactly linear in `σ` up to the rounding of one product.
pub fn gen_lowrank_noise(shape: [usize; 3], rank_n: usize, sigma: f64, seed: u64) -> Result<Tensor3> {
    NoiseSpec { kind: NoiseKind::LowRank { rank_n }, sigma, seed }.validate()?;
    Tensor3::zeros(shape)?;
    let data = signed_lowrank(shape, rank_n, seed).into_iter().map(|v| sigma * v.abs()).collect();
    Tensor3::new(shape, data)
}

/// `N = σ |Z|` with i.i.d. standard-normal `Z` in linearization order.
pub fn gen_dense_noise(shape: [usize; 3], sigma: f64, seed: u64) -> Result<Tensor3> {
    NoiseSpec { kind: NoiseKind::Dense, sigma, seed }.validate()?;
    Tensor3::zeros(shape)?;
    let mut rng = SeededRng::new(seed);
    let n: usize = shape.iter().product();
    Tensor3::new(shape, (0..n).map(|_| sigma * rng.standard_normal().abs()).collect())
}

/// Named datasets reachable from the CLI and the robustness harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    /// Clean time-first correlated-groups tensor `X`.
    Correlated,
    /// Noisy time-first correlated-groups tensor `T`.
    CorrelatedNoisy,
    /// Clean mode-2/3 swapped variant.
    CorrelatedRows,
    /// Noisy mode-2/3 swapped variant.
    CorrelatedRowsNoisy,
    Emergence,
    Shift,
}

impl Dataset {
    pub const ALL: [Dataset; 6] = [
        Dataset::Correlated,
        Dataset::CorrelatedNoisy,
        Dataset::CorrelatedRows,
        Dataset::CorrelatedRowsNoisy,
        Dataset::Emergence,
        Dataset::Shift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Dataset::Correlated => "correlated",
            Dataset::CorrelatedNoisy => "correlated-noisy",
            Dataset::CorrelatedRows => "correlated-rows",
            Dataset::CorrelatedRowsNoisy => "correlated-rows-noisy",
            Dataset::Emergence => "emergence",
            Dataset::Shift => "shift",
        }
    }

    pub fn parse(s: &str) -> Result<Dataset> {
        Dataset::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Dataset::ALL.iter().map(Dataset::name).collect();
            Error::InvalidArgument(format!("unknown dataset {s:?}; expected one of {}", names.join(", ")))
        })
    }

    /// The temporal mode: the first for the correlated-groups tensors, the third otherwise.
    pub fn time_mode(&self) -> Mode {
        match self {
            Dataset::Emergence | Dataset::Shift => Mode::Three,
            _ => Mode::One,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Tensor3> {
        Ok(match self {
            Dataset::Correlated => gen_correlated_groups(true, seed)?.x,
            Dataset::CorrelatedNoisy => gen_correlated_groups(true, seed)?.t,
            Dataset::CorrelatedRows => gen_correlated_groups(false, seed)?.x,
            Dataset::CorrelatedRowsNoisy => gen_correlated_groups(false, seed)?.t,
            Dataset::Emergence => gen_emergence(seed)?,
            Dataset::Shift => gen_shift(seed)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{frobenius_distance, slice_mode};

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn correlated_groups_structure() {
        let g = gen_correlated_groups(true, 5).unwrap();
        assert_eq!(g.x.shape(), [10, 20, 30]);
        for t in 0..10 {
            let s = slice_mode(&g.x, Mode::One, t).unwrap();
            for j in 1..15 {
                assert_eq!(s.column(j), s.column(0));
                assert!((pearson(&s.column(j), &s.column(0)) - 1.0).abs() < 1e-12);
            }
            for j in 16..30 {
                assert_eq!(s.column(j), s.column(15));
            }
        }
        let early = slice_mode(&g.x, Mode::One, 0).unwrap().column(20);
        let late = slice_mode(&g.x, Mode::One, 9).unwrap().column(20);
        assert_ne!(early, late);
        assert_eq!(slice_mode(&g.x, Mode::One, 4).unwrap().column(20), early);
        assert_eq!(slice_mode(&g.x, Mode::One, 5).unwrap().column(20), late);
    }

    #[test]
    fn correlated_noise_norm_band() {
        for seed in 0..10 {
            let g = gen_correlated_groups(true, seed).unwrap();
            let d = frobenius_distance(&g.t, &g.x).unwrap();
            assert!((0.04..=0.09).contains(&d), "noise norm {d}");
        }
    }

    #[test]
    fn correlated_rows_is_transpose() {
        let a = gen_correlated_groups(true, 3).unwrap();
        let b = gen_correlated_groups(false, 3).unwrap();
        assert_eq!(b.x.shape(), [10, 30, 20]);
        assert_eq!(b.x, a.x.permute([0, 2, 1]).unwrap());
        let s = slice_mode(&b.x, Mode::One, 0).unwrap();
        assert_eq!(s.row(3), s.row(0));
    }

    #[test]
    fn emergence_blocks() {
        let x = gen_emergence(1).unwrap();
        assert_eq!(x.get(0, 0, 0), 1.0);
        let block: f64 = (0..14)
            .flat_map(|i| (0..15).flat_map(move |j| (0..10).map(move |k| (i, j, k))))
            .map(|(i, j, k)| x.get(i, j, k).powi(2))
            .sum();
        let analytic = 14.0 * 15.0 * (0..10).map(|k| sinusoid_profile(k).powi(2)).sum::<f64>();
        assert!((block - analytic).abs() < 1e-9);
        // Over one full period sin sums to 0 and sin² to 9/2; k = 9 adds sin(2π) = 0.
        assert!((analytic - 210.0 * 14.5).abs() < 1e-9, "{analytic}");
        assert_eq!(x.get(3, 20, 2), x.get(3, 29, 9));
        assert!((85.0..=135.0).contains(&gen_emergence(0).unwrap().frobenius_norm()));
        assert_eq!(x.get(3, 0, 12), x.get(3, 29, 19));
    }

    #[test]
    fn shift_symmetry() {
        let x = gen_shift(2).unwrap();
        for i in 0..14 {
            for j in 0..15 {
                assert_eq!(x.get(i, j, 0), 1.0);
                assert_eq!(x.get(i, 15 + j, 0), x.get(i, j, 19));
            }
        }
    }

    #[test]
    fn lowrank_rank_one_norm_factorizes() {
        let shape = [4, 5, 6];
        let n = gen_lowrank_noise(shape, 1, 0.3, 11).unwrap();
        let mut rng = SeededRng::new(11);
        let norm = |v: Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let expected = 0.3 * norm(rng.normal_vec(4)) * norm(rng.normal_vec(5)) * norm(rng.normal_vec(6));
        assert!((n.frobenius_norm() - expected).abs() <= 1e-12 * expected);
        let dynamic = gen_lowrank_noise(DYNAMIC_SHAPE, 1, 0.1, 0).unwrap();
        assert!((2.0..=20.0).contains(&dynamic.frobenius_norm()));
    }

    #[test]
    fn sigma_linearity() {
        let shape = [3, 4, 5];
        let base = gen_lowrank_noise(shape, 2, 0.25, 9).unwrap();
        let doubled = gen_lowrank_noise(shape, 2, 0.5, 9).unwrap();
        assert_eq!(doubled, base.scale(2.0).unwrap());
        let small = gen_lowrank_noise(shape, 2, 1e-3, 9).unwrap();
        let one = gen_lowrank_noise(shape, 2, 1.0, 9).unwrap();
        for (a, b) in one.as_slice().iter().zip(small.as_slice()) {
            assert!((a - 1000.0 * b).abs() <= 4.0 * f64::EPSILON * a);
        }
        let d1 = gen_dense_noise(shape, 0.125, 4).unwrap();
        let d2 = gen_dense_noise(shape, 1.0, 4).unwrap();
        assert_eq!(d2, d1.scale(8.0).unwrap());
    }

    #[test]
    fn dense_noise_statistics() {
        let n = gen_dense_noise(DYNAMIC_SHAPE, 0.1, 0).unwrap();
        assert!(n.min() >= 0.0);
        let half_normal_mean = (2.0 / std::f64::consts::PI).sqrt();
        assert!((n.mean() / (0.1 * half_normal_mean) - 1.0).abs() < 0.03);
        assert!((8.5..=10.0).contains(&n.frobenius_norm()));
    }

    #[test]
    fn noise_spec_validation() {
        assert!(gen_dense_noise([2, 2, 2], 0.0, 0).is_err());
        assert!(gen_lowrank_noise([2, 2, 2], 0, 1.0, 0).is_err());
        assert_eq!(NoiseKind::parse("lowrank2").unwrap(), NoiseKind::LowRank { rank_n: 2 });
        assert_eq!(NoiseKind::parse("dense").unwrap(), NoiseKind::Dense);
        assert!(NoiseKind::parse("lowrank0").is_err());
        assert!(NoiseKind::parse("sparse").is_err());
        let json = serde_json::to_string(&NoiseKind::LowRank { rank_n: 3 }).unwrap();
        assert_eq!(json, "\"lowrank3\"");
        assert_eq!(serde_json::from_str::<NoiseKind>(&json).unwrap(), NoiseKind::LowRank { rank_n: 3 });
    }

    #[test]
    fn generators_are_deterministic() {
        for d in Dataset::ALL {
            assert_eq!(d.generate(8).unwrap(), d.generate(8).unwrap());
            assert!(d.generate(8).unwrap().min() >= 0.0);
            assert_eq!(Dataset::parse(d.name()).unwrap(), d);
        }
        assert_ne!(gen_emergence(1).unwrap(), gen_emergence(2).unwrap());
    }
}
