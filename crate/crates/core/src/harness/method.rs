use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cp::{nncpd_best_of, NncpdResult};
use crate::error::{Error, Result};
use crate::io::{write_error_history, write_matrix_csv};
use crate::nmf::{direct_nmf, fixed_nmf, SlicedDecomposition, SlicedFactors};
use crate::options::SolverOptions;
use crate::tensor::{cp_reconstruct, Mode, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nncpd,
    DirectNmf,
    FixedNmf,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Nncpd, Method::DirectNmf, Method::FixedNmf];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Nncpd => "nncpd",
            Method::DirectNmf => "direct_nmf",
            Method::FixedNmf => "fixed_nmf",
        }
    }

    pub fn needs_slice_mode(&self) -> bool {
        !matches!(self, Method::Nncpd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown method {s:?}; expected nncpd, direct_nmf or fixed_nmf"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    Cp(NncpdResult),
    Sliced(SlicedDecomposition),
}

impl Decomposition {
    pub fn reconstruct(&self) -> Tensor3 {
        match self {
            Decomposition::Cp(r) => cp_reconstruct(&r.factors),
            Decomposition::Sliced(d) => d.reconstruct(),
        }
    }

    /// `‖T − T̂‖_F` against the decomposed tensor.
    pub fn error(&self) -> f64 {
        match self {
            Decomposition::Cp(r) => r.error(),
            Decomposition::Sliced(d) => d.reconstruction_error,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            Decomposition::Cp(r) => r.iterations,
            Decomposition::Sliced(d) => d.iterations,
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            Decomposition::Cp(r) => r.converged,
            Decomposition::Sliced(d) => d.converged,
        }
    }

    pub fn error_history(&self) -> &[f64] {
        match self {
            Decomposition::Cp(r) => &r.error_history,
            Decomposition::Sliced(d) => &d.error_history,
        }
    }
}

/// Runs `method` at rank `r`. NNCPD keeps the best of `opts.restarts` starts;
/// the slice-wise methods require `slice_mode`.
pub fn run_method(
    t: &Tensor3,
    method: Method,
    r: usize,
    slice_mode: Option<Mode>,
    opts: &SolverOptions,
) -> Result<Decomposition> {
    let sliced = |f: fn(&Tensor3, usize, Mode, &SolverOptions) -> Result<SlicedDecomposition>| {
        let mode = slice_mode.ok_or_else(|| Error::InvalidArgument(format!("{method} needs a slice mode")))?;
        f(t, r, mode, opts).map(Decomposition::Sliced)
    };
    match method {
        Method::Nncpd => Ok(Decomposition::Cp(nncpd_best_of(t, r, opts, opts.restarts)?.best)),
        Method::DirectNmf => sliced(direct_nmf),
        Method::FixedNmf => sliced(fixed_nmf),
    }
}

/// Contents of `result.json` written next to exported factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: Method,
    pub rank: usize,
    pub slice_mode: Option<Mode>,
    pub shape: [usize; 3],
    pub error: f64,
    pub relative_error: f64,
    pub iterations: usize,
    pub seed: u64,
    pub converged: bool,
}

impl RunSummary {
    pub fn new(
        t: &Tensor3,
        method: Method,
        rank: usize,
        slice_mode: Option<Mode>,
        seed: u64,
        dec: &Decomposition,
    ) -> Self {
        let error = dec.error();
        let norm = t.frobenius_norm();
        RunSummary {
            method,
            rank,
            slice_mode: if method.needs_slice_mode() { slice_mode } else { None },
            shape: t.shape(),
            error,
            relative_error: if norm > 0.0 { error / norm } else { error },
            iterations: dec.iterations(),
            seed,
            converged: dec.converged(),
        }
    }
}

/// Writes factor CSVs, `result.json` and (when there is one) `error_history.csv`.
///
/// NNCPD: `A.csv`, `B.csv`, `C.csv`. Direct NMF: `A_<i>.csv`, `S_<i>.csv` per
/// slice. Fixed NMF: `A.csv` and `S_<i>.csv`. Slice numbers are zero-based.
pub fn export_decomposition(dir: &Path, dec: &Decomposition, summary: &RunSummary) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match dec {
        Decomposition::Cp(r) => {
            for (name, mode) in [("A", Mode::One), ("B", Mode::Two), ("C", Mode::Three)] {
                write_matrix_csv(dir.join(format!("{name}.csv")), r.factors.factor(mode))?;
            }
        }
        Decomposition::Sliced(d) => match &d.factors {
            SlicedFactors::Direct { a, s } => {
                for (i, (a, s)) in a.iter().zip(s).enumerate() {
                    write_matrix_csv(dir.join(format!("A_{i}.csv")), a)?;
                    write_matrix_csv(dir.join(format!("S_{i}.csv")), s)?;
                }
            }
            SlicedFactors::Fixed { a, s } => {
                write_matrix_csv(dir.join("A.csv"), a)?;
                for (i, s) in s.iter().enumerate() {
                    write_matrix_csv(dir.join(format!("S_{i}.csv")), s)?;
                }
            }
        },
    }
    let path = dir.join("result.json");
    let json = serde_json::to_string_pretty(summary)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    if !dec.error_history().is_empty() {
        write_error_history(dir.join("error_history.csv"), dec.error_history())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::outer3;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("cp_als".parse::<Method>().is_err());
    }

    #[test]
    fn sliced_methods_need_a_mode() {
        let t = outer3(&[1.0, 2.0], &[1.0, 1.0], &[3.0, 1.0]).unwrap();
        let opts = SolverOptions::default();
        assert!(run_method(&t, Method::FixedNmf, 1, None, &opts).is_err());
        assert!(run_method(&t, Method::FixedNmf, 1, Some(Mode::Three), &opts).is_ok());
        assert!(run_method(&t, Method::Nncpd, 1, None, &opts).is_ok());
    }

    #[test]
    fn export_layout() {
        let dir = tempfile::tempdir().unwrap();
        let t = outer3(&[1.0, 2.0], &[1.0, 1.0, 2.0], &[3.0, 1.0]).unwrap();
        let opts = SolverOptions::default();
        for (m, files) in [
            (Method::Nncpd, vec!["A.csv", "B.csv", "C.csv", "error_history.csv"]),
            (Method::DirectNmf, vec!["A_0.csv", "S_1.csv"]),
            (Method::FixedNmf, vec!["A.csv", "S_0.csv", "S_1.csv", "error_history.csv"]),
        ] {
            let out = dir.path().join(m.name());
            let dec = run_method(&t, m, 1, Some(Mode::Three), &opts).unwrap();
            let summary = RunSummary::new(&t, m, 1, Some(Mode::Three), 0, &dec);
            export_decomposition(&out, &dec, &summary).unwrap();
            for f in files {
                assert!(out.join(f).is_file(), "{m}: {f}");
            }
            let back: RunSummary = serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
            assert_eq!(back, summary);
        }
        assert!(!dir.path().join("direct_nmf/error_history.csv").exists());
    }
}
