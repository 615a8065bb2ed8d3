//! Nonnegative CP decomposition (NNCPD) and NMF-based tensor decompositions
//! for dynamic topic modeling.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`] / [`matrix`]: dense storage, unfoldings, Khatri–Rao, CP reconstruction.
//! * [`nmf`]: multiplicative-update NMF plus the Direct NMF and Fixed NMF tensor baselines.
//! * [`cp`]: HALS nonnegative CP decomposition, restarts and temporal spike detection.
//! * [`synth`]: seeded synthetic dynamic-topic tensors and noise models.
//! * [`text`]: corpus preprocessing, TF-IDF and document x word x time tensor assembly.
//! * [`harness`]: noise-robustness sweeps, reports, exports and heatmaps.

pub mod cp;
pub mod error;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod nmf;
pub mod options;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod text;

pub use cp::{nncpd_best_of, nncpd_hals, temporal_spikes, NncpdResult};
pub use error::{Error, Result};
pub use matrix::{FactorMatrix, Matrix};
pub use nmf::{direct_nmf, fixed_nmf, nmf, NmfResult, SlicedDecomposition};
pub use options::SolverOptions;
pub use tensor::{CpFactors, Mode, Tensor3};
