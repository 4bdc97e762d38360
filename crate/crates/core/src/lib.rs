//! Triply Laplacian scale mixture (TLSM) denoising of 3-D seismic tensors.
//!
//! A noisy volume `Y = X + F + N` (clean data, acquisition footprint,
//! Gaussian noise) is denoised by ADMM over a low-rank prior on the t-SVD
//! spectrum of `X` and two directional difference priors, each shrunk with a
//! Laplacian scale mixture instead of a plain soft threshold.
//!
//! ```
//! use tlsm::seisgen::{self, NoiseSpec};
//! use tlsm::solver::{denoise, SolverConfig};
//!
//! let dims = [8, 8, 16];
//! let events = seisgen::default_events(dims, seisgen::DEFAULT_DT);
//! let clean = seisgen::generate_clean(dims, &events, seisgen::DEFAULT_DT, 10.0)?;
//! let noisy = seisgen::add_noise(&clean, &NoiseSpec::new(0.1, 0.02, 7, dims[2]))?.noisy;
//! let cfg = SolverConfig { max_iters: 5, ..SolverConfig::default() };
//! let out = denoise(&noisy, &cfg, Some(&clean))?;
//! assert_eq!(out.history.len(), 5);
//! # Ok::<(), tlsm::TlsmError>(())
//! ```

pub mod cli;
pub mod error;
pub mod io;
pub mod lsm;
pub mod metrics;
pub mod seisgen;
pub mod solver;
pub mod spectral;
pub mod tensor;
pub mod tsvd;

pub use error::{Result, TlsmError};
pub use tensor::{SpatialMode, Tensor3};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    mod tensors {}
    #[doc = include_str!("../../../book/src/t-svd.md")]
    mod t_svd {}
    #[doc = include_str!("../../../book/src/lsm.md")]
    mod lsm {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/synthetic-data.md")]
    mod synthetic_data {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
