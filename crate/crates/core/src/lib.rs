//! Simulation toolkit for a three-path interferometer in which five
//! measurement contexts of a qutrit are realized one after another by five
//! beam splitters.
//!
//! The crate is organized bottom-up:
//!
//! - [`hilbert`]: fixed-size complex linear algebra (3-dimensional path space
//!   and the 6-dimensional path-polarization space used by the weak probe).
//! - [`interferometer`]: reflectivities, the ten path vectors, the five
//!   contexts and the cycle-closure check.
//! - [`states`]: the paradox state `N_f`, path probabilities and input parsing.
//! - [`weak`]: weak values, Kirkwood-Dirac elements and coherence coefficients.
//! - [`contextuality`]: the noncontextual inequality `P(f) <= P(D1) + P(D2)`,
//!   its decomposition into negative currents and reflectivity scans.
//! - [`measurement`]: photon counting, polarization path marking and weak probing.
//! - [`io`] and [`cli`]: serialization formats and the `ctxfer` command line.

#![forbid(unsafe_code)]

pub mod cli;
pub mod contextuality;
pub mod error;
pub mod hilbert;
pub mod interferometer;
pub mod io;
pub mod measurement;
pub mod states;
pub mod weak;

pub use error::{Error, Result};
pub use hilbert::{CMat3, CVec3, DensityMatrix, C64};
pub use interferometer::{Context, InterferometerConfig, PathId, PathVectorTable};
