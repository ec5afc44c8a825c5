//! Random homogeneous polynomials on spheres and the topology of their
//! singular loci.
//!
//! The crate samples polynomials under the L²-harmonic Gaussian ensemble
//! (and the Kostlan ensemble for contrast), evaluates them with exact
//! derivatives, and counts zero-set components, critical points and
//! umbilics of zero surfaces. Monte Carlo estimators, local rescalings and
//! covariance kernels tie the counts to their large-degree asymptotics.

pub mod charts;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod field;
pub mod harmonics;
pub mod jet;
pub mod kernels;
pub mod mesh;
pub mod montecarlo;
pub mod rng;
pub mod special;
pub mod svg;
pub mod topology;
pub mod umbilics;

pub use error::{Error, Result};
