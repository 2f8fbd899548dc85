//! Graph and graphon signal processing.
//!
//! Graphons are symmetric kernels on the unit square that serve both as
//! limits of dense graph sequences and as random graph models. This crate
//! samples graphs from graphons, diagonalizes graphs and (discretized)
//! graphon operators with a signed eigenvalue ordering, transforms signals
//! into those bases, filters them, computes homomorphism densities and cut
//! norms, and runs the convergence experiments that tie the finite and
//! limit objects together.

// Negated comparisons such as `!(x > 0.0)` reject NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod filters;
pub mod graph;
pub mod graphon;
pub mod homdensity;
pub mod io;
pub mod linalg;
pub mod movielens;
pub mod plot;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{eigendecompose, gft, igft, Coefficients, Graph, GraphSignal, SignedIndex, SpectralBasis};
pub use graphon::{
    discretize, induced_graphon, sample_graph, sample_latents, Graphon, GraphonKind, LatentLabels, LatentMode,
    SampleMode,
};
pub use spectral::{graphon_eigs, iwft, wft, GraphonBasis, GraphonSignal};
