//! Numerical toolkit for stable phase retrieval up to component-wise phase.
//!
//! The crate computes Gabor and Cauchy-wavelet magnitude measurements on a
//! time-frequency lattice, segments a magnitude field into "atoll"
//! components (regions where the field is bounded below, possibly with
//! lagoons where it is not), evaluates every constant entering a
//! per-component stability certificate, aligns reconstructions
//! component-wise, and reproduces the multi-component instability and
//! recovery phenomena at desk scale.
//!
//! Data-parallel inner loops run on rayon when the `parallel` feature
//! (default) is enabled; every reduction uses a fixed-shape pairwise tree,
//! so results are identical across thread counts and to the sequential
//! fallback.

pub mod error;
pub mod exec;
pub mod grid;
pub mod tfg;

pub mod transforms;

pub mod analytic;
pub mod atoll;

pub mod alignment;
pub mod constants;
pub mod retrieval;

pub mod audio;

pub use error::{Error, Result};
