//! Weighted nearest-neighbour random walks governed by powered densities `f^K`,
//! on discrete boxes `{0, 1/n, ..., 1}^d` and on general graphs.
//!
//! The crate is organised around a handful of pieces:
//!
//! * [`governing`]: the densities that govern every walk (mean-field Ising and
//!   Potts, the two-topic LDA projection, tabulated grids), always in log domain.
//! * [`grid_walk`]: the lazy Metropolis walk on the box, with boundary loops.
//! * [`graph_walk`]: walks on regular graphs, the electric-network view
//!   (effective resistance, commute and escape quantities) and the closed-form
//!   annealing bounds for graphs.
//! * [`annealing`]: multi-stage schedules (fixed-`K` then `f^n`, coarse-to-fine,
//!   adaptive search over `K`).
//! * [`diagnostics`]: exact computations on enumerable chains used as ground truth.
//! * [`lda`]: collapsed Gibbs sampling for LDA with the annealed update.

pub mod annealing;
pub mod diagnostics;
pub mod error;
pub mod governing;
pub mod graph_walk;
pub mod grid_walk;
pub mod lda;
pub mod math;
pub mod seed;

pub use error::{Error, Result};
