//! Certified semidefinite lower bounds on the crossing numbers of complete
//! bipartite graphs `K_{m,n}`.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`qmatrix`] computes the cost `Q_{σ,τ}` of every pair of m-cycles as a
//!    shortest-path distance in the adjacent-swap graph.
//! 2. [`orbits`] indexes the pairs of cycles up to the action of
//!    `S_m × {±1}` and the swap of coordinates.
//! 3. [`tableau`] and [`repsets`] build the representative vectors that
//!    block-diagonalize invariant matrices.
//! 4. [`coeffs`] computes the block coefficients `A_ω`, by direct expansion,
//!    by the polynomial method, or by an orbit-sum over cycles.
//! 5. [`beta`] and [`alpha`] assemble and solve the relaxations with the
//!    interior-point solver in [`sdp`]; [`beta`] also certifies its result in
//!    exact arithmetic.
//! 6. [`bounds`] turns a certified value into crossing-number bounds.
//!
//! [`pipeline`] chains the stages over an on-disk cache.

pub mod alpha;
pub mod beta;
pub mod bounds;
pub mod cache;
pub mod coeffs;
pub mod cycle;
pub mod error;
pub mod exact;
pub mod orbits;
pub mod pipeline;
pub mod poly;
pub mod qmatrix;
pub mod repsets;
pub mod sdp;
pub mod tableau;

pub use cycle::{Cycle, GroupElement, Perm, StabilizerGen};
pub use error::{Error, Result};
pub use orbits::{OrbitRecord, OrbitTable};
pub use qmatrix::QTable;
