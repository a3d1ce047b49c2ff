//! Approximate optimization of dynamical systems whose vector field is
//! switched by a binary decision vector.
//!
//! The payoff `J(α) = ∫ r(x, α, t) dt + q(x(T))` of an ODE `ẋ = f(x, α, t)`
//! is linearized at a binary point using adjoint-based derivatives. The
//! resulting 0–1 linear program is solved by sorting (l0 bands), an exact LP
//! relaxation (totally unimodular rows) or a greedy knapsack heuristic, and the
//! answer is certified with an a posteriori suboptimality coefficient.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adjoint;
pub mod binary;
pub mod bounds;
pub mod combisolve;
pub mod derivative;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod refrigeration;
pub mod sysmodel;

mod linalg;

pub use binary::BinaryVector;
pub use error::{Error, Result};
pub use sysmodel::{AlphaJacobians, Scheme, System, TimeGrid, Trajectory};
