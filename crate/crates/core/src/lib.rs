//! Dephasing of a spin-½ chain collectively coupled to a thermal phonon bath.
//!
//! The chain observable `Q = Σ_m σ³_m / 2^m` couples linearly to an ohmic
//! phonon field. In the Markovian limit the reduced Heisenberg dynamics is
//! a pure-dephasing semigroup that is diagonal in the σ³ product basis:
//!
//! ```text
//! T_t(X)_ij = x_ij · exp(−γ t (j − i)² / 4^(n−1)) · exp(i b t (q_i² − q_j²)),   γ = πλ/β
//! ```
//!
//! Modules:
//! * [`model`]: chain parameters, basis conventions, the operator `Q`.
//! * [`bath`]: spectral density, thermal correlation function, the
//!   generator coefficients `a` and `b`.
//! * [`dynamics`]: the generator, the closed-form semigroup and an RK4
//!   oracle.
//! * [`pointer`]: the diagonal pointer algebra, its trace measure and the
//!   long-time limit.

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod operator;
pub mod pointer;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use model::{SpinChainModel, SpinConfiguration};
pub use operator::{DensityMatrix, Observable};
