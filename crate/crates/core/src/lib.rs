//! Computational tools for the `×p, ×q` semigroup acting on the circle
//! `T ≅ [0, 1)`.
//!
//! The crate is organized bottom-up:
//!
//! * [`mod1`]: exact (`Mod1Rational`) and fixed-point (`Mod1Fixed`) circle
//!   points, `×p^i q^j` scaling and orbit grids over the squares
//!   `{0..N-1}²`.
//! * [`equidist`]: counting functions, Weyl sums, star discrepancy and
//!   ergodic averages over orbit grids.
//! * [`atomic`]: finitely supported ergodic invariant measures on
//!   `{j/s}` and genericity checks for rational points.
//! * [`transfer`]: the operators `T_n g(x) = Σ_j [g((x+j)/n) - g(j/n)]`,
//!   distribution functions, Stieltjes-Fourier coefficients and the
//!   projected fixed-point search.
//! * [`cantor`]: exact evaluation of the Cantor function and its
//!   self-similarity identities.
//! * [`cli`]: the `pqcircle` command line front end.

pub mod atomic;
pub mod cantor;
pub mod cli;
pub mod equidist;
mod error;
pub mod mod1;
pub mod transfer;

pub use error::{Error, Result};
