//! Exact operator calculus for vector-valued modular forms of Weil
//! representation type: discriminant forms, Weil representations, theta
//! series, pullback/pushforward/induction, Theta-contraction, and a
//! verifier for quasi-pullbacks of Borcherds products.
//!
//! All q-expansion arithmetic is exact over the rationals. Only the Weil
//! matrices and the slash operators used by induction are floating point,
//! and induced forms are rationalized and re-verified before they leave
//! the [`induction`] module.

pub mod borcherds;
pub mod cli;
pub mod error;
pub mod fqm;
pub mod induction;
pub mod lattice;
pub mod linalg;
pub mod qexp;
pub mod rational;
pub mod theta;
pub mod transfer;
pub mod weil;

pub use error::{Error, Result};
