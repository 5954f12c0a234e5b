//! Exact and empirical densities of visible and k-free lattice points on
//! hyperplanes and intersections of hyperplanes in ℤⁿ.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorization, Möbius functions, Jordan totients, finite Euler
//!   products and `1/ζ(t)`.
//! * [`intlinalg`]: exact integer matrices, Smith normal form, null-space
//!   lattices and unimodularity.
//! * [`density`]: the exact density engine for hyperplane systems.
//! * [`enumerate`]: brute-force box enumeration used as an empirical oracle.
//! * [`densityset`]: structure of the set of achievable hyperplane densities.
//!
//! ```
//! use lattice_density::density::density_of_hyperplane;
//! use num_bigint::BigInt;
//!
//! let a = [BigInt::from(2), BigInt::from(-1)];
//! let d = density_of_hyperplane(&a, &BigInt::from(5), 1).unwrap();
//! assert_eq!(d.density.to_string(), "4/5");
//! ```

pub mod arith;
pub mod density;
pub mod densityset;
pub mod enumerate;
mod error;
pub mod fmt;
pub mod input;
pub mod intlinalg;
pub mod serde_big;

pub use arith::{DensityValue, Factorization};
pub use density::{DensityPath, DensityResult, HyperplaneSystem};
pub use error::{Error, Result};
pub use intlinalg::{IntMatrix, SnfDecomposition};
