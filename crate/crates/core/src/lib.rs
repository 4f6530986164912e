//! Exact verification of the Heyde-type characterization on `R^n x D`, `D` a
//! finite Abelian group: conditional symmetry of `L2 = xi1 + delta xi2` given
//! `L1 = xi1 + xi2`, the characteristic-function equation, and the
//! Gaussian x idempotent x shift decomposition of solutions.

pub mod distribution;
pub mod error;
pub mod fdm;
pub mod gaussian;
pub mod group;
pub mod heyde;
pub mod linalg;
pub mod rational;
pub mod sampling;

pub use distribution::{CharacteristicValue, ExactChar, RationalDistribution};
pub use error::{Error, Result};
pub use group::{Bounds, FiniteAbelianGroup, GroupElement, GroupMap, Subgroup, Turn};
pub use rational::Rational;
