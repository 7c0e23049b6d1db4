//! Random Kostlan polynomials on S¹ and S²: exact monomial and spherical
//! harmonic representations, Bombieri-Weil / L² / Sobolev / C¹ norms, the
//! distance to the discriminant, zero-set topology and a Monte Carlo
//! harness for low-degree approximation and stability statistics.

pub mod error;
pub mod experiments;
pub mod function;
pub mod harmonics;
pub mod norms;
pub mod poly;
pub mod sampler;
pub mod special;
pub mod sphere;
pub mod topology;

pub use error::{Error, Result};
pub use function::{Evaluator, SphereFunction};
pub use harmonics::{decompose, HarmonicExpansion};
pub use poly::{HomogeneousPoly, MultiIndex, PolyJson};
pub use sphere::SpherePoint;
