//! Exact toolkit for interference-channel degrees-of-freedom bounds:
//! symbolic scalars, discrete distributions with exact probabilities,
//! sumsets, the Condition (*) checker, entropy-based DoF bounds,
//! information dimension of self-similar measures, and an optimizer for
//! entropy-ratio objectives.

pub mod channel;
pub mod dist;
pub mod dof;
pub mod error;
pub mod infodim;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod parse;
pub mod poly;
pub mod rational;
pub mod sumset;

pub use channel::{ChannelMatrix, ConditionStarReport, ConditionWitness, MonomialBasis};
pub use dist::{DiscreteDist, Support};
pub use dof::BoundReport;
pub use error::{Error, Result};
pub use infodim::IfsSpec;
pub use optimize::{OptConfig, OptResult};
pub use poly::{Coeff, Generator, Monomial, Poly};
pub use rational::Rational;
pub use sumset::FiniteSet;

/// Polynomial in named generators with small-or-big rational coefficients.
pub type ExactScalar = Poly<Rational>;
/// Same polynomials, always on arbitrary-precision coefficients.
pub type BigScalar = Poly<num_rational::BigRational>;
pub type Dist = DiscreteDist<ExactScalar>;
pub type RationalDist = DiscreteDist<Rational>;
pub type ScalarSet = FiniteSet<ExactScalar>;
pub type Ifs = IfsSpec<ExactScalar>;
