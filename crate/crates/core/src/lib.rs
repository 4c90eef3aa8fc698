//! Polymatroid tilings from divisors on metric graphs.
//!
//! Everything is computed in exact rational arithmetic. The main entry points:
//!
//! * [`setfun`]: supermodular set functions, modular pairs, splittings.
//! * [`polytope`]: base polytopes, greedy vertices, faces.
//! * [`graph`]: metric graphs, divisors, admissible extensions, chip-firing.
//! * [`semistab`]: semistability polytopes and their Voronoi description.
//! * [`tiling`]: tile families in a window, their verification, regularity
//!   and periodicity.
//! * [`simplex`]: subspace polymatroids, mixed polytopes and bricks.

pub mod error;
pub mod graph;
pub mod hpoly;
pub mod linalg;
pub mod polytope;
pub mod random;
pub mod rational;
pub mod semistab;
pub mod setfun;
pub mod simplex;
pub mod tiling;

pub use error::{Error, Result};
pub use graph::{Divisor, EdgeSet, MetricGraph, Oriented, PointOnGraph, VertexFunction};
pub use polytope::{BasePolytope, Point};
pub use rational::Rational;
pub use setfun::{GroundSet, ModularPair, OrderedPartition, SetFunction, Subset};

pub use semistab::SemistabilityData;
pub use simplex::{BlockSubspace, Brick};
pub use tiling::{TileFamily, Window};
