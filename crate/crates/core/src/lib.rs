//! Hard-core model on random `d`-regular bipartite graphs.
//!
//! * [`graphgen`] samples graphs as unions of `d` random perfect matchings and
//!   counts short cycles.
//! * [`treegibbs`] solves the occupancy recursion on the infinite tree.
//! * [`exponents`] holds the first- and second-moment exponent functions and
//!   their derivatives.
//! * [`moments`] evaluates exact finite-`n` moments and their limiting ratio.
//! * [`enumerate`] computes exact per-graph quantities by subset enumeration.
//! * [`dynamics`] simulates Glauber and block dynamics.

pub mod dynamics;
pub mod enumerate;
pub mod error;
pub mod exponents;
pub mod graphgen;
pub mod moments;
pub mod numeric;
pub mod quadrature;
pub mod rng;
pub mod treegibbs;

pub use error::{Error, Result};
pub use graphgen::{count_cycles, sample_graph, BipartiteMultigraph, CycleCensus};
pub use treegibbs::{lambda_c, semi_invariant_fixed_points, symmetric_fixed_point, tree_recursion, TreeFixedPoints};
