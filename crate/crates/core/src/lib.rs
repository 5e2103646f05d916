//! Weighted tree augmentation toolkit: instance model, reductions, exact LP
//! relaxations, coloring-based convex decompositions, exact oracles, and the
//! triangle-augmentation (3TAP) variant.

pub mod color;
pub mod deficient;
pub mod exact;
pub mod gen;
pub mod instance;
pub mod lp;
pub mod rational;
pub mod reduce;
pub mod threetap;

pub use instance::{
    EdgeId, FractionalSolution, InstanceError, IntegralSolution, Link, LinkId, NodeId,
    RawInstance, RawLink, SolutionFile, TapInstance, Violation,
};
pub use rational::Rational;
