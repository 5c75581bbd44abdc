//! Polyhedral meshes on the unit cube, their a-priori quality indicator, and
//! a lowest-order virtual element solver for the Poisson problem.

pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod meshing;
pub mod point;
pub mod predicates;
pub mod quality;
pub mod sampling;
pub mod vem;

pub use point::{Point2, Point3};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/quality.md")]
    mod quality {}
    #[doc = include_str!("../../../book/src/vem.md")]
    mod vem {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
