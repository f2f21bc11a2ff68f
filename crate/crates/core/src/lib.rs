//! Numerical laboratory for the quasihyperbolic metric on bounded planar
//! domains.
//!
//! A [`DomainSpec`] is discretized into a [`MetricGraph`] whose shortest
//! paths approximate the inner metric and the quasihyperbolic metric
//! `k(x, y) = inf ∫ ds / d(z)`. On top of the graph the crate measures
//! Gromov hyperbolicity, the Gehring–Hayman and ball-separation constants,
//! builds the exponential conformal deformation with its Whitney covering,
//! and checks the explicit inequalities that tie these objects together.

pub mod conditions;
pub mod corpus;
pub mod deformation;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod hyperbolicity;
pub mod paths;
pub mod report;
pub mod run;
pub mod sampling;
pub mod whitney;

pub use corpus::corpus;
pub use domain::{load_domain, DomainSpec};
pub use error::{Error, Result};
pub use geometry::Point;
pub use graph::{discretize, MetricGraph, WeightKind};
pub use paths::{distance_field, inner_distance, qh_distance, shortest_path, GeodesicPath, Weighting};
