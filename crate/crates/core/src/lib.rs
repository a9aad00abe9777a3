//! Tree-aware selective scanning over 2D feature grids.
//!
//! The crate builds a minimum spanning tree over a feature map using cosine
//! distances between neighbouring cells, then propagates a linear state
//! along that tree in two passes. Alongside the operator it provides a dense
//! reference solver, an analytic backward pass, fixed-order scan baselines,
//! depth-estimation metrics and losses, and the score-curation math used to
//! label depth maps from subjective ratings.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod baseline;
pub mod bench;
pub mod error;
pub mod feature;
pub mod io;
pub mod metrics;
pub mod mos;
pub mod real;
pub mod rng;
pub mod scan;
pub mod tree;

pub use error::{Error, Result};
pub use feature::{DepthMap, FeatureMap, NodeIndex};
pub use real::Real;
pub use scan::{ScanParams, ScanVariant};
pub use tree::{SpanningTree, WeightedEdge};

pub type FeatureMap64 = FeatureMap<f64>;
pub type FeatureMap32 = FeatureMap<f32>;
pub type DepthMap64 = DepthMap<f64>;
pub type DepthMap32 = DepthMap<f32>;
pub type ScanParams64 = ScanParams<f64>;
pub type ScanParams32 = ScanParams<f32>;
pub type WeightedEdge64 = WeightedEdge<f64>;
pub type WeightedEdge32 = WeightedEdge<f32>;
