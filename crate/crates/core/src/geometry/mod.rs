//! Convex bodies in the trace-zero hyperplane, represented by support
//! functions on a fixed set of directions.

mod body;
mod directions;

pub use body::{
    asymptotic_cone, body_from_points, contains, hausdorff_distance, interior_margin, BodyJson,
    SupportAccumulator, SupportBody,
};
pub use directions::{
    default_resolution, hyperplane_basis, make_directions, min_resolution, weight_direction,
    DirectionSet,
};
