//! Convex and star bodies attached to log-concave functions.

pub mod construct;
pub mod directions;
pub mod metrics;
pub mod star;

pub use construct::{ball_body, level_set_body};
pub use directions::DirectionSet;
pub use metrics::{
    geometric_distance, inclusion_factor, mean_width_functionals, unit_ball_volume, volume, volume_radius,
    MeanWidths,
};
pub use star::{PBall, RadialBody, StarBody, SupportBody};
