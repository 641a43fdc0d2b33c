//! Verification suites, regularity profiles and report bundles.

pub mod bundle;
pub mod decomposition;
pub mod duality;
pub mod inclusion;
pub mod isotropy;
pub mod profile;
pub mod report;
pub mod transforms;
pub mod volume;
pub mod widths;
pub mod zoo;

pub use bundle::{run_all, Bundle, RunConfig, Suite};
pub use decomposition::run_decomposition_suite;
pub use duality::{run_duality_suite, DualityConfig};
pub use inclusion::run_inclusion_suite;
pub use isotropy::run_isotropization_suite;
pub use profile::{regularity_profile, ProfileConfig, RegularityProfile};
pub use report::{Case, Environment, SuiteReport};
pub use transforms::run_transform_suite;
pub use volume::run_volume_product_suite;
pub use widths::run_mean_width_suite;
