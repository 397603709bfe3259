//! One-dimensional analysis of radial fronts: the heteroclinic profile, the
//! constants governing large-step BE and Eyre front motion, the leading-order
//! radius iterations and radius extraction from 2D fields.

mod constants;
mod extract;
mod iterations;
mod profile;

pub use constants::{balance_parameter, compute_constants, compute_constants_weighted, RadialConstants, RadialWeight};
pub use extract::{extract_radius, profile_deviation, ray_samples};
pub use iterations::{iteration_count, radius_iteration_be, radius_iteration_eyre};
pub use profile::{compute_profile, compute_profile_with, Profile1D, DEFAULT_HALF_WIDTH, DEFAULT_SPACING};

#[cfg(test)]
mod tests;
