//! Locating spin B relative to spin A from DEER frequencies measured at several
//! field settings, candidate diamond-lattice sites, and the Coulomb/Stark estimate.

mod dataset;
mod fit;
mod lattice;
mod stark;

pub use dataset::{predict_dataset, predict_value, DeerDataset, DeerEntry, Observable};
pub use fit::{fit_geometry, FitOptions, GeometryEstimate, GeometryFit};
pub use lattice::{enumerate_sites, LatticeSite, DIAMOND_LATTICE_CONSTANT};
pub use stark::{
    coulomb_field, coulomb_field_vector, perpendicular_component, stark_splitting, StarkAssessment,
    STARK_COEFFICIENT,
};
