//! Logarithmic capacity of finite unions of segments and circular arcs.
//!
//! Two independent estimators are provided: the transfinite diameter (limit
//! of Fekete-point geometric means) and a discrete equilibrium measure
//! minimising the logarithmic energy. Every estimate is reported both as
//! `C = e^{-V}` (with `V` the Robin constant) and in the Wiener scale `1/V`.

mod density;
mod estimate;
mod fekete;
mod potential;
mod set;

pub use density::{density_ratio, is_log_thin, DensityRatio, ThinVerdict, ThinnessReport};
pub use estimate::{CapacityEstimate, Method};
pub use fekete::{
    extrapolate_diameters, fekete_points, fekete_points_with, log_vandermonde, transfinite_diameter,
    vandermonde_product, FeketeOptions, FeketeResult,
};
pub use potential::{
    capacity_via_potential, equilibrium_measure, log_potential, EquilibriumMeasure, MassDistribution,
};
pub(crate) use potential::minimise_energy;
pub use set::{Ambient, BoundedSet1D, Frame};
