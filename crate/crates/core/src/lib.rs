//! Achievable-rate and decoding-complexity bounds for LDPC ensembles over
//! parallel memoryless binary-input output-symmetric channels, with
//! punctured-code variants, threshold searches and a quantized density
//! evolution engine.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the crate
//! root re-exports `f64` aliases for the common case.

pub mod channels;
pub mod complexity_bounds;
pub mod degree_distributions;
pub mod density_evolution;
pub mod error;
pub mod io;
pub mod quadrature;
pub mod puncturing;
pub mod rate_bounds;
pub mod scalar;
pub mod table;
pub mod thresholds;

pub use channels::{BoundResult, ChannelKind};
pub use complexity_bounds::BoundVariant;
pub use degree_distributions::{Perspective, Side};
pub use density_evolution::{DeConfig, DeOutcome};
pub use error::{Error, Result};
pub use rate_bounds::SeriesConfig;
pub use scalar::Real;
pub use table::TableOptions;
pub use thresholds::{ChannelFamily, ThresholdKind};

pub type DegreePolynomial = degree_distributions::DegreePolynomial<f64>;
pub type EnsembleSpec = degree_distributions::EnsembleSpec<f64>;
pub type ChannelModel = channels::ChannelModel<f64>;
pub type ParallelEntry = rate_bounds::ParallelEntry<f64>;
pub type ParallelAssignment = rate_bounds::ParallelAssignment<f64>;
pub type PuncturingPattern = puncturing::PuncturingPattern<f64>;
pub type ComplexityBound = complexity_bounds::ComplexityBound<f64>;
pub type ThresholdResult = thresholds::ThresholdResult<f64>;
pub type QuantizedDensity = density_evolution::QuantizedDensity<f64>;
pub type DensityEvolution = density_evolution::DensityEvolution<f64>;
pub type TableRow = table::TableRow<f64>;
