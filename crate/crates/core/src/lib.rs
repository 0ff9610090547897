//! Position-dependent-mass oscillators: mass profiles, the point canonical
//! map `q = ∫√m dx`, grid operators, spectra, residual checks and classical
//! trajectories.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, with `*32` variants for `f32`.

pub mod classical;
pub mod coord;
pub mod error;
pub mod expr;
pub mod func;
pub mod operators;
pub mod profiles;
pub mod quad;
pub mod scalar;
pub mod spectra;
pub mod verify;

pub use classical::{acceleration, integrate, DriftStudy, Trajectory, TrajectoryPoint};
pub use coord::{Axis, CoordinateMap, Grid, QRange};
pub use error::{Error, Result};
pub use expr::{Expression, Params};
pub use func::{BoundExpr, Interval, OriginSeries, SharedFn, UnivariateFn};
pub use operators::{GridOperator, OrderingParams, OscillatorConfig};
pub use profiles::{builtin, Builtin, DeformationProfile, Formulas, MassProfile, BUILTIN_NAMES};
pub use scalar::Real;
pub use spectra::{AnalyticState, Direction, Ladder, Spectrum};
pub use verify::{ResidualReport, Status, Suite};

pub type MassProfile64 = MassProfile<f64>;
pub type DeformationProfile64 = DeformationProfile<f64>;
pub type CoordinateMap64 = CoordinateMap<f64>;
pub type Grid64 = Grid<f64>;
pub type GridOperator64 = GridOperator<f64>;
pub type OscillatorConfig64 = OscillatorConfig<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Trajectory64 = Trajectory<f64>;

pub type MassProfile32 = MassProfile<f32>;
pub type DeformationProfile32 = DeformationProfile<f32>;
pub type CoordinateMap32 = CoordinateMap<f32>;
pub type Grid32 = Grid<f32>;
pub type GridOperator32 = GridOperator<f32>;
pub type OscillatorConfig32 = OscillatorConfig<f32>;
pub type Spectrum32 = Spectrum<f32>;
pub type Trajectory32 = Trajectory<f32>;
