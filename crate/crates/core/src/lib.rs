//! Simulation and fractal analysis of planar discrete dynamical systems in
//! polar normal form near a nonhyperbolic fixed point.
//!
//! The crate generates discrete spirals (orbits of polar maps) and continuous
//! spiral trajectories, estimates the area of their ε-neighbourhoods, fits a
//! box dimension from ε-ladders or grid box counts, analyses the inter-point
//! overlap sequences that govern how disks of the ε-neighbourhood merge, and
//! classifies a system into a bifurcation scenario with its exact predicted
//! orbit dimension.
//!
//! Modules follow the pipeline order:
//!
//! * [`normal_forms`] — polar maps, their iterates and inverses, unit-time
//!   maps of planar rotational flows;
//! * [`orbits`] — discrete spirals and sampled continuous spirals;
//! * [`neighborhood`] — |A_ε| and N(δ) raw data;
//! * [`dimension`] — box-dimension fits, Minkowski content proxies and the
//!   exact theoretical values per scenario;
//! * [`overlaps`] — y/z/w distance sequences, overlap onset indices, the
//!   rational/irrational ordering regime;
//! * [`center_manifold`] — reduction of planar maps with one unit-circle
//!   multiplier to a 1-D restriction, lifted orbits and their dimension;
//! * [`classification`] — rotation-number rationality, resonance gates and
//!   scenario classification reports.
//!
//! Everything is immutable after construction; all operations are pure
//! functions and safe to call concurrently. Monte Carlo estimators take an
//! explicit seed and are bit-reproducible.

// `!(x > 0.0)` rejects NaN along with nonpositive values; the positive
// form would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod center_manifold;
pub mod classification;
pub mod dimension;
mod error;
pub mod fit;
pub mod neighborhood;
pub mod normal_forms;
pub mod orbits;
pub mod overlaps;
pub mod rational;

pub use error::{Error, Result};
pub use normal_forms::{ContinuousHopfSystem, FlowMap, PolarNormalForm, PolarPoint};
pub use orbits::{ContinuousSpiralSample, DiscreteSpiral, StopReason};
