//! Simulation of surface-wave channels on liquid-metal punctured surfaces.
//!
//! The crate is organised as a pipeline:
//!
//! - [`medium`]: closed-form surface physics (porosity, effective
//!   permittivity, skin depth, surface reactance, TM surface-wave estimate).
//! - [`geometry`]: cavity lattice, channel fill patterns, rasterization.
//! - [`solver`]: 2D TM FDTD with conductive media and a convolutional PML.
//! - [`analysis`]: dB maps, inside/outside isolation, path-loss curves.
//! - [`config`] and [`pipeline`]: scenario files, presets and end-to-end runs.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
mod error;
pub mod geometry;
pub mod medium;
pub mod pipeline;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{
    channel_layout, rasterize, BackgroundIndex, ChannelScenario, FillPattern, MaterialGrid,
    RasterOptions, SourceSpec,
};
pub use medium::{MediumReport, PhysicalConstants, SurfaceSpec, TmWaveParams};
pub use solver::{FieldMap, SolverConfig};
