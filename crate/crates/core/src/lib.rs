//! Modelling and design optimization for resonant-beam SWIPT links built on an
//! asymmetric spatially separated laser resonator.
//!
//! The crate is layered bottom-up:
//!
//! * [`optics`]: ABCD ray-transfer algebra, retroreflector matrices and
//!   resonator stability.
//! * [`beam`]: Gaussian q-parameter propagation and TEM00 mode radii along the
//!   cavity axis.
//! * [`power`]: intra-cavity power circulation with intra-cavity second
//!   harmonic generation and the received optical powers.
//! * [`receiver`]: photovoltaic maximum power point and photodetector rate.
//! * [`optimize`]: cavity structure search, lens placement, worst-case
//!   distance, functional parameter ascent and the power-rate boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod beam;
pub mod constants;
pub mod error;
pub mod optics;
pub mod optimize;
pub mod power;
pub mod receiver;

pub use beam::{BeamProfile, ModeSolution, QParameter};
pub use error::{Error, Result};
pub use optics::{CavityGeometry, RayMatrix, RayVector, StabilityReport};
pub use power::{FunctionalParams, LossTable, MaterialTable, PowerBreakdown};
pub use receiver::{PDParams, PVOperatingPoint, PVParams};
