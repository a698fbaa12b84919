//! Exterior energy of radial free waves: band-limited radial data, its
//! frequency-side evolution, the half-line operators behind the large-time
//! limits, and the numerical studies built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod halfline_ops;
pub mod io;
pub mod profiles;
pub mod quadrature;
pub mod radial_transform;
pub mod selftest;
pub mod specfun;
pub mod wave_engine;

pub use error::{Error, Result};
