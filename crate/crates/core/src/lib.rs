//! Desk-scale benchmark for motion-based demonstration collection.
//!
//! The crate bundles a planar pick-and-place world, kinematic motion
//! augmentation, a scripted expert, budget-matched dataset generation under
//! static / ADC / MOVE collection, a small diffusion policy trained from
//! scratch, and grid evaluation of spatial generalization.

pub mod cli;
pub mod config;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod expert;
pub mod geom;
pub mod nn;
pub mod motion;
pub mod policy;
pub mod rng;
pub mod world;

pub use error::{Error, Result};
