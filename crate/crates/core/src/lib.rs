//! Time-encoded communication between frames in relative motion.
//!
//! A sender transmits symbols whose durations follow a maximum-entropy
//! (exponential) law. A receiver that misjudges the sender's speed rescales
//! every duration by `γ(v)/γ(v0)` and reconstructs a distorted law. This
//! crate quantifies the mismatch: KL divergence, velocity sensitivity,
//! information free energy and the speed at which decoding stops being
//! thermodynamically feasible, plus seeded Monte Carlo checks.

// `!(x > 0.0)` is used deliberately so NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod codebook;
pub mod config;
pub mod error;
pub mod infogeo;
pub mod numeric;
pub mod relativity;
pub mod simulate;
pub mod thermo;

pub use codebook::{figure_model, Codebook, EncodingModel, FigureModel, FigureSetup, SenderModel};
pub use config::ModelConfig;
pub use error::{Error, Result};
pub use infogeo::KldBreakdown;
pub use relativity::FrameContext;
pub use simulate::{SimulationConfig, SimulationReport};
pub use thermo::{FreeEnergyPoint, KldMode, Regime};
