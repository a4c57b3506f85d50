//! Numerical laboratory for Ricci-de Turck flow on cone singular manifolds.
//!
//! The crate is organized around the radial model of an exact cone
//! `(0, x_max] x F` with fibre dimension `f`:
//!
//! - [`specfun`]: modified Bessel functions of real order and first zeros of `J_nu`,
//! - [`spectra`]: cross-section spectral tables and the tangential stability audits,
//! - [`indicial`]: heat-kernel index sets, minimal exponents and Holder windows,
//! - [`modeheat`]: exact per-mode heat kernels of the model operator and grid propagators,
//! - [`geometry`]: warped cone metrics, curvature, conformal rule, de Turck field,
//! - [`flow`]: the linearized flow system with Duhamel/Picard iteration and decay diagnostics,
//! - [`meanvalue`]: mean-value and Holder-quotient verification utilities.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod indicial;
pub mod meanvalue;
pub mod modeheat;
pub mod numeric;
pub mod specfun;
pub mod spectra;

pub use error::{EdgeflowError, Result};
pub use flow::{FlowConfig, FlowMode, FlowReport, FlowSolver, PerturbationState};
pub use geometry::{ConeMetric, CurvatureTensors, RegularityReport};
pub use grid::RadialGrid;
pub use indicial::{HolderWindow, IndicialProfile};
pub use modeheat::{ModeKernelSpec, WeightedMode};
pub use spectra::{SpectrumKind, SpectrumTable, StabilityReport, Verdict};
