//! Ground-state van der Waals potentials of an atom in planar
//! magnetodielectric multilayers.
//!
//! Everything is expressed in reduced units: ħ = c = ε₀ = μ₀ = 1 and
//! frequencies in units of a reference frequency (usually the first atomic
//! transition), so lengths are in c/ω_ref and energies in ħω_ref.
//! Response functions are evaluated on the imaginary frequency axis ω = iu,
//! where they are real and positive.

pub mod asymptotics;
pub mod error;
pub mod materials;
pub mod perturbation;
pub mod potential;
pub mod quadrature;
pub mod search;
pub mod stack;

pub use asymptotics::{AsymptoticCoeffs, Coefficient, PlateKind, Regime, ThickCoeffs, ThinCoeffs, WallEstimate, WallReport};
pub use error::{Error, Result};
pub use materials::{AtomModel, MaterialModel, MirrorKind, Resonance, Response, StaticSummary, Transition};
pub use quadrature::{IntegralResult, QuadratureSpec, SubstitutionMode};
pub use stack::{Layer, LayerStack, ReflectionSet, Side, Thickness};
pub use perturbation::{AdditivityReport, Channel, ExpansionGeometry, ExpansionTerm};
pub use potential::{Geometry, PotentialResult};
