//! Characteristic time operators of discrete semibounded Hamiltonians.
//!
//! Starting from a spectrum `E_s = ħ·ω·f(s)` the crate builds the time
//! operator `T = Σ_{s≠s'} i/ω_{s,s'} |s⟩⟨s'|`, the canonical domain on which
//! `[T, H]φ = iħφ`, the time-invariant set computed with exact rational gcds,
//! and the two-level projected clock that reads parametric time near that set.

pub mod canonical_domain;
pub mod cli;
pub mod clock;
pub mod dynamics;
pub mod error;
pub mod operators;
pub mod rational;
pub mod spectrum;
pub mod time_invariant;
pub mod verify;

pub use canonical_domain::{
    assemble, membership_test, normalized_pair_vector, pair_vector, CanonicalVector, Membership,
};
pub use clock::{ClockReading, MeasurementEnsemble, ProjectedClock, Resolution, TransitionReport};
pub use dynamics::{
    covariance_defect, evolve_state, expectation_t_closed, heisenberg_t, oracle_report, short_time_defect,
    variance_t_closed, EvolvedObservableReport,
};
pub use error::{Error, Result};
pub use operators::{
    build_hamiltonian, build_time_operator, ccr_residual, commutator, expectation, project_pair, variance,
    OperatorMatrix, StateVector, Tolerances,
};
pub use rational::{rational_gcd, Rational};
pub use spectrum::{Commensurability, ExtensionRule, Level, Spectrum};
pub use time_invariant::{decompose_time, gcd_stabilization, invariant_set, pair_set, TimeInvariantSet};
