//! Quantum Fisher information of postselected compression channels.
//!
//! A spin-`j` system is pre- and postselected around a coupling to a qudit
//! meter; what survives postselection is a meter-only channel `K(lambda,
//! Theta)`. This crate evaluates the postselection probability, the total and
//! parallel channel changes and the resulting QFI decomposition, locates the
//! characteristic postselection phases, and cross-checks all of it against a
//! dense state-vector oracle.

// `!(x > floor)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod closed_form;
pub mod error;
pub mod experiments;
pub mod halfint;
pub mod landmarks;
pub mod meter;
pub mod optimize;
pub mod oracle;
pub mod par;
pub mod tolerance;
pub mod wigner;

pub use channel::{Channel, ChannelParams, EstimationBudget, QfiBreakdown};
pub use error::{Error, Result};
pub use halfint::HalfInt;
pub use meter::{ComplexExpectation, EigenLaw, MeterSpec};
pub use par::Execution;
