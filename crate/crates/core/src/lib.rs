//! Exact, desk-scale machinery for seedless condensing from block sources.
//!
//! The crate covers three areas:
//!
//! * entropy bookkeeping over finite distributions ([`dist`]) and the
//!   binary-field kernels behind inner-product extraction ([`gf`]);
//! * adversarial source constructions showing that no function can condense
//!   (or extract from) certain NOSF / SHELA sources, each backed by an exact
//!   certificate ([`covering`], [`sources`], [`adversaries`]);
//! * two output-light seeded extractors and the wrapper that turns them into
//!   condensers for uniform (2,3)-SHELA sources ([`seeded`], [`condensers`]).
//!
//! [`harness`] ties these into reproducible audit reports, which the
//! `seedless` binary exposes on the command line.

pub mod adversaries;
pub mod bits;
pub mod check;
pub mod condensers;
pub mod covering;
pub mod dist;
pub mod error;
pub mod gf;
pub mod harness;
pub mod rng;
pub mod seeded;
pub mod sources;

pub use error::{Error, Result};
