//! Measuring how autoregressive sequence models distort the distribution
//! they are trained on.
//!
//! Ground-truth languages ([`lang`]) assign exact probabilities to every
//! sequence. Candidate models ([`learner`]) are trained on samples from
//! them, and [`eval`] compares the two sequence by sequence across the
//! probability range. [`perturb`] probes sequences away from the language's
//! high-probability region, [`lnre`] measures novelty in event streams, and
//! [`experiments`] wires everything into reproducible, CSV-emitting runs.

pub mod domain;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod lang;
pub mod learner;
pub mod lnre;
pub mod logspace;
pub mod model;
pub mod perturb;
pub mod rng;

pub use domain::{LogProb, Sequence, Space, Token, Vocabulary};
pub use error::{Error, Result};
pub use model::SequenceModel;
pub use rng::{SeededRng, Stream};
