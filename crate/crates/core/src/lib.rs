//! Bayesian nonparametric process toolkit.
//!
//! Gaussian Process conditioning, the Chinese restaurant process, the
//! Beta-Bernoulli / Indian buffet machinery with exact left-ordered-form
//! class probabilities, and two topic models (LDA and the focused topic
//! model) with a corpus-ingestion and held-out-perplexity harness.
//!
//! Every stochastic operation draws from an explicit [`RngStream`];
//! identical `(seed, stream_id)` pairs reproduce results bit-for-bit.

pub mod corpus;
pub mod crp;
pub mod enumerate;
pub mod error;
pub mod gp;
pub mod ibp;
pub mod logprob;
pub mod rng;
pub mod topics;

pub use error::{Error, Result};
pub use logprob::LogProb;
pub use rng::RngStream;
