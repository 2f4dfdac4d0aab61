//! Supervised quantization of mixed continuous/categorical features learned
//! jointly with a logistic regression scorecard.
//!
//! The central routine is [`trainer::train`]: it relaxes each feature's hard
//! quantization into a softmax over candidate levels, ascends the relaxed
//! log-likelihood with minibatch RMSProp, and after every epoch hardens the
//! relaxation into interval cutpoints / level groupings, refits an exact
//! logistic MLE on the hardened design, and scores it with BIC. The epoch with
//! the smallest BIC wins.
//!
//! Supporting modules supply the data layer ([`data`]), hard quantizers
//! ([`quantization`]), the softmax relaxation ([`soft`]), the logistic MLE
//! ([`glm`]), classical baselines ([`baselines`]), evaluation and simulation
//! harnesses ([`evaluation`]), and a serializable scorecard model ([`model`]).

pub mod baselines;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod glm;
pub mod model;
pub mod quantization;
pub mod soft;
pub mod trainer;

mod numeric;

pub use error::{Error, Result};
