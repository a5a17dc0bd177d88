//! Computation, optimization, and verification of nonlocal-event
//! probabilities in two high-dimensional extensions of Hardy's paradox.
//!
//! - [`matcore`]: small dense complex matrices, Gram-Schmidt with rank
//!   handling, and the linear solves the constructions need.
//! - [`hardy`]: the two paradox scenarios — constraint patterns, measurement
//!   setting construction, probability tables, and the analytic bound
//!   (5√5 − 11)/2.
//! - [`optim`]: multi-start Nelder-Mead maximization over constraint-pattern
//!   embeddings, dimension scans, and standard-form certification.
//! - [`oracle`]: brute-force grid and sampling baselines independent of the
//!   optimizer.
//! - [`cli`]: the `hardy` command-line tool.

pub mod cli;
pub mod hardy;
pub mod matcore;
pub mod optim;
pub mod oracle;
