//! Bayesian equivalents of mesh paths: Noisy-OR and Noisy-Integer-Addition
//! gates, exact inference by variable elimination and a likelihood-weighting
//! fallback.

mod build;
mod cpd;
mod factor;
mod infer;
mod net;

pub use build::{
    build_delivery_bn, build_pathcount_bn, delivery_belief, delivery_belief_with, group_dag,
    group_delivery,
};
pub use cpd::{noisy_int_add, noisy_or, Cpd, StateSpace};
pub use infer::{infer, infer_with, Belief, Fallback, InferenceMethod, InferenceOptions};
pub use net::{BayesNet, BayesNode, NetDump, NodeDump};
