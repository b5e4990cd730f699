pub mod anomaly;
pub mod bayes;
pub mod error;
pub mod hybrid;
pub mod latency;
pub mod plc;
pub mod topology;
mod units;

pub use error::{Error, Result};
pub use units::ms_or_inf;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/topology.md")]
    mod topology {}
    #[doc = include_str!("../../../book/src/bayes.md")]
    mod bayes {}
    #[doc = include_str!("../../../book/src/latency.md")]
    mod latency {}
    #[doc = include_str!("../../../book/src/plc.md")]
    mod plc {}
    #[doc = include_str!("../../../book/src/hybrid.md")]
    mod hybrid {}
    #[doc = include_str!("../../../book/src/anomaly.md")]
    mod anomaly {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
