//! Baseline characterization, threshold detection, severity grading and
//! critical-node localization.

mod baseline;
mod critical;
mod detect;
mod observe;
mod pdr;

pub use baseline::{
    characterize_baseline, characterize_sources, BaselineOptions, BaselineProfile, SourceBaseline,
    DEFAULT_K_SIGMA, DEFAULT_MAX_HOPS, DEFAULT_SENSITIVITY_MS,
};
pub use critical::{build_critical_node_map, localize, CriticalNodeMap, CriticalPair, RelayShift};
pub use detect::{
    classify, detect, severity_grade, AnomalyReport, Observation, Severity, SourceObservation,
    SourceVerdict, Trigger,
};
pub use observe::{read_observations_csv, simulate_observation, write_observations_csv};
pub use pdr::{
    compute_pdr, resolve_fractions, trial_pdr, validate_fractions, HopPdr, KFractions, PdrEstimate,
};
