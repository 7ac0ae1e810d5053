//! Numerical probes: compactness-criterion measurements, decay fits,
//! counterexample families, continuity, operator-norm and weighted ratios.

pub mod batch;
pub mod compact;
pub mod continuity;
pub mod fit;
pub mod fkrt;
pub mod opnorm;
pub mod suite;
pub mod weighted;

pub use batch::{BatchConfig, Member};
pub use compact::{
    commutator_compactness_probe, commutator_split, mds_batch, oscillating_symbol_probe, pi_compactness_probe,
    sharp_maximal_ratio, shift_commutator_probe, shift_commutator_split, DecayOptions, DecayReport, MdsStats,
    OscillatingSymbolReport, SplitCheck,
};
pub use continuity::{continuity_probe, ContinuityOptions, ContinuityReport};
pub use fit::{DecayFit, FitStatus, FitTarget};
pub use fkrt::{fkrt_probe, noncompact_shift_probe, noncompact_t_probe, FkrtReport, FkrtThresholds, NoncompactReport};
pub use opnorm::{opnorm_lower_bound, OpnormReport};
pub use suite::run_suite;
pub use weighted::{weighted_ratio_probe, RatioStats, WeightedOptions, WeightedReport};
