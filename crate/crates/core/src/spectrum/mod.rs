//! Entropy estimates, subsum sets and the entropy-spectrum planner.

mod entropy;
mod plan;
mod subsum;

pub use entropy::{
    conv_power_entropy, furstenberg_entropy, shannon, FurstenbergEstimate, PowerEntropy, PowerEntropyReport,
};
pub use plan::{
    plan_spectrum, sigma_k_measure, spectrum_value, tau_beta_truncate, PlanSummary, ProductMeasure, SpectrumPlan,
    SpectrumTable, SpectrumValue, MAX_PRODUCT_SUPPORT,
};
pub use subsum::{
    subsum_classify, subsum_enumerate, subsum_member, BetaSeq, Classification, Membership, SubsumReport, SubsumSet,
    MAX_ENUMERATION,
};
