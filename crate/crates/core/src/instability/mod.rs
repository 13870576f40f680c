//! Instability probes for reconstruction maps: Lipschitz lower bounds,
//! false positive and negative witnesses, adversarial search, Monte Carlo
//! event probabilities and the perturbations used to destabilize trained maps.

mod attack;
mod lipschitz;
mod map;
mod mc;
mod noise;
mod report;
mod witness;

pub use attack::{adversarial_search, AttackConfig, AttackResult};
pub use lipschitz::{
    empirical_lipschitz, lipschitz_lower_bound, LipschitzEstimate, LipschitzProbe,
};
pub(crate) use map::check_input;
pub use map::{
    check_vjp, BestEffortDecoder, CsDecoder, FnMap, LinearMap, Metric, ReconstructionMap,
};
pub use mc::{mc_instability_probability, wilson, Estimate, McConfig, McReport};
pub use noise::{nullspace_perp_noise, tumor_signal, Tumor, TumorMode, TumorParams};
pub use report::ProbeReport;
pub use witness::{
    ball_certificate, consistency_residual, destabilizing_pair, falsewitness,
    overperformance_domain, BallCertificate, DestabilizingPair, FalseWitness,
    OverperformanceDomain, WitnessCheck,
};
