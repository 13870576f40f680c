//! Optimality constants on finite domains, Hausdorff distances, fibers of the
//! measurement map, and self-verifying demonstrations built from them.

mod demos;
mod domain;
mod report;

pub use demos::{
    demo_not_optimal, destabilize_demo, dl_vs_cs_demo, lambda_sensitivity_demo, DestabilizeConfig,
    DlVsCsConfig, LambdaConfig,
};
pub use domain::{
    fibers, hausdorff, optimality_constant, Codomain, FiberPartition, FiniteDomain,
    OptimalityResult, FIBER_TOL, MAX_EXACT_DOMAIN,
};
pub use report::{Claim, ClaimOutcome, DemoReport, Rel, Table};
