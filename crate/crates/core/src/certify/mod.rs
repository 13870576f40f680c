//! Certificates for measurement operators: restricted isometry constants in
//! levels, a search for robust null space violations and kernel proximity.

mod ripl;
mod rnsp;

pub use ripl::{
    joint_support_count, ripl_constant, ripl_order_auto, RiplMode, RiplResult,
    MAX_EXHAUSTIVE_SUPPORTS,
};
pub use rnsp::{kernel_proximity, rip_to_rnsp, rnsp_falsify, rnsp_sides, RnspParams, RnspWitness};
