//! Solutions of the boundary recursion: uniqueness when `|q|_p = 1`, and
//! explicit periodic solutions for `k = 1, 2` when `p | q`.

mod phase;
pub mod theta_poly;
mod zform;

pub use phase::{
    classify_phase, period2_k2_analysis, solve_k1_bipartite, translation_invariant_cubic,
    witness_field, PhaseReport, Verdict, Witness,
};
pub use zform::{
    f_map_z, f_map_z_direct, h_to_hprime, homogeneous_step, hprime_to_h, recursion_backward,
    uniqueness_certificate, vertex_step, EdgeFactor, LevelValuations, RecursionOutcome, ThetaValue,
    UniquenessCertificate, ZVector,
};
