pub mod arith;
pub mod arrangement;
pub mod error;
pub mod ford;
pub mod groups;
pub mod json;
pub mod moebius;
pub mod render;
pub mod words;

pub use arith::{
    dist_sq, lattice_points_within, nearest_lattice_points, rat, Discriminant, KElem, OInt,
    PlanePoint, Rat,
};
pub use error::{Error, Result};
pub use moebius::{Boundary, Hemisphere, Mat, Point, Side};
pub use words::{
    membership, membership_with_stats, normal_form, parse_oint, product_identity_check,
    random_pe2_word, zeta_chain, Letter, MembershipResult, NonMemberWitness, SearchStats,
    StandardForm, Word,
};
