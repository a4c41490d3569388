//! Finite permutation groups and a certificate-producing decision procedure
//! for subgroup independence: two subgroups `A`, `B` of a common group are
//! independent when every pair of endomorphisms of `A` and `B` extends to an
//! endomorphism of the join `⟨A ∪ B⟩`.

pub mod atlas;
pub mod error;
pub mod group;
pub mod hom;
pub mod independence;
pub mod iso;
pub mod pair;
pub mod perm;
pub mod pipeline;

pub use error::{Budget, GroupError};
pub use group::{conjugacy_classes, intersection, join, normal_closure, quotient, FiniteGroup};
pub use hom::{
    enumerate_endomorphisms, extend, is_compatible, ExtensionConflict, ExtensionResult, GroupMap,
};
pub use independence::{brute_force_independent, CheckOutcome, Side, Verdict, Witness};
pub use iso::is_isomorphic;
pub use pair::SubgroupPair;
pub use perm::{PermError, Permutation};
pub use pipeline::{
    decide, format_decision, parse_pair_spec, Config, Decision, OutputFormat, Status, Step,
};
