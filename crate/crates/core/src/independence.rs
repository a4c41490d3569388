//! Necessary and sufficient conditions for subgroup independence, the
//! exhaustive endomorphism-pair oracle, and related diagnostics.
//!
//! Every check is a pure function of a [`SubgroupPair`]. A decisive outcome
//! always carries a [`Witness`] that [`Witness::recheck`] can confirm
//! against the pair. Where a check reports a single offending element or
//! pair, it is the least one in canonical order.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Budget, GroupError};
use crate::group::{conjugacy_classes, normal_closure, quotient, FiniteGroup};
use crate::hom::{enumerate_endomorphisms, extend, ExtensionConflict, ExtensionResult, GroupMap};
use crate::iso::is_isomorphic;
use crate::pair::SubgroupPair;
use crate::perm::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ProvesDependent,
    ProvesIndependent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn group(self, pair: &SubgroupPair) -> &Arc<FiniteGroup> {
        match self {
            Side::A => pair.a(),
            Side::B => pair.b(),
        }
    }

    fn normal_closure(self, pair: &SubgroupPair) -> Result<&Arc<FiniteGroup>, GroupError> {
        match self {
            Side::A => pair.ncl_a(),
            Side::B => pair.ncl_b(),
        }
    }
}

/// Evidence behind a decisive outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A non-identity element of `A ∩ B`.
    SharedElement { element: Permutation },
    /// Every element of `A` commutes with every element of `B`, and
    /// `A ∩ B = {e}`.
    AllCommute { pairs_checked: usize },
    /// `|a|` or `|b|` fails to divide `|ab|`.
    OrderViolation {
        a: Permutation,
        b: Permutation,
        product: Permutation,
        order_a: u64,
        order_b: u64,
        order_product: u64,
    },
    /// Both subgroups are normal in the join and `A ∩ B = {e}`.
    BothNormal,
    /// `normal_side` is normal in the join; the other side is not, as shown
    /// by `conjugator · element · conjugator⁻¹ = conjugate` leaving it.
    OneSideNormal {
        normal_side: Side,
        conjugator: Permutation,
        element: Permutation,
        conjugate: Permutation,
    },
    /// `element ≠ e` lies in `side` and in the normal closure of the other
    /// side.
    NotSeparated { side: Side, element: Permutation },
    /// `first` and `second` lie in `side` and are not conjugate there, but
    /// `conjugator · second · conjugator⁻¹ = first` in the join.
    ConjugacyMerge {
        side: Side,
        first: Permutation,
        second: Permutation,
        conjugator: Permutation,
    },
    /// An endomorphism pair with no common extension to the join.
    IncompatiblePair {
        alpha: GroupMap,
        beta: GroupMap,
        conflict: ExtensionConflict,
    },
    /// Every endomorphism pair extends.
    AllPairsCompatible {
        endo_a: usize,
        endo_b: usize,
        pairs_checked: usize,
        pairs_skipped: usize,
    },
    /// A work limit stopped the computation.
    BudgetExceeded { budget: Budget, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl CheckOutcome {
    pub fn dependent(w: Witness) -> Self {
        Self {
            verdict: Verdict::ProvesDependent,
            witness: Some(w),
        }
    }

    pub fn independent(w: Witness) -> Self {
        Self {
            verdict: Verdict::ProvesIndependent,
            witness: Some(w),
        }
    }

    pub fn inconclusive() -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            witness: None,
        }
    }

    pub fn is_decisive(&self) -> bool {
        self.verdict != Verdict::Inconclusive
    }
}

/// Step 1: a non-identity element of `A ∩ B` proves dependence.
pub fn check_almost_disjoint(pair: &SubgroupPair) -> CheckOutcome {
    let meet = pair.intersection();
    match meet.elements().get(1) {
        Some(x) => CheckOutcome::dependent(Witness::SharedElement { element: x.clone() }),
        None => CheckOutcome::inconclusive(),
    }
}

fn non_identity(g: &FiniteGroup) -> &[Permutation] {
    &g.elements()[1..]
}

/// Non-commuting `(a, b)` in canonical order, `a` outer.
fn noncommuting_pairs(pair: &SubgroupPair) -> impl Iterator<Item = (&Permutation, &Permutation)> {
    let b = non_identity(pair.b());
    non_identity(pair.a())
        .iter()
        .flat_map(move |x| b.iter().map(move |y| (x, y)))
        .filter(|(x, y)| !x.commutes_with(y))
}

/// Result of the commuting check, with the first non-commuting pair kept for
/// the order check that follows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutingReport {
    pub outcome: CheckOutcome,
    pub first_noncommuting: Option<(Permutation, Permutation)>,
}

/// Step 2(i): if `A ∩ B = {e}` and every `a ∈ A` commutes with every
/// `b ∈ B`, the pair is independent. Inconclusive when the intersection is
/// nontrivial, since the theorem needs almost disjointness.
pub fn check_commuting(pair: &SubgroupPair) -> CommutingReport {
    let first = noncommuting_pairs(pair)
        .next()
        .map(|(a, b)| (a.clone(), b.clone()));
    let outcome = if first.is_none() && pair.intersection().is_trivial() {
        CheckOutcome::independent(Witness::AllCommute {
            pairs_checked: pair.a().order() * pair.b().order(),
        })
    } else {
        CheckOutcome::inconclusive()
    };
    CommutingReport {
        outcome,
        first_noncommuting: first,
    }
}

/// The order test on one pair: dependent when `|a| ∤ |ab|` or `|b| ∤ |ab|`.
pub fn order_violation(a: &Permutation, b: &Permutation) -> Option<Witness> {
    let product = a * b;
    let (oa, ob, op) = (a.order(), b.order(), product.order());
    (op % oa != 0 || op % ob != 0).then(|| Witness::OrderViolation {
        a: a.clone(),
        b: b.clone(),
        product,
        order_a: oa,
        order_b: ob,
        order_product: op,
    })
}

/// Step 2(ii) over the supplied pairs: the first order violation proves
/// dependence.
pub fn check_order_divisibility<'p>(
    pairs: impl IntoIterator<Item = (&'p Permutation, &'p Permutation)>,
) -> CheckOutcome {
    pairs
        .into_iter()
        .find_map(|(a, b)| order_violation(a, b))
        .map_or_else(CheckOutcome::inconclusive, CheckOutcome::dependent)
}

/// Step 2(ii) over every non-commuting pair of the subgroups.
pub fn check_order_divisibility_pair(pair: &SubgroupPair) -> CheckOutcome {
    check_order_divisibility(noncommuting_pairs(pair))
}

/// Exactly one side normal in the join proves dependence; both normal with
/// `A ∩ B = {e}` proves independence.
pub fn check_normal_asymmetry(pair: &SubgroupPair) -> Result<CheckOutcome, GroupError> {
    let join = pair.join()?;
    let a_normal = pair.a().is_normal_in(join);
    let b_normal = pair.b().is_normal_in(join);
    Ok(match (a_normal, b_normal) {
        (true, true) if pair.intersection().is_trivial() => {
            CheckOutcome::independent(Witness::BothNormal)
        }
        (true, false) | (false, true) => {
            let normal_side = if a_normal { Side::A } else { Side::B };
            let other = normal_side.other().group(pair);
            let (conjugator, element, conjugate) = join
                .generators()
                .iter()
                .flat_map(|g| other.generators().iter().map(move |h| (g, h)))
                .find_map(|(g, h)| {
                    let c = &(g * h) * &g.inverse();
                    (!other.contains(&c)).then(|| (g.clone(), h.clone(), c))
                })
                .expect("a non-normal subgroup has a generator conjugate outside it");
            CheckOutcome::dependent(Witness::OneSideNormal {
                normal_side,
                conjugator,
                element,
                conjugate,
            })
        }
        _ => CheckOutcome::inconclusive(),
    })
}

/// Tests whether `side` is separated from the other side, i.e. whether
/// `side ∩ ⟨Conj(other)⟩ = {e}`. A failure proves dependence.
pub fn check_side_separated(pair: &SubgroupPair, side: Side) -> Result<CheckOutcome, GroupError> {
    let ncl = side.other().normal_closure(pair)?;
    Ok(non_identity(side.group(pair))
        .iter()
        .find(|x| ncl.contains(x))
        .map_or_else(CheckOutcome::inconclusive, |x| {
            CheckOutcome::dependent(Witness::NotSeparated {
                side,
                element: x.clone(),
            })
        }))
}

/// Both separation conditions, `A` side first. Passing both never proves
/// independence on its own.
pub fn check_separated(pair: &SubgroupPair) -> Result<CheckOutcome, GroupError> {
    let a = check_side_separated(pair, Side::A)?;
    if a.is_decisive() {
        return Ok(a);
    }
    check_side_separated(pair, Side::B)
}

/// Looks for two elements of `side` that are not conjugate there but become
/// conjugate in the join.
pub fn check_side_conjugacy_merge(
    pair: &SubgroupPair,
    side: Side,
) -> Result<CheckOutcome, GroupError> {
    let join = pair.join()?;
    let sub = side.group(pair);
    let local = conjugacy_classes(sub);
    let global = conjugacy_classes(join);
    let join_class: Vec<usize> = sub
        .elements()
        .iter()
        .map(|x| global.class_of(x).expect("subgroup of the join"))
        .collect();
    for i in 0..sub.order() {
        let partner = (0..sub.order()).find(|&j| {
            join_class[j] == join_class[i] && local.class_of_index(j) != local.class_of_index(i)
        });
        if let Some(j) = partner {
            let first = sub.elements()[i].clone();
            let second = sub.elements()[j].clone();
            let conjugator = join
                .elements()
                .iter()
                .find(|z| (&(*z * &second) * &z.inverse()) == first)
                .expect("conjugate in the join")
                .clone();
            return Ok(CheckOutcome::dependent(Witness::ConjugacyMerge {
                side,
                first,
                second,
                conjugator,
            }));
        }
    }
    Ok(CheckOutcome::inconclusive())
}

/// Conjugacy merges on side `A`, then side `B`.
pub fn check_conjugacy_merge(pair: &SubgroupPair) -> Result<CheckOutcome, GroupError> {
    let a = check_side_conjugacy_merge(pair, Side::A)?;
    if a.is_decisive() {
        return Ok(a);
    }
    check_side_conjugacy_merge(pair, Side::B)
}

/// Options for the exhaustive oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub endo_budget: usize,
    /// Skip `(id, id)` and `(triv, triv)`, which always extend, and
    /// `(id, triv)` / `(triv, id)` when the matching separation holds.
    pub use_shortcuts: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            endo_budget: 256,
            use_shortcuts: true,
        }
    }
}

/// Decides independence by trying every endomorphism pair. A budget trip
/// yields an inconclusive outcome naming the budget.
pub fn brute_force_independent(pair: &SubgroupPair, opts: OracleOptions) -> CheckOutcome {
    let run = || -> Result<CheckOutcome, GroupError> {
        let ea = enumerate_endomorphisms(pair.a(), opts.endo_budget)?;
        let eb = enumerate_endomorphisms(pair.b(), opts.endo_budget)?;
        brute_force_with(pair, &ea, &eb, opts.use_shortcuts)
    };
    run().unwrap_or_else(|e| match e {
        GroupError::BudgetExceeded { budget, limit } => CheckOutcome {
            verdict: Verdict::Inconclusive,
            witness: Some(Witness::BudgetExceeded { budget, limit }),
        },
        other => panic!("oracle failed on a well-formed pair: {other}"),
    })
}

/// The oracle over precomputed endomorphism lists. Pairs are visited with
/// `α` outer and `β` inner in list order; the first incompatible pair is
/// reported no matter how the work is split across threads.
pub fn brute_force_with(
    pair: &SubgroupPair,
    endo_a: &[GroupMap],
    endo_b: &[GroupMap],
    use_shortcuts: bool,
) -> Result<CheckOutcome, GroupError> {
    pair.join()?;
    let (a_sep, b_sep) = if use_shortcuts {
        (
            !check_side_separated(pair, Side::A)?.is_decisive(),
            !check_side_separated(pair, Side::B)?.is_decisive(),
        )
    } else {
        (false, false)
    };
    let skip = |alpha: &GroupMap, beta: &GroupMap| {
        use_shortcuts
            && ((alpha.is_identity() && beta.is_identity())
                || (alpha.is_trivial() && beta.is_trivial())
                || (a_sep && alpha.is_identity() && beta.is_trivial())
                || (b_sep && alpha.is_trivial() && beta.is_identity()))
    };
    let nb = endo_b.len();
    let total = endo_a.len() * nb;
    let first_failure = (0..total).into_par_iter().find_map_first(|k| {
        let (alpha, beta) = (&endo_a[k / nb], &endo_b[k % nb]);
        if skip(alpha, beta) {
            return None;
        }
        match extend(alpha, beta, pair) {
            Ok(ExtensionResult::Exists(_)) => None,
            Ok(ExtensionResult::Fails(conflict)) => Some(Ok(Witness::IncompatiblePair {
                alpha: alpha.clone(),
                beta: beta.clone(),
                conflict,
            })),
            Err(e) => Some(Err(e)),
        }
    });
    match first_failure {
        Some(w) => Ok(CheckOutcome::dependent(w?)),
        None => {
            let skipped = endo_a
                .iter()
                .flat_map(|a| endo_b.iter().map(move |b| (a, b)))
                .filter(|(a, b)| skip(a, b))
                .count();
            Ok(CheckOutcome::independent(Witness::AllPairsCompatible {
                endo_a: endo_a.len(),
                endo_b: nb,
                pairs_checked: total - skipped,
                pairs_skipped: skipped,
            }))
        }
    }
}

/// A pair `(a, b)` is separated when `a = e` or `a ∉ ⟨Conj({b})⟩`, and
/// `b = e` or `b ∉ ⟨Conj({a})⟩`, normal closures taken in `join`.
pub fn is_separated_pair(
    a: &Permutation,
    b: &Permutation,
    join: &FiniteGroup,
) -> Result<bool, GroupError> {
    let ncl_of = |x: &Permutation| -> Result<FiniteGroup, GroupError> {
        let cyclic = FiniteGroup::closure(std::slice::from_ref(x), join.degree(), join.order())?;
        normal_closure(&cyclic, join)
    };
    let a_ok = a.is_identity() || !ncl_of(b)?.contains(a);
    let b_ok = b.is_identity() || !ncl_of(a)?.contains(b);
    Ok(a_ok && b_ok)
}

/// Which quotient isomorphisms hold for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactoringReport {
    /// `⟨A ∪ B⟩ / ⟨Conj(B)⟩ ≅ A`.
    pub a_side: bool,
    /// `⟨A ∪ B⟩ / ⟨Conj(A)⟩ ≅ B`.
    pub b_side: bool,
}

impl FactoringReport {
    pub fn holds(&self) -> bool {
        self.a_side && self.b_side
    }
}

/// Tests `join / ⟨Conj(B)⟩ ≅ A` and `join / ⟨Conj(A)⟩ ≅ B`. Diagnostic only.
pub fn verify_factoring(
    pair: &SubgroupPair,
    iso_budget: usize,
) -> Result<FactoringReport, GroupError> {
    let join = pair.join()?;
    let side = |ncl: &FiniteGroup, target: &Arc<FiniteGroup>| -> Result<bool, GroupError> {
        let q = Arc::new(quotient(join, ncl)?.to_permutation_group());
        Ok(is_isomorphic(&q, target, iso_budget)?.is_some())
    };
    Ok(FactoringReport {
        a_side: side(pair.ncl_b()?, pair.a())?,
        b_side: side(pair.ncl_a()?, pair.b())?,
    })
}

/// `true` iff no member of `set` lies in the subgroup generated by the other
/// members. The identity is the empty product, so any set containing it is
/// not independent.
pub fn is_independent_set(set: &[Permutation], group: &FiniteGroup) -> bool {
    let mut members: Vec<Permutation> = set.to_vec();
    members.sort();
    members.dedup();
    (0..members.len()).all(|i| {
        let others: Vec<Permutation> = members
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x.clone())
            .collect();
        let span = FiniteGroup::closure(&others, group.degree(), usize::MAX).expect("unbounded");
        !span.contains(&members[i])
    })
}

/// `A' ∪ B'` is an independent set of the join. For an independent pair and
/// independent `A' ⊆ A`, `B' ⊆ B` this must hold.
pub fn check_union_independent_sets(
    pair: &SubgroupPair,
    a_subset: &[Permutation],
    b_subset: &[Permutation],
) -> Result<bool, GroupError> {
    let join = pair.join()?;
    let union: Vec<Permutation> = a_subset.iter().chain(b_subset).cloned().collect();
    Ok(is_independent_set(&union, join))
}

impl Witness {
    /// Re-evaluates the predicate this witness cites.
    pub fn recheck(&self, pair: &SubgroupPair) -> Result<bool, GroupError> {
        Ok(match self {
            Witness::SharedElement { element } => {
                !element.is_identity() && pair.a().contains(element) && pair.b().contains(element)
            }
            Witness::AllCommute { .. } => {
                pair.intersection().is_trivial() && noncommuting_pairs(pair).next().is_none()
            }
            Witness::OrderViolation { a, b, .. } => {
                pair.a().contains(a)
                    && pair.b().contains(b)
                    && order_violation(a, b).as_ref() == Some(self)
            }
            Witness::BothNormal => {
                let join = pair.join()?;
                pair.intersection().is_trivial()
                    && pair.a().is_normal_in(join)
                    && pair.b().is_normal_in(join)
            }
            Witness::OneSideNormal {
                normal_side,
                conjugator,
                element,
                conjugate,
            } => {
                let join = pair.join()?;
                let other = normal_side.other().group(pair);
                normal_side.group(pair).is_normal_in(join)
                    && join.contains(conjugator)
                    && other.contains(element)
                    && &(&(conjugator * element) * &conjugator.inverse()) == conjugate
                    && !other.contains(conjugate)
            }
            Witness::NotSeparated { side, element } => {
                !element.is_identity()
                    && side.group(pair).contains(element)
                    && side.other().normal_closure(pair)?.contains(element)
            }
            Witness::ConjugacyMerge {
                side,
                first,
                second,
                conjugator,
            } => {
                let sub = side.group(pair);
                let local = conjugacy_classes(sub);
                pair.join()?.contains(conjugator)
                    && sub.contains(first)
                    && sub.contains(second)
                    && !local.are_conjugate(first, second)
                    && &(&(conjugator * second) * &conjugator.inverse()) == first
            }
            Witness::IncompatiblePair { alpha, beta, .. } => {
                alpha.is_homomorphism()
                    && beta.is_homomorphism()
                    && !extend(alpha, beta, pair)?.exists()
            }
            Witness::AllPairsCompatible { .. } => {
                let opts = OracleOptions {
                    endo_budget: usize::MAX,
                    use_shortcuts: false,
                };
                brute_force_independent(pair, opts).verdict == Verdict::ProvesIndependent
            }
            Witness::BudgetExceeded { .. } => false,
        })
    }
}
