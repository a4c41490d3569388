//! Homomorphisms between finite permutation groups as explicit tables,
//! endomorphism enumeration, and extension of endomorphism pairs to the join.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::{Budget, GroupError};
use crate::group::FiniteGroup;
use crate::pair::SubgroupPair;
use crate::perm::Permutation;

/// A homomorphism given by its full table: `table[i]` is the canonical index
/// in `codomain` of the image of `domain.elements()[i]`.
#[derive(Clone)]
pub struct GroupMap {
    domain: Arc<FiniteGroup>,
    codomain: Arc<FiniteGroup>,
    table: Vec<u32>,
}

impl std::fmt::Debug for GroupMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.pairs()).finish()
    }
}

impl PartialEq for GroupMap {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table
            && same_group(&self.domain, &other.domain)
            && same_group(&self.codomain, &other.codomain)
    }
}

impl Eq for GroupMap {}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a.elements() == b.elements()
}

impl GroupMap {
    /// `g ↦ g`.
    pub fn identity_map(group: Arc<FiniteGroup>) -> Self {
        let table = (0..group.order() as u32).collect();
        Self {
            codomain: group.clone(),
            domain: group,
            table,
        }
    }

    /// `g ↦ e`.
    pub fn trivial_map(group: Arc<FiniteGroup>) -> Self {
        let table = vec![0; group.order()];
        Self {
            codomain: group.clone(),
            domain: group,
            table,
        }
    }

    /// Builds a map from a table of images, one per domain element in
    /// canonical order. Fails if an image lies outside the codomain or the
    /// table does not respect products.
    pub fn from_images(
        domain: Arc<FiniteGroup>,
        codomain: Arc<FiniteGroup>,
        images: &[Permutation],
    ) -> Result<Self, GroupError> {
        if images.len() != domain.order() {
            return Err(GroupError::DomainMismatch);
        }
        let table = images
            .iter()
            .map(|y| codomain.index_of(y).map(|i| i as u32))
            .collect::<Option<Vec<u32>>>()
            .ok_or(GroupError::NotASubgroup)?;
        let map = Self {
            domain,
            codomain,
            table,
        };
        if !map.is_homomorphism() {
            return Err(GroupError::NotASubgroup);
        }
        Ok(map)
    }

    pub fn domain(&self) -> &Arc<FiniteGroup> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteGroup> {
        &self.codomain
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn apply(&self, x: &Permutation) -> Option<&Permutation> {
        self.domain
            .index_of(x)
            .map(|i| &self.codomain.elements()[self.table[i] as usize])
    }

    pub fn apply_index(&self, i: usize) -> &Permutation {
        &self.codomain.elements()[self.table[i] as usize]
    }

    /// `(element, image)` pairs in canonical domain order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Permutation, &Permutation)> {
        self.domain
            .elements()
            .iter()
            .zip(&self.table)
            .map(move |(x, &i)| (x, &self.codomain.elements()[i as usize]))
    }

    pub fn is_identity(&self) -> bool {
        same_group(&self.domain, &self.codomain)
            && self.table.iter().enumerate().all(|(i, &t)| i as u32 == t)
    }

    pub fn is_trivial(&self) -> bool {
        self.table.iter().all(|&t| t == 0)
    }

    /// Size of the image subgroup.
    pub fn image_order(&self) -> usize {
        let mut seen = vec![false; self.codomain.order()];
        self.table
            .iter()
            .filter(|&&t| !std::mem::replace(&mut seen[t as usize], true))
            .count()
    }

    pub fn is_bijective(&self) -> bool {
        self.domain.order() == self.codomain.order() && self.image_order() == self.domain.order()
    }

    /// Checks `f(xy) = f(x) f(y)` for every pair of domain elements.
    pub fn is_homomorphism(&self) -> bool {
        let els = self.domain.elements();
        els.iter().enumerate().all(|(i, x)| {
            let fx = self.apply_index(i);
            els.iter().enumerate().all(|(j, y)| {
                let xy = self.domain.index_of(&(x * y)).expect("closed");
                *self.apply_index(xy) == fx * self.apply_index(j)
            })
        })
    }

    /// Canonical ordering of endomorphisms: larger image first, then the
    /// table compared lexicographically in canonical element order. The
    /// identity therefore leads and the trivial map comes last.
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        other
            .image_order()
            .cmp(&self.image_order())
            .then_with(|| self.table.cmp(&other.table))
    }
}

impl Serialize for GroupMap {
    /// An object from element to image, both in cycle notation, keyed in
    /// canonical element order.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(self.table.len()))?;
        for (x, y) in self.pairs() {
            m.serialize_entry(&x.to_string(), &y.to_string())?;
        }
        m.end()
    }
}

/// Two different images forced onto one element while propagating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Clash {
    pub element: Permutation,
    pub first: Permutation,
    pub second: Permutation,
}

/// Propagates generator images over the Cayley graph of `domain`: starting
/// from `e ↦ e`, every edge `x → x·g` forces `f(x·g) = f(x)·f(g)`. All edges
/// are visited, so a clash-free result is a homomorphism on the subgroup
/// generated by `gens`. Unreached elements stay `None`.
pub(crate) fn propagate(
    domain: &FiniteGroup,
    gens: &[Permutation],
    images: &[Permutation],
    codomain_degree: usize,
) -> Result<Vec<Option<Permutation>>, Clash> {
    debug_assert_eq!(gens.len(), images.len());
    let mut assigned: Vec<Option<Permutation>> = vec![None; domain.order()];
    assigned[0] = Some(Permutation::identity(codomain_degree));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let x = &domain.elements()[i];
        let fx = assigned[i].clone().expect("queued elements are assigned");
        for (g, img) in gens.iter().zip(images) {
            let y = x * g;
            let j = domain.index_of(&y).expect("generators lie in the domain");
            let forced = &fx * img;
            match &assigned[j] {
                None => {
                    assigned[j] = Some(forced);
                    queue.push_back(j);
                }
                Some(prev) if *prev != forced => {
                    return Err(Clash {
                        element: y,
                        first: prev.clone(),
                        second: forced,
                    })
                }
                Some(_) => {}
            }
        }
    }
    Ok(assigned)
}

/// Every endomorphism of `group`, duplicate-free and in canonical order:
/// larger image first, then by table, so the identity leads and the trivial
/// map comes last.
///
/// Generator images are chosen for a greedy small generating set, each
/// candidate image having order dividing its generator's order. Partial
/// assignments are pruned by propagating over the subgroup generated so far.
pub fn enumerate_endomorphisms(
    group: &Arc<FiniteGroup>,
    budget: usize,
) -> Result<Vec<GroupMap>, GroupError> {
    if group.order() > budget {
        return Err(GroupError::BudgetExceeded {
            budget: Budget::EndoBudget,
            limit: budget,
        });
    }
    let gens = group.greedy_generators();
    if gens.is_empty() {
        return Ok(vec![GroupMap::identity_map(group.clone())]);
    }
    let orders = group.element_orders();
    let candidates: Vec<Vec<&Permutation>> = gens
        .iter()
        .map(|g| {
            let og = g.order();
            group
                .elements()
                .iter()
                .zip(&orders)
                .filter(|(_, &o)| og % o == 0)
                .map(|(y, _)| y)
                .collect()
        })
        .collect();

    let mut maps: Vec<GroupMap> = candidates[0]
        .par_iter()
        .map(|first| {
            let mut found = Vec::new();
            let mut chosen = vec![(*first).clone()];
            search(group, &gens, &candidates, &mut chosen, &mut found);
            found
        })
        .flatten()
        .collect();
    maps.sort_by(GroupMap::canonical_cmp);
    maps.dedup();
    Ok(maps)
}

fn search(
    group: &Arc<FiniteGroup>,
    gens: &[Permutation],
    candidates: &[Vec<&Permutation>],
    chosen: &mut Vec<Permutation>,
    found: &mut Vec<GroupMap>,
) {
    let k = chosen.len();
    let Ok(assigned) = propagate(group, &gens[..k], chosen, group.degree()) else {
        return;
    };
    if k == gens.len() {
        let table = assigned
            .iter()
            .map(|y| {
                let y = y.as_ref().expect("generators span the group");
                group.index_of(y).expect("images lie in the group") as u32
            })
            .collect();
        found.push(GroupMap {
            domain: group.clone(),
            codomain: group.clone(),
            table,
        });
        return;
    }
    for y in &candidates[k] {
        chosen.push((*y).clone());
        search(group, gens, candidates, chosen, found);
        chosen.pop();
    }
}

/// Why an endomorphism pair has no common extension.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionConflict {
    /// Propagation forced two different images onto `element`.
    ForcedImages {
        element: Permutation,
        first: Permutation,
        second: Permutation,
    },
    /// The propagated map disagrees with `α` or `β` on `element`.
    Restriction {
        element: Permutation,
        expected: Permutation,
        found: Permutation,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionResult {
    Exists(GroupMap),
    Fails(ExtensionConflict),
}

impl ExtensionResult {
    pub fn exists(&self) -> bool {
        matches!(self, ExtensionResult::Exists(_))
    }
}

/// Tries to extend `(alpha, beta)` to an endomorphism of the join.
///
/// The Cayley graph of the join on `A.generators ∪ B.generators` is walked
/// breadth-first from `e ↦ e`; each edge along a generator of `A` (resp. `B`)
/// forces the image of the target to be the source's image times `α(g)`
/// (resp. `β(g)`). The first element that receives two different images is
/// reported. The extension, when it exists, is unique.
pub fn extend(
    alpha: &GroupMap,
    beta: &GroupMap,
    pair: &SubgroupPair,
) -> Result<ExtensionResult, GroupError> {
    extend_ordered(alpha, beta, pair, false)
}

pub(crate) fn extend_ordered(
    alpha: &GroupMap,
    beta: &GroupMap,
    pair: &SubgroupPair,
    reverse_generators: bool,
) -> Result<ExtensionResult, GroupError> {
    if !same_group(&alpha.domain, pair.a())
        || !same_group(&alpha.codomain, pair.a())
        || !same_group(&beta.domain, pair.b())
        || !same_group(&beta.codomain, pair.b())
    {
        return Err(GroupError::DomainMismatch);
    }
    let join = pair.join()?;
    let mut gens: Vec<Permutation> = Vec::new();
    let mut images: Vec<Permutation> = Vec::new();
    for (side, map) in [(pair.a(), alpha), (pair.b(), beta)] {
        for g in side.generators() {
            gens.push(g.clone());
            images.push(map.apply(g).expect("generator in domain").clone());
        }
    }
    if reverse_generators {
        gens.reverse();
        images.reverse();
    }
    let assigned = match propagate(join, &gens, &images, join.degree()) {
        Ok(a) => a,
        Err(c) => {
            return Ok(ExtensionResult::Fails(ExtensionConflict::ForcedImages {
                element: c.element,
                first: c.first,
                second: c.second,
            }))
        }
    };
    let table: Vec<u32> = assigned
        .iter()
        .map(|y| {
            let y = y.as_ref().expect("generators span the join");
            join.index_of(y).expect("images lie in the join") as u32
        })
        .collect();
    let gamma = GroupMap {
        domain: join.clone(),
        codomain: join.clone(),
        table,
    };
    for map in [alpha, beta] {
        for (x, expected) in map.pairs() {
            let found = gamma.apply(x).expect("subgroup of the join");
            if found != expected {
                return Ok(ExtensionResult::Fails(ExtensionConflict::Restriction {
                    element: x.clone(),
                    expected: expected.clone(),
                    found: found.clone(),
                }));
            }
        }
    }
    Ok(ExtensionResult::Exists(gamma))
}

/// `true` iff `(alpha, beta)` extends to an endomorphism of the join.
pub fn is_compatible(
    alpha: &GroupMap,
    beta: &GroupMap,
    pair: &SubgroupPair,
) -> Result<bool, GroupError> {
    Ok(extend(alpha, beta, pair)?.exists())
}

/// Checks `γ(∏ aᵢbᵢ) = ∏ α(aᵢ)β(bᵢ)` on `samples` pseudo-random words of
/// up to `max_len` factor pairs, drawn from a fixed seed.
pub fn check_product_law(
    gamma: &GroupMap,
    alpha: &GroupMap,
    beta: &GroupMap,
    samples: usize,
    max_len: usize,
    seed: u64,
) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = alpha.domain();
    let b = beta.domain();
    let degree = gamma.domain().degree();
    (0..samples).all(|_| {
        let len = rng.gen_range(1..=max_len.max(1));
        let mut word = Permutation::identity(degree);
        let mut mapped = Permutation::identity(degree);
        for _ in 0..len {
            let ai = rng.gen_range(0..a.order());
            let bi = rng.gen_range(0..b.order());
            word = &(&word * &a.elements()[ai]) * &b.elements()[bi];
            mapped = &(&mapped * alpha.apply_index(ai)) * beta.apply_index(bi);
        }
        gamma.apply(&word) == Some(&mapped)
    })
}
