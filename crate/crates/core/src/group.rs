//! Finite permutation groups held as explicit, canonically sorted element
//! lists.
//!
//! Every group is small enough to enumerate (bounded by a caller-supplied
//! order budget), so membership is a binary search over the sorted elements
//! and all constructions are closures over explicit generators.

use std::collections::{HashSet, VecDeque};

use crate::error::{Budget, GroupError};
use crate::perm::Permutation;

/// A finite permutation group of fixed degree.
///
/// `elements` is sorted lexicographically by image table (identity first) and
/// equals the closure of `generators`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    degree: usize,
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "> (order {})", self.order())
    }
}

impl FiniteGroup {
    pub fn trivial(degree: usize) -> Self {
        Self {
            degree,
            elements: vec![Permutation::identity(degree)],
            generators: Vec::new(),
        }
    }

    /// The full symmetric group on `{1..n}`, generated by `(1 2)` and
    /// `(1 2 .. n)`.
    pub fn symmetric(n: usize, max_order: usize) -> Result<Self, GroupError> {
        let mut gens = Vec::new();
        if n >= 2 {
            let mut t: Vec<usize> = (1..=n).collect();
            t.swap(0, 1);
            gens.push(Permutation::from_images(&t)?);
        }
        if n >= 3 {
            let c: Vec<usize> = (1..=n).map(|i| i % n + 1).collect();
            gens.push(Permutation::from_images(&c)?);
        }
        Self::closure(&gens, n, max_order)
    }

    /// Smallest group containing `generators`.
    ///
    /// Identity and repeated generators are dropped from the stored
    /// generator list; the rest keep their input order.
    pub fn closure(
        generators: &[Permutation],
        degree: usize,
        max_order: usize,
    ) -> Result<Self, GroupError> {
        let mut gens: Vec<Permutation> = Vec::new();
        for g in generators {
            if g.degree() != degree {
                return Err(crate::perm::PermError::DegreeMismatch {
                    left: degree,
                    right: g.degree(),
                }
                .into());
            }
            if !g.is_identity() && !gens.contains(g) {
                gens.push(g.clone());
            }
        }
        let elements = enumerate_closure(&gens, degree, max_order)?;
        Ok(Self {
            degree,
            elements,
            generators: gens,
        })
    }

    /// Wraps an element set already known to be a group, choosing canonical
    /// generators: walk the elements in order and keep each one that is not
    /// yet generated.
    pub(crate) fn from_sorted_elements(degree: usize, elements: Vec<Permutation>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        let mut generators: Vec<Permutation> = Vec::new();
        let mut current = vec![Permutation::identity(degree)];
        for x in &elements {
            if current.binary_search(x).is_err() {
                generators.push(x.clone());
                current =
                    enumerate_closure(&generators, degree, usize::MAX).expect("unbounded closure");
            }
        }
        debug_assert_eq!(current.len(), elements.len());
        Self {
            degree,
            elements,
            generators,
        }
    }

    /// Builds a group from an arbitrary element list, failing unless the set
    /// is closed under products and contains the identity.
    pub fn from_elements(
        degree: usize,
        mut elements: Vec<Permutation>,
    ) -> Result<Self, GroupError> {
        elements.sort();
        elements.dedup();
        let id = Permutation::identity(degree);
        if elements.binary_search(&id).is_err() {
            return Err(GroupError::NotASubgroup);
        }
        for x in &elements {
            if x.degree() != degree {
                return Err(GroupError::NotASubgroup);
            }
            for y in &elements {
                if elements.binary_search(&(x * y)).is_err() {
                    return Err(GroupError::NotASubgroup);
                }
            }
        }
        Ok(Self::from_sorted_elements(degree, elements))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn identity(&self) -> &Permutation {
        &self.elements[0]
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Position of `x` in the canonical element order.
    pub fn index_of(&self, x: &Permutation) -> Option<usize> {
        if x.degree() != self.degree {
            return None;
        }
        self.elements.binary_search(x).ok()
    }

    pub fn contains(&self, x: &Permutation) -> bool {
        self.index_of(x).is_some()
    }

    pub fn is_subgroup_of(&self, other: &FiniteGroup) -> bool {
        self.degree == other.degree
            && self.order() <= other.order()
            && other.order().is_multiple_of(self.order())
            && self.generators.iter().all(|g| other.contains(g))
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .enumerate()
            .all(|(i, g)| self.generators[i + 1..].iter().all(|h| g.commutes_with(h)))
    }

    /// `true` iff `g H g⁻¹ = H` for every generator `g` of `ambient`.
    pub fn is_normal_in(&self, ambient: &FiniteGroup) -> bool {
        ambient.generators.iter().all(|g| {
            let g_inv = g.inverse();
            self.generators
                .iter()
                .all(|h| self.contains(&(&(g * h) * &g_inv)))
        })
    }

    /// Elementwise product set `self · other`, sorted and deduplicated.
    pub fn product_set(&self, other: &FiniteGroup) -> Vec<Permutation> {
        let mut out: Vec<Permutation> = self
            .elements
            .iter()
            .flat_map(|x| other.elements.iter().map(move |y| x * y))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// A small generating set chosen greedily: at each step add the element
    /// that enlarges the generated subgroup the most, ties going to the least
    /// element.
    pub fn greedy_generators(&self) -> Vec<Permutation> {
        let mut gens: Vec<Permutation> = Vec::new();
        let mut current = vec![Permutation::identity(self.degree)];
        while current.len() < self.order() {
            let mut best: Option<(usize, &Permutation, Vec<Permutation>)> = None;
            for x in &self.elements {
                if current.binary_search(x).is_ok() {
                    continue;
                }
                gens.push(x.clone());
                let span = enumerate_closure(&gens, self.degree, usize::MAX).expect("unbounded");
                gens.pop();
                if best.as_ref().is_none_or(|(n, _, _)| span.len() > *n) {
                    best = Some((span.len(), x, span.clone()));
                }
                if span.len() == self.order() {
                    break;
                }
            }
            let (_, x, span) = best.expect("group larger than current span");
            gens.push(x.clone());
            current = span;
        }
        gens
    }

    /// Orders of the elements, aligned with [`FiniteGroup::elements`].
    pub fn element_orders(&self) -> Vec<u64> {
        self.elements.iter().map(Permutation::order).collect()
    }
}

/// Breadth-first closure under right multiplication by the generators.
fn enumerate_closure(
    gens: &[Permutation],
    degree: usize,
    max_order: usize,
) -> Result<Vec<Permutation>, GroupError> {
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::new();
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = &x * g;
            if !seen.contains(&y) {
                if seen.len() >= max_order {
                    return Err(GroupError::BudgetExceeded {
                        budget: Budget::MaxGroupOrder,
                        limit: max_order,
                    });
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let mut elements: Vec<Permutation> = seen.into_iter().collect();
    elements.sort();
    Ok(elements)
}

/// `⟨A ∪ B⟩`.
pub fn join(a: &FiniteGroup, b: &FiniteGroup, max_order: usize) -> Result<FiniteGroup, GroupError> {
    if a.degree != b.degree {
        return Err(crate::perm::PermError::DegreeMismatch {
            left: a.degree,
            right: b.degree,
        }
        .into());
    }
    let gens: Vec<Permutation> = a.generators.iter().chain(&b.generators).cloned().collect();
    FiniteGroup::closure(&gens, a.degree, max_order)
}

/// The least normal subgroup of `ambient` containing `sub`.
///
/// Starts from `sub`'s generators and keeps adding any conjugate (by a
/// generator of `ambient`) that falls outside the current span.
pub fn normal_closure(sub: &FiniteGroup, ambient: &FiniteGroup) -> Result<FiniteGroup, GroupError> {
    if !sub.is_subgroup_of(ambient) {
        return Err(GroupError::NotASubgroup);
    }
    let mut gens = sub.generators.clone();
    let mut span = sub.clone();
    let ambient_inv: Vec<Permutation> = ambient
        .generators
        .iter()
        .map(Permutation::inverse)
        .collect();
    let mut i = 0;
    while i < gens.len() {
        let x = gens[i].clone();
        for (g, g_inv) in ambient.generators.iter().zip(&ambient_inv) {
            let c = &(g * &x) * g_inv;
            if !span.contains(&c) {
                gens.push(c);
                span = FiniteGroup::closure(&gens, ambient.degree, ambient.order())?;
            }
        }
        i += 1;
    }
    Ok(span)
}

/// `A ∩ B`, with canonical generators.
pub fn intersection(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
    let (small, large) = if a.order() <= b.order() {
        (a, b)
    } else {
        (b, a)
    };
    let elements: Vec<Permutation> = small
        .elements
        .iter()
        .filter(|x| large.contains(x))
        .cloned()
        .collect();
    FiniteGroup::from_sorted_elements(a.degree, elements)
}

/// Partition of a group into conjugacy classes.
#[derive(Debug, Clone)]
pub struct ConjClassPartition<'g> {
    group: &'g FiniteGroup,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl<'g> ConjClassPartition<'g> {
    pub fn group(&self) -> &'g FiniteGroup {
        self.group
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Class id of the element at canonical index `idx`. Classes are numbered
    /// in order of their least element.
    pub fn class_of_index(&self, idx: usize) -> usize {
        self.class_of[idx]
    }

    pub fn class_of(&self, x: &Permutation) -> Option<usize> {
        self.group.index_of(x).map(|i| self.class_of[i])
    }

    pub fn are_conjugate(&self, x: &Permutation, y: &Permutation) -> bool {
        match (self.class_of(x), self.class_of(y)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Classes as sorted element lists.
    pub fn classes(&self) -> Vec<Vec<Permutation>> {
        self.classes
            .iter()
            .map(|c| c.iter().map(|&i| self.group.elements[i].clone()).collect())
            .collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

/// Conjugacy classes as orbits of the conjugation action of the generators.
pub fn conjugacy_classes(group: &FiniteGroup) -> ConjClassPartition<'_> {
    let n = group.order();
    let gens: Vec<(Permutation, Permutation)> = group
        .generators
        .iter()
        .map(|g| (g.clone(), g.inverse()))
        .collect();
    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[start] = id;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let x = &group.elements[i];
            for (g, g_inv) in &gens {
                let c = &(g * x) * g_inv;
                let j = group.index_of(&c).expect("group closed under conjugation");
                if class_of[j] == usize::MAX {
                    class_of[j] = id;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    ConjClassPartition {
        group,
        class_of,
        classes,
    }
}

/// `G / N` represented by coset representatives (the least element of each
/// coset) with the induced product.
#[derive(Debug, Clone)]
pub struct QuotientGroup {
    group: FiniteGroup,
    representatives: Vec<Permutation>,
    coset_of: Vec<usize>,
}

impl QuotientGroup {
    pub fn order(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[Permutation] {
        &self.representatives
    }

    /// Index of the coset containing `x`.
    pub fn coset_of(&self, x: &Permutation) -> Option<usize> {
        self.group.index_of(x).map(|i| self.coset_of[i])
    }

    /// Product of cosets `i` and `j`.
    pub fn mul(&self, i: usize, j: usize) -> usize {
        let p = &self.representatives[i] * &self.representatives[j];
        self.coset_of(&p).expect("closed")
    }

    /// The faithful action of `G / N` on the cosets by left multiplication,
    /// as a permutation group of degree `[G : N]`.
    pub fn to_permutation_group(&self) -> FiniteGroup {
        let k = self.order();
        let gens: Vec<Permutation> = self
            .group
            .generators
            .iter()
            .map(|g| {
                let images: Vec<u32> = self
                    .representatives
                    .iter()
                    .map(|r| self.coset_of(&(g * r)).expect("closed") as u32)
                    .collect();
                Permutation::from_raw(images)
            })
            .collect();
        let q = FiniteGroup::closure(&gens, k, usize::MAX).expect("unbounded");
        debug_assert_eq!(q.order(), k);
        q
    }
}

/// `G / N`; fails unless `N` is a normal subgroup of `G`.
pub fn quotient(group: &FiniteGroup, normal: &FiniteGroup) -> Result<QuotientGroup, GroupError> {
    if !normal.is_subgroup_of(group) {
        return Err(GroupError::NotASubgroup);
    }
    if !normal.is_normal_in(group) {
        return Err(GroupError::NotNormal);
    }
    let mut coset_of = vec![usize::MAX; group.order()];
    let mut representatives = Vec::new();
    for (i, x) in group.elements.iter().enumerate() {
        if coset_of[i] != usize::MAX {
            continue;
        }
        let id = representatives.len();
        representatives.push(x.clone());
        for n in &normal.elements {
            let j = group.index_of(&(x * n)).expect("closed");
            coset_of[j] = id;
        }
    }
    Ok(QuotientGroup {
        group: group.clone(),
        representatives,
        coset_of,
    })
}
