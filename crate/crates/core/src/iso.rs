//! Isomorphism testing between explicitly enumerated groups.

use std::sync::Arc;

use crate::error::{Budget, GroupError};
use crate::group::{conjugacy_classes, FiniteGroup};
use crate::hom::{propagate, GroupMap};
use crate::perm::Permutation;

/// Cheap isomorphism invariants compared before any search.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Invariants {
    order: usize,
    abelian: bool,
    element_orders: Vec<u64>,
    class_sizes: Vec<usize>,
}

fn invariants(g: &FiniteGroup) -> Invariants {
    let mut element_orders = g.element_orders();
    element_orders.sort_unstable();
    let mut class_sizes = conjugacy_classes(g).class_sizes();
    class_sizes.sort_unstable();
    Invariants {
        order: g.order(),
        abelian: g.is_abelian(),
        element_orders,
        class_sizes,
    }
}

/// Decides `G ≅ H`, returning an isomorphism `G → H` when one exists.
///
/// Groups may have different degrees. After comparing order, abelianness,
/// the element-order multiset and the class-size multiset, images for a
/// greedy generating set of `G` are searched among elements of `H` with the
/// same order and conjugacy-class size; each partial choice is propagated
/// over the Cayley graph and abandoned on a clash or a nontrivial kernel.
pub fn is_isomorphic(
    g: &Arc<FiniteGroup>,
    h: &Arc<FiniteGroup>,
    budget: usize,
) -> Result<Option<GroupMap>, GroupError> {
    for x in [g, h] {
        if x.order() > budget {
            return Err(GroupError::BudgetExceeded {
                budget: Budget::IsoBudget,
                limit: budget,
            });
        }
    }
    if g.order() != h.order() {
        return Ok(None);
    }
    if invariants(g) != invariants(h) {
        return Ok(None);
    }
    let gens = g.greedy_generators();
    let g_classes = conjugacy_classes(g);
    let h_classes = conjugacy_classes(h);
    let g_sizes = g_classes.class_sizes();
    let h_sizes = h_classes.class_sizes();
    let h_orders = h.element_orders();
    let candidates: Vec<Vec<&Permutation>> = gens
        .iter()
        .map(|x| {
            let idx = g.index_of(x).expect("generator in group");
            let size = g_sizes[g_classes.class_of_index(idx)];
            let order = x.order();
            h.elements()
                .iter()
                .enumerate()
                .filter(|&(j, _)| {
                    h_orders[j] == order && h_sizes[h_classes.class_of_index(j)] == size
                })
                .map(|(_, y)| y)
                .collect()
        })
        .collect();
    let mut chosen = Vec::with_capacity(gens.len());
    Ok(search(g, h, &gens, &candidates, &mut chosen))
}

fn search(
    g: &Arc<FiniteGroup>,
    h: &Arc<FiniteGroup>,
    gens: &[Permutation],
    candidates: &[Vec<&Permutation>],
    chosen: &mut Vec<Permutation>,
) -> Option<GroupMap> {
    let k = chosen.len();
    let assigned = propagate(g, &gens[..k], chosen, h.degree()).ok()?;
    let kernel_trivial = assigned
        .iter()
        .skip(1)
        .all(|y| y.as_ref().is_none_or(|y| !y.is_identity()));
    if !kernel_trivial {
        return None;
    }
    if k == gens.len() {
        let images: Vec<Permutation> = assigned.into_iter().map(|y| y.expect("spanning")).collect();
        let map = GroupMap::from_images(g.clone(), h.clone(), &images).ok()?;
        return map.is_bijective().then_some(map);
    }
    for y in &candidates[k] {
        chosen.push((*y).clone());
        if let Some(m) = search(g, h, gens, candidates, chosen) {
            return Some(m);
        }
        chosen.pop();
    }
    None
}
