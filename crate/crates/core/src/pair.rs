use std::sync::{Arc, OnceLock};

use crate::error::GroupError;
use crate::group::{self, FiniteGroup};
use crate::perm::PermError;

type Lazy = OnceLock<Result<Arc<FiniteGroup>, GroupError>>;

/// Two subgroups of a common symmetric group together with the groups
/// derived from them: the join `⟨A ∪ B⟩`, the normal closures of `A` and `B`
/// in the join, and `A ∩ B`. Derived groups are computed on first use.
#[derive(Debug)]
pub struct SubgroupPair {
    a: Arc<FiniteGroup>,
    b: Arc<FiniteGroup>,
    max_order: usize,
    join: Lazy,
    ncl_a: Lazy,
    ncl_b: Lazy,
    meet: OnceLock<Arc<FiniteGroup>>,
}

impl SubgroupPair {
    /// `max_order` bounds the join and everything computed inside it.
    pub fn new(
        a: Arc<FiniteGroup>,
        b: Arc<FiniteGroup>,
        max_order: usize,
    ) -> Result<Self, GroupError> {
        if a.degree() != b.degree() {
            return Err(PermError::DegreeMismatch {
                left: a.degree(),
                right: b.degree(),
            }
            .into());
        }
        Ok(Self {
            a,
            b,
            max_order,
            join: OnceLock::new(),
            ncl_a: OnceLock::new(),
            ncl_b: OnceLock::new(),
            meet: OnceLock::new(),
        })
    }

    pub fn a(&self) -> &Arc<FiniteGroup> {
        &self.a
    }

    pub fn b(&self) -> &Arc<FiniteGroup> {
        &self.b
    }

    pub fn degree(&self) -> usize {
        self.a.degree()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// The same pair with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> SubgroupPair {
        let s = SubgroupPair {
            a: self.b.clone(),
            b: self.a.clone(),
            max_order: self.max_order,
            join: OnceLock::new(),
            ncl_a: OnceLock::new(),
            ncl_b: OnceLock::new(),
            meet: OnceLock::new(),
        };
        if let Some(j) = self.join.get() {
            let _ = s.join.set(j.clone());
        }
        if let Some(n) = self.ncl_a.get() {
            let _ = s.ncl_b.set(n.clone());
        }
        if let Some(n) = self.ncl_b.get() {
            let _ = s.ncl_a.set(n.clone());
        }
        s
    }

    pub fn join(&self) -> Result<&Arc<FiniteGroup>, GroupError> {
        self.join
            .get_or_init(|| group::join(&self.a, &self.b, self.max_order).map(Arc::new))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `⟨Conj(A)⟩`, the normal closure of `A` in the join.
    pub fn ncl_a(&self) -> Result<&Arc<FiniteGroup>, GroupError> {
        self.ncl_a
            .get_or_init(|| {
                let j = self.join()?;
                group::normal_closure(&self.a, j).map(Arc::new)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `⟨Conj(B)⟩`, the normal closure of `B` in the join.
    pub fn ncl_b(&self) -> Result<&Arc<FiniteGroup>, GroupError> {
        self.ncl_b
            .get_or_init(|| {
                let j = self.join()?;
                group::normal_closure(&self.b, j).map(Arc::new)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `A ∩ B`.
    pub fn intersection(&self) -> &Arc<FiniteGroup> {
        self.meet
            .get_or_init(|| Arc::new(group::intersection(&self.a, &self.b)))
    }

    /// Orders of the lazily computed groups that are already available.
    pub fn cached_orders(&self) -> (Option<usize>, Option<usize>, Option<usize>) {
        let order = |l: &Lazy| l.get().and_then(|r| r.as_ref().ok()).map(|g| g.order());
        (order(&self.join), order(&self.ncl_a), order(&self.ncl_b))
    }
}
