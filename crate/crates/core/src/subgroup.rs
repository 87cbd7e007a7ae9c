//! Finite subgroups and finite subsets of an ambient group.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::group::Group;

/// Default cap on the size of enumerated sets.
pub const DEFAULT_BUDGET: usize = 1 << 20;

/// A finite subgroup, stored as its sorted element list.
#[derive(Clone)]
pub struct FiniteSubgroup {
    group: Group,
    elements: Arc<Vec<Elem>>,
    generators: Vec<Elem>,
}

impl fmt::Debug for FiniteSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteSubgroup(order {} in {})", self.elements.len(), self.group)
    }
}

impl PartialEq for FiniteSubgroup {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.elements == other.elements
    }
}

impl FiniteSubgroup {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &Elem) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn as_set(&self) -> ProductSet {
        ProductSet { group: self.group.clone(), elements: self.elements.clone(), factors: 1 }
    }

    /// Builds a subgroup from a sorted, deduplicated element list already known to be closed.
    pub(crate) fn from_sorted(group: &Group, elements: Vec<Elem>, generators: Vec<Elem>) -> Self {
        FiniteSubgroup { group: group.clone(), elements: Arc::new(elements), generators }
    }
}

/// A finite subset of an ambient group, typically a product of subgroups.
#[derive(Clone)]
pub struct ProductSet {
    group: Group,
    elements: Arc<Vec<Elem>>,
    factors: usize,
}

impl fmt::Debug for ProductSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProductSet(size {}, {} factors, in {})", self.elements.len(), self.factors, self.group)
    }
}

impl ProductSet {
    pub fn from_elements(group: &Group, mut elements: Vec<Elem>) -> Self {
        elements.sort();
        elements.dedup();
        ProductSet { group: group.clone(), elements: Arc::new(elements), factors: 1 }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn contains(&self, x: &Elem) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    /// Exact subgroup test: contains `e` and is closed under products and inverses.
    pub fn is_subgroup(&self) -> bool {
        let g = &self.group;
        if !self.contains(&g.identity()) {
            return false;
        }
        // the span of S stays inside S exactly when S is closed
        greedy_generators(g, &self.elements, |z| self.contains(z)).is_some()
    }

    /// Converts to a subgroup after an exact closure check.
    pub fn into_subgroup(self) -> Result<FiniteSubgroup> {
        if !self.is_subgroup() {
            return Err(Error::structure("set is not a subgroup"));
        }
        let gens = small_generating_set(&self.group, &self.elements);
        Ok(FiniteSubgroup { group: self.group, elements: self.elements, generators: gens })
    }
}

/// The subgroup generated by `gens`; fails once it exceeds `budget` elements.
pub fn closure(group: &Group, gens: &[Elem], budget: usize) -> Result<FiniteSubgroup> {
    let id = group.identity();
    let mut gens: Vec<Elem> = gens.iter().filter(|g| **g != id).cloned().collect();
    gens.sort();
    gens.dedup();
    let mut seen: HashSet<Elem> = HashSet::new();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    // locally finite groups: closure under right multiplication suffices
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y = group.mul(&x, g);
            if !seen.contains(&y) {
                if seen.len() >= budget {
                    return Err(Error::Budget { what: "subgroup closure", limit: budget });
                }
                seen.insert(y.clone());
                frontier.push(y);
            }
        }
    }
    let mut elements: Vec<Elem> = seen.into_iter().collect();
    elements.sort();
    Ok(FiniteSubgroup { group: group.clone(), elements: Arc::new(elements), generators: gens })
}

/// `A B = { a b : a in A, b in B }`.
///
/// When `a_is_subgroup` holds the product is assembled coset by coset, so the
/// cost is proportional to `|A B|` rather than `|A| |B|`.
pub fn product_set(group: &Group, a: &[Elem], b: &[Elem], a_is_subgroup: bool, budget: usize) -> Result<Vec<Elem>> {
    let mut seen: HashSet<Elem> = HashSet::with_capacity(a.len());
    if a_is_subgroup {
        seen.extend(a.iter().cloned());
        for y in b {
            if seen.contains(y) {
                continue;
            }
            if seen.len() + a.len() > budget {
                return Err(Error::Budget { what: "product set", limit: budget });
            }
            for x in a {
                seen.insert(group.mul(x, y));
            }
        }
    } else {
        for x in a {
            for y in b {
                seen.insert(group.mul(x, y));
                if seen.len() > budget {
                    return Err(Error::Budget { what: "product set", limit: budget });
                }
            }
        }
    }
    let mut out: Vec<Elem> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Product `H_1 H_2 ... H_k` of finite subgroups, in the given order.
pub fn product_of(group: &Group, factors: &[&FiniteSubgroup], budget: usize) -> Result<ProductSet> {
    let mut acc: Vec<Elem> = vec![group.identity()];
    let mut acc_subgroup = true;
    for h in factors {
        h.group().ensure_same(group)?;
        acc = product_set(group, &acc, h.elements(), acc_subgroup, budget)?;
        let set = ProductSet::from_elements(group, acc.clone());
        acc_subgroup = set.is_subgroup();
    }
    Ok(ProductSet { group: group.clone(), elements: Arc::new(acc), factors: factors.len() })
}

/// Generalized right index `[T : U]`: the number of right cosets `U t`
/// partitioning `T`. Fails unless `T` is a disjoint union of such cosets.
pub fn generalized_index(group: &Group, t: &[Elem], u: &FiniteSubgroup) -> Result<u64> {
    u.group().ensure_same(group)?;
    let ts: HashSet<&Elem> = t.iter().collect();
    let mut covered: HashSet<&Elem> = HashSet::with_capacity(t.len());
    let mut count = 0;
    for a in t {
        if covered.contains(a) {
            continue;
        }
        for h in u.elements() {
            let c = group.mul(h, a);
            match ts.get(&c) {
                Some(k) => {
                    covered.insert(k);
                }
                None => {
                    return Err(Error::structure(format!(
                        "set is not a union of right cosets: {} is missing",
                        group.format(&c)
                    )))
                }
            }
        }
        count += 1;
    }
    Ok(count)
}

/// A small generating set for the subgroup generated by `elements`, chosen greedily in order.
pub fn small_generating_set(group: &Group, elements: &[Elem]) -> Vec<Elem> {
    greedy_generators(group, elements, |_| true).expect("unbounded span never aborts")
}

/// Greedy generators of `<elements>`, aborting with `None` as soon as the
/// span produces an element rejected by `allowed`.
fn greedy_generators(group: &Group, elements: &[Elem], allowed: impl Fn(&Elem) -> bool) -> Option<Vec<Elem>> {
    let mut sorted: Vec<&Elem> = elements.iter().collect();
    // elements of large order first tends to give short lists
    sorted.sort_by_cached_key(|x| std::cmp::Reverse(group.order_of(x).unwrap_or(1)));
    let mut gens: Vec<Elem> = Vec::new();
    let mut span: HashSet<Elem> = HashSet::new();
    span.insert(group.identity());
    let mut members: Vec<Elem> = vec![group.identity()];
    for x in sorted {
        if span.contains(x) {
            continue;
        }
        gens.push(x.clone());
        // the old span is closed under the old generators, so only products
        // with the new generator and their descendants are new
        let mut frontier: Vec<Elem> = Vec::new();
        for y in &members {
            let z = group.mul(y, x);
            if !span.contains(&z) {
                if !allowed(&z) {
                    return None;
                }
                span.insert(z.clone());
                frontier.push(z);
            }
        }
        while let Some(y) = frontier.pop() {
            members.push(y.clone());
            for g in &gens {
                let z = group.mul(&y, g);
                if !span.contains(&z) {
                    if !allowed(&z) {
                        return None;
                    }
                    span.insert(z.clone());
                    frontier.push(z);
                }
            }
        }
    }
    Some(gens)
}

pub fn intersection(a: &FiniteSubgroup, b: &FiniteSubgroup) -> Result<FiniteSubgroup> {
    a.group().ensure_same(b.group())?;
    let elements: Vec<Elem> = a.elements().iter().filter(|x| b.contains(x)).cloned().collect();
    let gens = small_generating_set(a.group(), &elements);
    Ok(FiniteSubgroup::from_sorted(a.group(), elements, gens))
}

/// Whether `h` is normal in the finite subgroup `scope` (checked on its generators).
pub fn is_normal(h: &FiniteSubgroup, scope: &FiniteSubgroup) -> bool {
    is_normalized_by(h, scope.generators())
}

/// Whether `h` is normalized by every element of `by` (typically generators).
pub fn is_normalized_by(h: &FiniteSubgroup, by: &[Elem]) -> bool {
    let g = h.group();
    by.iter().all(|x| h.generators().iter().all(|y| h.contains(&g.conjugate(x, y))))
}

/// The commutator subgroup of a finite subgroup.
pub fn commutator_subgroup(h: &FiniteSubgroup, budget: usize) -> Result<FiniteSubgroup> {
    let g = h.group();
    let mut comms: Vec<Elem> = Vec::new();
    for a in h.elements() {
        for b in h.elements() {
            comms.push(g.commutator(a, b));
        }
    }
    comms.sort();
    comms.dedup();
    closure(g, &comms, budget)
}

/// A finite quotient `H / N` with canonical (minimal) coset representatives.
#[derive(Clone, Debug)]
pub struct FiniteQuotientGroup {
    sub: FiniteSubgroup,
    normal: FiniteSubgroup,
    reps: Vec<Elem>,
}

impl FiniteQuotientGroup {
    pub fn new(sub: &FiniteSubgroup, normal: &FiniteSubgroup) -> Result<Self> {
        sub.group().ensure_same(normal.group())?;
        if !normal.elements().iter().all(|x| sub.contains(x)) {
            return Err(Error::structure("quotient kernel is not contained in the subgroup"));
        }
        if !is_normalized_by(normal, sub.generators()) {
            return Err(Error::structure("quotient kernel is not normal"));
        }
        let mut q = FiniteQuotientGroup { sub: sub.clone(), normal: normal.clone(), reps: Vec::new() };
        let mut reps: Vec<Elem> = sub.elements().iter().map(|x| q.project(x)).collect();
        reps.sort();
        reps.dedup();
        q.reps = reps;
        Ok(q)
    }

    pub fn project(&self, x: &Elem) -> Elem {
        let g = self.sub.group();
        self.normal.elements().iter().map(|n| g.mul(x, n)).min().expect("nonempty")
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.project(&self.sub.group().mul(a, b))
    }

    pub fn order(&self) -> usize {
        self.reps.len()
    }

    pub fn representatives(&self) -> &[Elem] {
        &self.reps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::IndexSet;

    fn z(n: u64) -> Group {
        Group::cyclic(n).unwrap()
    }

    #[test]
    fn closure_of_nothing_is_trivial() {
        let g = Group::quaternion();
        let h = closure(&g, &[], 10).unwrap();
        assert!(h.is_trivial());
    }

    #[test]
    fn closure_respects_budget() {
        let g = Group::restricted_sum(z(2), IndexSet::N).unwrap();
        let gens = g.block_generators(12);
        assert!(closure(&g, &gens, 100).is_err());
        assert_eq!(closure(&g, &gens, 5000).unwrap().order(), 4096);
    }

    #[test]
    fn product_of_nonpermuting_subgroups_in_s3() {
        let s3 = Group::semidirect_table(z(3), 2, &[(Elem::Res(1), Elem::Res(2))]).unwrap();
        let t = Elem::tuple(vec![Elem::Res(0), Elem::Res(1)]);
        let rt = Elem::tuple(vec![Elem::Res(1), Elem::Res(1)]);
        let a = closure(&s3, &[t], 10).unwrap();
        let b = closure(&s3, &[rt], 10).unwrap();
        let p = product_of(&s3, &[&a, &b], 100).unwrap();
        assert_eq!(p.len(), 4);
        assert!(!p.is_subgroup());
    }

    #[test]
    fn index_and_quotient() {
        let g = z(12);
        let whole = closure(&g, &[Elem::Res(1)], 100).unwrap();
        let sub = closure(&g, &[Elem::Res(4)], 100).unwrap();
        assert_eq!(generalized_index(&g, whole.elements(), &sub).unwrap(), 4);
        assert!(generalized_index(&g, &[Elem::Res(0), Elem::Res(1)], &sub).is_err());
        let q = FiniteQuotientGroup::new(&whole, &sub).unwrap();
        assert_eq!(q.order(), 4);
        assert_eq!(q.mul(&Elem::Res(3), &Elem::Res(2)), Elem::Res(1));
    }

    #[test]
    fn q8_commutator_is_center() {
        let g = Group::quaternion();
        let all = closure(&g, &g.block_generators(1), 10).unwrap();
        let c = commutator_subgroup(&all, 10).unwrap();
        assert_eq!(c.elements(), &[Elem::Res(0), Elem::Res(1)]);
    }
}
