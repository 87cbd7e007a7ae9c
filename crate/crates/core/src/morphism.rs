//! Endomorphisms of ambient groups.
//!
//! An [`Endomorphism`] is a domain group plus a rule. Rules are either
//! structural (shifts, powers, permutations of coordinates, conjugations,
//! diagonal maps on products) or explicit tables on finite groups. Derived
//! maps (restrictions to invariant subgroups, induced maps on quotients,
//! iterates) are built on top of these.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::group::{Group, IndexSet, Node};
use crate::numtheory::{gcd, ext_gcd, pow_mod};
use crate::subgroup::{closure, FiniteSubgroup, DEFAULT_BUDGET};
use crate::witness::Witness;

#[derive(Clone, Debug)]
pub enum EndoKind {
    Identity,
    Trivial,
    /// Reindex restricted-sum coordinates `i -> i + k`.
    Shift(i64),
    /// `x -> x^u` (on `A x| Z(m)`: `(a, x) -> (a^u, x)`).
    Power(u64),
    /// Explicit pointwise table; unlisted elements are fixed.
    Table(HashMap<Elem, Elem>),
    /// Componentwise maps on a direct product.
    Diagonal(Vec<Endomorphism>),
    /// `outer . inner`.
    Compose(Endomorphism, Endomorphism),
    /// A declared automorphism with its inverse.
    Automorphism { forward: Endomorphism, inverse: Endomorphism },
    /// `x -> g x g^-1`.
    Conjugation(Elem),
    /// Finitary permutation of sum coordinates, as `(from, to)` pairs.
    Permutation(Vec<(i64, i64)>),
    /// Restriction of a map on the parent to an invariant subgroup.
    Restriction(Endomorphism),
    /// The map induced on a quotient by an invariant normal subgroup.
    Induced(Endomorphism),
}

#[derive(Clone)]
pub struct Endomorphism {
    domain: Group,
    kind: Arc<EndoKind>,
}

impl fmt::Debug for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.label(), self.domain)
    }
}

/// Result of a homomorphism check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomomorphismReport {
    pub exhaustive: bool,
    pub pairs_checked: u64,
    /// Codes of a failing pair `(x, y)` with `f(xy) != f(x) f(y)`.
    pub counterexample: Option<(String, String)>,
    pub images_valid: bool,
}

impl HomomorphismReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none() && self.images_valid
    }
}

/// Invariance data of a subgroup `H` under `f`; `None` means undecided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    /// `f(H) <= H`.
    pub invariant: Option<bool>,
    /// `f(H) = H`.
    pub stable: Option<bool>,
    /// `ker f <= H`.
    pub kernel_contained: Option<bool>,
}

fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

/// Extends generator images to a full table by walking the Cayley graph,
/// failing if the assignment is inconsistent (not a homomorphism) or the
/// generators do not generate the finite group.
pub fn extend_generator_images(group: &Group, images: &[(Elem, Elem)]) -> Result<HashMap<Elem, Elem>> {
    for (g, h) in images {
        group.check(g)?;
        group.check(h)?;
    }
    let id = group.identity();
    let mut map: HashMap<Elem, Elem> = HashMap::new();
    map.insert(id.clone(), id.clone());
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        let fx = map[&x].clone();
        for (g, h) in images {
            let y = group.mul(&x, g);
            let fy = group.mul(&fx, h);
            match map.get(&y) {
                Some(prev) if *prev != fy => {
                    return Err(Error::structure(format!(
                        "generator images do not define a homomorphism (conflict at {})",
                        group.format(&y)
                    )))
                }
                Some(_) => {}
                None => {
                    if map.len() >= DEFAULT_BUDGET {
                        return Err(Error::Budget { what: "generator image extension", limit: DEFAULT_BUDGET });
                    }
                    map.insert(y.clone(), fy);
                    frontier.push(y);
                }
            }
        }
    }
    if let Some(size) = group.size() {
        if map.len() as u128 != size {
            return Err(Error::structure(format!(
                "generators span {} of {size} elements of {group}",
                map.len()
            )));
        }
    }
    Ok(map)
}

fn shift_sparse(x: &Elem, k: i64) -> Elem {
    Elem::sparse(x.coords().iter().map(|(i, c)| (i + k, c.clone())).collect())
}

fn permute_sparse(x: &Elem, perm: &HashMap<i64, i64>) -> Elem {
    let mut out: Vec<(i64, Elem)> =
        x.coords().iter().map(|(i, c)| (*perm.get(i).unwrap_or(i), c.clone())).collect();
    out.sort_by_key(|(i, _)| *i);
    Elem::sparse(out)
}

impl Endomorphism {
    fn make(domain: &Group, kind: EndoKind) -> Self {
        Endomorphism { domain: domain.clone(), kind: Arc::new(kind) }
    }

    pub fn domain(&self) -> &Group {
        &self.domain
    }

    pub fn kind(&self) -> &EndoKind {
        &self.kind
    }

    pub fn identity(domain: &Group) -> Self {
        Endomorphism::make(domain, EndoKind::Identity)
    }

    pub fn trivial(domain: &Group) -> Self {
        Endomorphism::make(domain, EndoKind::Trivial)
    }

    /// Coordinate shift `i -> i + k` on a restricted sum, or on the base of
    /// `A x| Z(m)` when `A` is a restricted sum with a power action.
    pub fn shift(domain: &Group, k: i64) -> Result<Self> {
        let index = match domain.node() {
            Node::Sum { index, .. } => *index,
            Node::Semidirect(sd) => match (sd.base.as_sum(), &sd.action) {
                (Some((_, index)), crate::group::Action::Power { .. }) => index,
                _ => return Err(Error::unsupported(format!("shift on {domain}"))),
            },
            _ => return Err(Error::unsupported(format!("shift needs a restricted sum, got {domain}"))),
        };
        if index == IndexSet::N && k < 0 {
            return Err(Error::param("negative shifts are not defined on sums indexed by N"));
        }
        Ok(Endomorphism::make(domain, EndoKind::Shift(k)))
    }

    /// `x -> x^u`; only on abelian domains, where it is a homomorphism. On
    /// `A x| Z(m)` with abelian `A` the power acts on the `A` part.
    pub fn power(domain: &Group, u: u64) -> Result<Self> {
        if !power_admissible(domain) {
            return Err(Error::param(format!("power maps need an abelian domain, got {domain}")));
        }
        Ok(Endomorphism::make(domain, EndoKind::Power(u)))
    }

    /// Pointwise table on any group; unlisted elements are fixed.
    pub fn table(domain: &Group, pairs: Vec<(Elem, Elem)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (x, y) in pairs {
            domain.check(&x)?;
            domain.check(&y)?;
            if let Some(prev) = map.insert(x.clone(), y.clone()) {
                if prev != y {
                    return Err(Error::param(format!("table lists {} twice", domain.format(&x))));
                }
            }
        }
        Ok(Endomorphism::make(domain, EndoKind::Table(map)))
    }

    /// The homomorphism of a finite group determined by images of generators.
    pub fn from_generator_images(domain: &Group, images: &[(Elem, Elem)]) -> Result<Self> {
        let map = extend_generator_images(domain, images)?;
        Ok(Endomorphism::make(domain, EndoKind::Table(map)))
    }

    pub fn diagonal(domain: &Group, maps: Vec<Endomorphism>) -> Result<Self> {
        let fs = domain.factors().ok_or_else(|| Error::param("diagonal maps need a direct product"))?;
        if fs.len() != maps.len() {
            return Err(Error::param(format!("expected {} component maps, got {}", fs.len(), maps.len())));
        }
        for (f, m) in fs.iter().zip(&maps) {
            f.ensure_same(m.domain())?;
        }
        Ok(Endomorphism::make(domain, EndoKind::Diagonal(maps)))
    }

    /// `outer . inner`.
    pub fn compose(outer: &Endomorphism, inner: &Endomorphism) -> Result<Self> {
        outer.domain.ensure_same(&inner.domain)?;
        Ok(Endomorphism::make(&outer.domain, EndoKind::Compose(outer.clone(), inner.clone())))
    }

    /// Declares `forward` an automorphism with the given inverse, after
    /// checking both composites fix sampled (or all) elements.
    pub fn automorphism(forward: Endomorphism, inverse: Endomorphism, seed: u64) -> Result<Self> {
        forward.domain.ensure_same(&inverse.domain)?;
        let g = forward.domain.clone();
        let probes: Vec<Elem> = if g.is_finite() && g.size().unwrap_or(u128::MAX) <= 4096 {
            g.elements(4096)?
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..256).map(|_| g.sample(&mut rng, 8)).collect()
        };
        for x in &probes {
            if inverse.apply(&forward.apply(x)) != *x || forward.apply(&inverse.apply(x)) != *x {
                return Err(Error::structure(format!(
                    "declared inverse fails at {}",
                    g.format(x)
                )));
            }
        }
        Ok(Endomorphism::make(&g, EndoKind::Automorphism { forward, inverse }))
    }

    pub fn conjugation(domain: &Group, by: Elem) -> Result<Self> {
        domain.check(&by)?;
        Ok(Endomorphism::make(domain, EndoKind::Conjugation(by)))
    }

    /// Finitary coordinate permutation given as `(from, to)` pairs.
    pub fn permutation(domain: &Group, pairs: Vec<(i64, i64)>) -> Result<Self> {
        let index = match domain.node() {
            Node::Sum { index, .. } => *index,
            Node::Semidirect(sd) if sd.base.as_sum().is_some() => sd.base.as_sum().unwrap().1,
            _ => return Err(Error::unsupported(format!("coordinate permutation on {domain}"))),
        };
        let mut from: Vec<i64> = pairs.iter().map(|p| p.0).collect();
        let mut to: Vec<i64> = pairs.iter().map(|p| p.1).collect();
        from.sort();
        to.sort();
        let n = from.len();
        from.dedup();
        to.dedup();
        if from.len() != n || to.len() != n || from != to {
            return Err(Error::param("coordinate permutation must be a bijection of a finite index set"));
        }
        if index == IndexSet::N && from.first().is_some_and(|i| *i < 0) {
            return Err(Error::param("negative index in a permutation of N"));
        }
        Ok(Endomorphism::make(domain, EndoKind::Permutation(pairs)))
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        let g = &self.domain;
        match &*self.kind {
            EndoKind::Identity => x.clone(),
            EndoKind::Trivial => g.identity(),
            EndoKind::Shift(k) => match g.node() {
                Node::Semidirect(_) => {
                    let p = x.parts();
                    Elem::tuple(vec![shift_sparse(&p[0], *k), p[1].clone()])
                }
                _ => shift_sparse(x, *k),
            },
            EndoKind::Power(u) => power_apply(g, x, *u),
            EndoKind::Table(map) => map.get(x).cloned().unwrap_or_else(|| x.clone()),
            EndoKind::Diagonal(maps) => Elem::tuple(maps.iter().zip(x.parts()).map(|(m, y)| m.apply(y)).collect()),
            EndoKind::Compose(outer, inner) => outer.apply(&inner.apply(x)),
            EndoKind::Automorphism { forward, .. } => forward.apply(x),
            EndoKind::Conjugation(by) => g.conjugate(by, x),
            EndoKind::Permutation(pairs) => {
                let perm: HashMap<i64, i64> = pairs.iter().cloned().collect();
                match g.node() {
                    Node::Semidirect(_) => {
                        let p = x.parts();
                        Elem::tuple(vec![permute_sparse(&p[0], &perm), p[1].clone()])
                    }
                    _ => permute_sparse(x, &perm),
                }
            }
            EndoKind::Restriction(inner) => inner.apply(x),
            EndoKind::Induced(inner) => {
                let (parent, w) = g.as_quotient().expect("induced maps live on quotients");
                w.reduce_unchecked(parent, &inner.apply(x))
            }
        }
    }

    /// Image of a set, sorted and deduplicated.
    pub fn apply_set(&self, xs: &[Elem]) -> Vec<Elem> {
        let mut out: Vec<Elem> = xs.iter().map(|x| self.apply(x)).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn label(&self) -> String {
        match &*self.kind {
            EndoKind::Identity => "id".into(),
            EndoKind::Trivial => "0".into(),
            EndoKind::Shift(k) => format!("shift({k})"),
            EndoKind::Power(u) => format!("power({u})"),
            EndoKind::Table(m) => format!("table[{}]", m.len()),
            EndoKind::Diagonal(ms) => {
                format!("diag({})", ms.iter().map(|m| m.label()).collect::<Vec<_>>().join(", "))
            }
            EndoKind::Compose(a, b) => format!("{} . {}", a.label(), b.label()),
            EndoKind::Automorphism { forward, .. } => format!("aut({})", forward.label()),
            EndoKind::Conjugation(g) => format!("conj({})", self.domain.format(g)),
            EndoKind::Permutation(p) => format!(
                "perm({})",
                p.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(",")
            ),
            EndoKind::Restriction(inner) => format!("{}|H", inner.label()),
            EndoKind::Induced(inner) => format!("{} mod H", inner.label()),
        }
    }

    /// Checks `f(xy) = f(x) f(y)`: on all pairs when `|G|^2 <= 2^20`, otherwise
    /// on 1000 seeded sample pairs.
    pub fn verify_homomorphism(&self, seed: u64) -> HomomorphismReport {
        let g = &self.domain;
        let exhaustive = g.size().is_some_and(|s| s * s <= 1 << 20);
        let pairs: Vec<(Elem, Elem)> = if exhaustive {
            let es = g.elements(1 << 10).expect("small group");
            es.iter().flat_map(|x| es.iter().map(move |y| (x.clone(), y.clone()))).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1000).map(|_| (g.sample(&mut rng, 8), g.sample(&mut rng, 8))).collect()
        };
        let mut images_valid = true;
        let mut counterexample = None;
        for (x, y) in &pairs {
            let (fx, fy) = (self.apply(x), self.apply(y));
            if g.check(&fx).is_err() || g.check(&fy).is_err() {
                images_valid = false;
            }
            if self.apply(&g.mul(x, y)) != g.mul(&fx, &fy) {
                counterexample = Some((g.encode(x).to_string(), g.encode(y).to_string()));
                break;
            }
        }
        HomomorphismReport { exhaustive, pairs_checked: pairs.len() as u64, counterexample, images_valid }
    }

    /// `f(H)` for a finite subgroup `H`.
    pub fn image_subgroup(&self, h: &FiniteSubgroup) -> Result<FiniteSubgroup> {
        h.group().ensure_same(&self.domain)?;
        let gens: Vec<Elem> = h.generators().iter().map(|x| self.apply(x)).collect();
        closure(&self.domain, &gens, DEFAULT_BUDGET)
    }

    /// `ker f ∩ H` for a finite subgroup `H`.
    pub fn kernel_in(&self, h: &FiniteSubgroup) -> Result<FiniteSubgroup> {
        h.group().ensure_same(&self.domain)?;
        let g = &self.domain;
        let inside: Vec<Elem> = h.elements().iter().filter(|x| g.is_identity(&self.apply(x))).cloned().collect();
        let gens = crate::subgroup::small_generating_set(g, &inside);
        Ok(FiniteSubgroup::from_sorted(g, inside, gens))
    }

    /// Whether the kernel is trivial, when known from the rule.
    pub fn known_injective(&self) -> Option<bool> {
        let g = &self.domain;
        match &*self.kind {
            EndoKind::Identity
            | EndoKind::Shift(_)
            | EndoKind::Automorphism { .. }
            | EndoKind::Conjugation(_)
            | EndoKind::Permutation(_) => Some(true),
            EndoKind::Trivial => Some(g.size() == Some(1)),
            EndoKind::Power(u) => {
                let e = power_exponent(g)?;
                Some(gcd(*u % e.max(1), e) == 1 || e == 1)
            }
            EndoKind::Diagonal(ms) => ms.iter().fold(Some(true), |acc, m| and(acc, m.known_injective())),
            EndoKind::Compose(a, b) => and(a.known_injective(), b.known_injective()),
            _ => {
                if g.is_finite() {
                    let es = g.elements(DEFAULT_BUDGET).ok()?;
                    Some(es.iter().filter(|x| g.is_identity(&self.apply(x))).count() == 1)
                } else {
                    None
                }
            }
        }
    }

    /// Invariance of `H` (given by a witness) under this map.
    pub fn invariance_report(&self, w: &Witness) -> Result<InvarianceReport> {
        let g = &self.domain;
        w.check_applicable(g)?;
        if let Witness::Finite(h) = w {
            return self.finite_invariance(h);
        }
        if w.subgroup_is_finite(g) && (g.is_finite() || !matches!(w, Witness::Whole)) {
            if let Ok(h) = w.to_finite(g, DEFAULT_BUDGET) {
                return self.finite_invariance(&h);
            }
        }
        let injective = self.known_injective();
        let kernel_contained = if injective == Some(true) { Some(true) } else { None };
        let surjective = self.known_surjective();
        let fully_invariant = match w {
            Witness::Whole | Witness::Trivial => true,
            Witness::Multiples(_) | Witness::Torsion(_) => g.semidirect().is_none(),
            _ => false,
        };
        if fully_invariant {
            let stable = match w {
                Witness::Whole => surjective,
                Witness::Trivial => Some(true),
                _ => {
                    if surjective == Some(true) && injective == Some(true) {
                        Some(true)
                    } else {
                        self.structured_stable(w)
                    }
                }
            };
            let kernel_contained = match w {
                Witness::Whole => Some(true),
                _ => kernel_contained,
            };
            return Ok(InvarianceReport { invariant: Some(true), stable, kernel_contained });
        }
        let invariant = self.structured_invariant(w);
        let stable = if invariant == Some(true) && injective == Some(true) && self.is_automorphism_rule() {
            self.structured_stable(w)
        } else if invariant == Some(false) {
            Some(false)
        } else {
            self.structured_stable(w)
        };
        Ok(InvarianceReport { invariant, stable, kernel_contained })
    }

    fn finite_invariance(&self, h: &FiniteSubgroup) -> Result<InvarianceReport> {
        let img = self.image_subgroup(h)?;
        let invariant = img.elements().iter().all(|x| h.contains(x));
        let stable = invariant && img.order() == h.order();
        let kernel_contained = match self.known_injective() {
            Some(true) => Some(true),
            _ if self.domain.is_finite() => {
                let all = closure(&self.domain, &self.domain.block_generators(1), DEFAULT_BUDGET)?;
                Some(self.kernel_in(&all)?.elements().iter().all(|x| h.contains(x)))
            }
            _ => None,
        };
        Ok(InvarianceReport { invariant: Some(invariant), stable: Some(stable), kernel_contained })
    }

    fn is_automorphism_rule(&self) -> bool {
        match &*self.kind {
            EndoKind::Identity | EndoKind::Automorphism { .. } | EndoKind::Conjugation(_) | EndoKind::Permutation(_) => {
                true
            }
            EndoKind::Shift(_) => matches!(self.index_set(), Some(IndexSet::Z)),
            _ => false,
        }
    }

    fn index_set(&self) -> Option<IndexSet> {
        match self.domain.node() {
            Node::Sum { index, .. } => Some(*index),
            Node::Semidirect(sd) => sd.base.as_sum().map(|s| s.1),
            _ => None,
        }
    }

    /// Surjectivity, when known from the rule.
    pub fn known_surjective(&self) -> Option<bool> {
        let g = &self.domain;
        match &*self.kind {
            EndoKind::Identity | EndoKind::Automorphism { .. } | EndoKind::Conjugation(_) | EndoKind::Permutation(_) => {
                Some(true)
            }
            EndoKind::Shift(k) => Some(*k == 0 || self.index_set() == Some(IndexSet::Z)),
            EndoKind::Trivial => Some(g.size() == Some(1)),
            EndoKind::Power(_) => {
                let inj = self.known_injective()?;
                if g.is_finite() || inj {
                    // bijective on each finite component when injective
                    Some(inj)
                } else {
                    Some(false)
                }
            }
            EndoKind::Diagonal(ms) => ms.iter().fold(Some(true), |acc, m| and(acc, m.known_surjective())),
            _ => {
                if g.is_finite() {
                    self.known_injective()
                } else {
                    None
                }
            }
        }
    }

    fn structured_invariant(&self, w: &Witness) -> Option<bool> {
        match (&*self.kind, w) {
            (EndoKind::Identity, _) => Some(true),
            (EndoKind::Trivial, _) => Some(true),
            (EndoKind::Diagonal(ms), Witness::Factors(ws)) => ms
                .iter()
                .zip(ws)
                .fold(Some(true), |acc, (m, w)| and(acc, m.invariance_report(w).ok().and_then(|r| r.invariant))),
            (EndoKind::Compose(a, b), _) => match (a.structured_invariant(w), b.structured_invariant(w)) {
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            (EndoKind::Automorphism { forward, .. }, _) => forward.structured_invariant(w),
            (EndoKind::Shift(k), Witness::Coordinates { .. }) => Some(*k >= 0),
            (EndoKind::Shift(_), Witness::Base | Witness::Multiples(_)) => Some(true),
            (EndoKind::Power(_), Witness::Coordinates { .. } | Witness::Base | Witness::Multiples(_)) => Some(true),
            (EndoKind::Permutation(pairs), Witness::Coordinates { from }) => {
                Some(pairs.iter().all(|(a, b)| a < from || b >= from))
            }
            (EndoKind::Permutation(_), Witness::Base | Witness::Multiples(_)) => Some(true),
            (EndoKind::Conjugation(_), _) => w.is_normal_in(&self.domain).ok().flatten().filter(|n| *n),
            _ => None,
        }
    }

    fn structured_stable(&self, w: &Witness) -> Option<bool> {
        match (&*self.kind, w) {
            (EndoKind::Identity, _) => Some(true),
            (EndoKind::Diagonal(ms), Witness::Factors(ws)) => ms
                .iter()
                .zip(ws)
                .fold(Some(true), |acc, (m, w)| and(acc, m.invariance_report(w).ok().and_then(|r| r.stable))),
            (EndoKind::Automorphism { forward, inverse }, _) => {
                match (forward.structured_invariant(w), inverse.structured_invariant(w)) {
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                }
            }
            (EndoKind::Shift(k), Witness::Coordinates { .. }) => Some(*k == 0),
            (EndoKind::Shift(k), _) if self.index_set() == Some(IndexSet::N) => Some(*k == 0),
            (EndoKind::Shift(_), Witness::Base | Witness::Multiples(_)) => Some(true),
            (EndoKind::Permutation(pairs), Witness::Coordinates { from }) => {
                Some(pairs.iter().all(|(a, b)| (a < from) == (b < from)))
            }
            (EndoKind::Permutation(_), Witness::Base | Witness::Multiples(_)) => Some(true),
            (EndoKind::Conjugation(_), _) => w.is_normal_in(&self.domain).ok().flatten().filter(|n| *n),
            _ => None,
        }
    }

    /// The restriction `f|H` to an `f`-invariant subgroup.
    pub fn restrict(&self, w: Witness) -> Result<Endomorphism> {
        let report = self.invariance_report(&w)?;
        if report.invariant != Some(true) {
            return Err(Error::Precondition(format!(
                "{w} is not known to be invariant under {}",
                self.label()
            )));
        }
        let sub = Group::subgroup_view(&self.domain, w)?;
        Ok(Endomorphism::make(&sub, EndoKind::Restriction(self.clone())))
    }

    /// The map induced on `G / N` for an `f`-invariant normal subgroup `N`.
    pub fn induced_quotient_map(&self, w: Witness) -> Result<Endomorphism> {
        let report = self.invariance_report(&w)?;
        if report.invariant != Some(true) {
            return Err(Error::Precondition(format!(
                "{w} is not known to be invariant under {}",
                self.label()
            )));
        }
        let q = Group::quotient_by(&self.domain, w.clone())?;
        if self.domain.is_finite() {
            for x in self.domain.elements(DEFAULT_BUDGET)? {
                let r = w.reduce(&self.domain, &x)?;
                if w.reduce(&self.domain, &self.apply(&x))? != w.reduce(&self.domain, &self.apply(&r))? {
                    return Err(Error::Invariant("induced map is not well defined".into()));
                }
            }
        }
        Ok(Endomorphism::make(&q, EndoKind::Induced(self.clone())))
    }

    /// The `m`-th iterate `f^m`.
    pub fn power_iterate(&self, m: u32) -> Endomorphism {
        if m == 0 {
            return Endomorphism::identity(&self.domain);
        }
        match &*self.kind {
            EndoKind::Identity => self.clone(),
            EndoKind::Shift(k) => Endomorphism::make(&self.domain, EndoKind::Shift(k * m as i64)),
            _ => {
                let mut acc = self.clone();
                for _ in 1..m {
                    acc = Endomorphism::make(&self.domain, EndoKind::Compose(self.clone(), acc));
                }
                acc
            }
        }
    }

    /// The inverse map, when the rule is invertible in a known way.
    pub fn inverse(&self) -> Option<Endomorphism> {
        let g = &self.domain;
        let kind = match &*self.kind {
            EndoKind::Identity => EndoKind::Identity,
            EndoKind::Automorphism { forward, inverse } => {
                EndoKind::Automorphism { forward: inverse.clone(), inverse: forward.clone() }
            }
            EndoKind::Shift(k) if self.index_set() == Some(IndexSet::Z) || *k == 0 => EndoKind::Shift(-k),
            EndoKind::Conjugation(x) => EndoKind::Conjugation(g.inv(x)),
            EndoKind::Permutation(pairs) => EndoKind::Permutation(pairs.iter().map(|(a, b)| (*b, *a)).collect()),
            EndoKind::Power(u) => {
                let e = power_exponent(g)?;
                let (d, x, _) = ext_gcd(*u as i128, e as i128);
                if d != 1 {
                    return None;
                }
                EndoKind::Power(x.rem_euclid(e as i128) as u64)
            }
            EndoKind::Diagonal(ms) => EndoKind::Diagonal(ms.iter().map(|m| m.inverse()).collect::<Option<_>>()?),
            EndoKind::Compose(a, b) => EndoKind::Compose(b.inverse()?, a.inverse()?),
            EndoKind::Table(_) if g.is_finite() => {
                let es = g.elements(DEFAULT_BUDGET).ok()?;
                let mut inv = HashMap::new();
                for x in &es {
                    if inv.insert(self.apply(x), x.clone()).is_some() {
                        return None;
                    }
                }
                EndoKind::Table(inv)
            }
            _ => return None,
        };
        Some(Endomorphism::make(g, kind))
    }

    /// `alpha . f . alpha^-1` for an automorphism `alpha` of the same group.
    pub fn conjugated_by(&self, alpha: &Endomorphism) -> Result<Endomorphism> {
        let inv = alpha
            .inverse()
            .ok_or_else(|| Error::Precondition(format!("{} has no known inverse", alpha.label())))?;
        Endomorphism::compose(alpha, &Endomorphism::compose(self, &inv)?)
    }

    /// Whether the rule is an automorphism by construction.
    pub fn is_declared_automorphism(&self) -> bool {
        match &*self.kind {
            EndoKind::Diagonal(ms) => ms.iter().all(|m| m.is_declared_automorphism()),
            EndoKind::Compose(a, b) => a.is_declared_automorphism() && b.is_declared_automorphism(),
            EndoKind::Power(_) => self.known_injective() == Some(true) && self.known_surjective() == Some(true),
            _ => self.is_automorphism_rule(),
        }
    }
}

fn power_admissible(g: &Group) -> bool {
    match g.node() {
        Node::Semidirect(sd) => sd.base.known_abelian() == Some(true),
        Node::Product(fs) => fs.iter().all(power_admissible),
        Node::Sub { parent, .. } | Node::Quotient { parent, .. } => power_admissible(parent),
        _ => g.known_abelian() == Some(true),
    }
}

/// Exponent governing power maps: that of the base for semidirect products.
fn power_exponent(g: &Group) -> Option<u64> {
    match g.node() {
        Node::Semidirect(sd) => sd.base.exponent(),
        Node::Product(fs) => fs.iter().try_fold(1u64, |acc, f| Some(crate::numtheory::lcm(acc, power_exponent(f)?))),
        _ => g.exponent(),
    }
}

fn power_apply(g: &Group, x: &Elem, u: u64) -> Elem {
    match g.node() {
        Node::Semidirect(sd) => {
            let p = x.parts();
            Elem::tuple(vec![sd.base.pow(&p[0], u), p[1].clone()])
        }
        Node::Product(fs) => Elem::tuple(fs.iter().zip(x.parts()).map(|(f, y)| power_apply(f, y, u)).collect()),
        Node::Quotient { parent, witness } => witness.reduce_unchecked(parent, &power_apply(parent, x, u)),
        _ => g.pow(x, u),
    }
}

/// `u^m` reduced modulo the power exponent of `g`, for iterating power maps.
pub fn power_coefficient(g: &Group, u: u64, m: u64) -> Option<u64> {
    power_exponent(g).map(|e| pow_mod(u, m, e.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> Group {
        Group::cyclic(n).unwrap()
    }

    fn q8_elem(name: &str) -> Elem {
        Group::quaternion().parse_element(&serde_json::json!(name)).unwrap()
    }

    #[test]
    fn shift_is_injective_not_surjective_on_n() {
        let g = Group::restricted_sum(z(2), IndexSet::N).unwrap();
        let s = Endomorphism::shift(&g, 1).unwrap();
        assert!(s.verify_homomorphism(0).holds());
        assert_eq!(s.known_surjective(), Some(false));
        assert!(s.inverse().is_none());
        assert!(Endomorphism::shift(&g, -1).is_err());
    }

    #[test]
    fn q8_swap_table_is_not_a_homomorphism_pointwise() {
        let q = Group::quaternion();
        let f = Endomorphism::table(&q, vec![(q8_elem("i"), q8_elem("j")), (q8_elem("j"), q8_elem("i"))]).unwrap();
        let r = f.verify_homomorphism(0);
        assert!(r.exhaustive);
        assert!(!r.holds());
        let g = Endomorphism::from_generator_images(&q, &[(q8_elem("i"), q8_elem("j")), (q8_elem("j"), q8_elem("i"))])
            .unwrap();
        assert!(g.verify_homomorphism(0).holds());
        assert_eq!(g.apply(&q8_elem("k")), q8_elem("-k"));
    }

    #[test]
    fn inconsistent_generator_images_rejected() {
        let q = Group::quaternion();
        assert!(Endomorphism::from_generator_images(&q, &[(q8_elem("i"), q8_elem("i")), (q8_elem("j"), q8_elem("-1"))])
            .is_err());
    }

    #[test]
    fn power_on_semidirect_matches_conjugation_by_t() {
        let g = Group::semidirect_power(z(9), 3, 4).unwrap();
        let p = Endomorphism::power(&g, 4).unwrap();
        let t = Elem::tuple(vec![Elem::Res(0), Elem::Res(1)]);
        let c = Endomorphism::conjugation(&g, t).unwrap();
        for x in g.elements(100).unwrap() {
            assert_eq!(p.apply(&x), c.apply(&x));
        }
        assert!(p.verify_homomorphism(0).holds());
    }

    #[test]
    fn invariance_of_coordinates_under_shift() {
        let g = Group::restricted_sum(z(2), IndexSet::N).unwrap();
        let s = Endomorphism::shift(&g, 1).unwrap();
        let r = s.invariance_report(&Witness::Coordinates { from: 1 }).unwrap();
        assert_eq!(r.invariant, Some(true));
        assert_eq!(r.stable, Some(false));
        assert_eq!(r.kernel_contained, Some(true));
    }

    #[test]
    fn restriction_requires_invariance() {
        let g = Group::restricted_sum(z(2), IndexSet::N).unwrap();
        let p = Endomorphism::permutation(&g, vec![(0, 3), (3, 0)]).unwrap();
        assert!(p.restrict(Witness::Coordinates { from: 1 }).is_err());
        assert!(p.restrict(Witness::Coordinates { from: 4 }).is_ok());
    }

    #[test]
    fn induced_map_on_quotient() {
        let g = Group::restricted_sum(z(2), IndexSet::N).unwrap();
        let s = Endomorphism::shift(&g, 1).unwrap();
        let q = s.induced_quotient_map(Witness::Coordinates { from: 3 }).unwrap();
        assert_eq!(q.domain().size(), Some(8));
        assert!(q.verify_homomorphism(0).holds());
        let e2 = Elem::sparse(vec![(2, Elem::Res(1))]);
        assert_eq!(q.apply(&e2), Elem::empty_sparse());
    }

    #[test]
    fn power_inverse() {
        let g = Group::restricted_sum(z(9), IndexSet::N).unwrap();
        let p = Endomorphism::power(&g, 2).unwrap();
        let inv = p.inverse().unwrap();
        let x = Elem::sparse(vec![(0, Elem::Res(1)), (4, Elem::Res(7))]);
        assert_eq!(inv.apply(&p.apply(&x)), x);
    }
}
