//! Subgroup witnesses: finite descriptions of (possibly infinite) subgroups.
//!
//! A witness is interpreted relative to a parent group. Structured witnesses
//! (`Multiples`, `Torsion`, `Coordinates`, `Factors`, `Base`) support
//! membership tests and, where the subgroup is normal, canonical coset
//! representatives for quotients. `Finite` wraps an enumerated subgroup.

use std::fmt;

use rand::Rng;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::group::{Group, IndexSet, Node};
use crate::numtheory::gcd;
use crate::subgroup::{closure, FiniteSubgroup, DEFAULT_BUDGET};

#[derive(Clone, Debug)]
pub enum Witness {
    /// The whole parent group.
    Whole,
    /// The identity subgroup.
    Trivial,
    /// An explicitly enumerated finite subgroup.
    Finite(FiniteSubgroup),
    /// `G^k`: componentwise `k`-th powers; for `A x| Z(m)` this is `A^k`.
    Multiples(u64),
    /// `G[k]`: elements with `x^k = e`, componentwise.
    Torsion(u64),
    /// Elements of a restricted sum supported on indices `>= from`.
    Coordinates { from: i64 },
    /// One witness per factor of a direct product.
    Factors(Vec<Witness>),
    /// The base `A` of a semidirect product `A x| Z(m)`.
    Base,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Whole => f.write_str("whole"),
            Witness::Trivial => f.write_str("trivial"),
            Witness::Finite(h) => {
                let gens: Vec<String> = h.generators().iter().map(|g| h.group().encode(g).to_string()).collect();
                write!(f, "<{}>", gens.join(","))
            }
            Witness::Multiples(k) => write!(f, "G^{k}"),
            Witness::Torsion(k) => write!(f, "G[{k}]"),
            Witness::Coordinates { from } => write!(f, "coords>={from}"),
            Witness::Factors(ws) => {
                let parts: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
                write!(f, "[{}]", parts.join(" x "))
            }
            Witness::Base => f.write_str("base"),
        }
    }
}

fn q8_multiples_contains(k: u64, x: u64) -> bool {
    match k % 4 {
        1 | 3 => true,
        2 => x < 2,
        _ => x == 0,
    }
}

fn q8_multiples_reduce(k: u64, x: u64) -> u64 {
    match k % 4 {
        1 | 3 => 0,
        2 => x & !1,
        _ => x,
    }
}

fn q8_torsion_k(k: u64) -> u64 {
    // Q8[k] = Q8^(4/gcd(4,k)) in the encoding above
    match k % 4 {
        1 | 3 => 4,
        2 => 2,
        _ => 1,
    }
}

impl Witness {
    /// Checks that this witness makes sense for `parent`.
    pub fn check_applicable(&self, parent: &Group) -> Result<()> {
        match (self, parent.node()) {
            (Witness::Whole | Witness::Trivial, _) => Ok(()),
            (Witness::Finite(h), _) => h.group().ensure_same(parent),
            (Witness::Multiples(k) | Witness::Torsion(k), _) if *k == 0 => {
                Err(Error::param("power witnesses need a positive exponent"))
            }
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Cyclic(_) | Node::Quaternion) => Ok(()),
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Product(fs)) => {
                fs.iter().try_for_each(|f| self.check_applicable(f))
            }
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Sum { component, .. }) => {
                self.check_applicable(component)
            }
            (Witness::Multiples(_), Node::Semidirect(sd)) => self.check_applicable(&sd.base),
            (Witness::Coordinates { .. }, Node::Sum { .. }) => Ok(()),
            (Witness::Coordinates { .. }, Node::Semidirect(sd)) if sd.base.as_sum().is_some() => Ok(()),
            (Witness::Factors(ws), Node::Product(fs)) if ws.len() == fs.len() => {
                ws.iter().zip(fs).try_for_each(|(w, f)| w.check_applicable(f))
            }
            (Witness::Base, Node::Semidirect(_)) => Ok(()),
            _ => Err(Error::unsupported(format!("witness {self} does not apply to {parent}"))),
        }
    }

    pub fn contains(&self, parent: &Group, x: &Elem) -> bool {
        match (self, parent.node()) {
            (Witness::Whole, _) => true,
            (Witness::Trivial, _) => parent.is_identity(x),
            (Witness::Finite(h), _) => h.contains(x),
            (Witness::Multiples(k), Node::Cyclic(n)) => x.res() % gcd(*k, *n) == 0,
            (Witness::Multiples(k), Node::Quaternion) => q8_multiples_contains(*k, x.res()),
            (Witness::Torsion(k), Node::Cyclic(n)) => x.res() % (n / gcd(*k, *n)) == 0,
            (Witness::Torsion(k), Node::Quaternion) => q8_multiples_contains(q8_torsion_k(*k), x.res()),
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Product(fs)) => {
                fs.iter().zip(x.parts()).all(|(f, y)| self.contains(f, y))
            }
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Sum { component, .. }) => {
                x.coords().iter().all(|(_, c)| self.contains(component, c))
            }
            (Witness::Multiples(_), Node::Semidirect(sd)) => {
                let p = x.parts();
                p[1].res() == 0 && self.contains(&sd.base, &p[0])
            }
            (Witness::Coordinates { from }, Node::Sum { .. }) => x.coords().iter().all(|(i, _)| i >= from),
            (Witness::Coordinates { .. }, Node::Semidirect(sd)) => {
                let p = x.parts();
                p[1].res() == 0 && self.contains(&sd.base, &p[0])
            }
            (Witness::Factors(ws), Node::Product(fs)) => {
                ws.iter().zip(fs).zip(x.parts()).all(|((w, f), y)| w.contains(f, y))
            }
            (Witness::Base, Node::Semidirect(_)) => x.parts()[1].res() == 0,
            _ => false,
        }
    }

    /// Canonical (byte-minimal) representative of the coset `x H`.
    pub fn reduce(&self, parent: &Group, x: &Elem) -> Result<Elem> {
        Ok(match (self, parent.node()) {
            (Witness::Whole, _) => parent.identity(),
            (Witness::Trivial, _) => x.clone(),
            (Witness::Finite(h), _) => {
                h.elements().iter().map(|y| parent.mul(x, y)).min().expect("subgroups are nonempty")
            }
            (Witness::Multiples(k), Node::Cyclic(n)) => Elem::Res(x.res() % gcd(*k, *n)),
            (Witness::Multiples(k), Node::Quaternion) => Elem::Res(q8_multiples_reduce(*k, x.res())),
            (Witness::Torsion(k), Node::Cyclic(n)) => Elem::Res(x.res() % (n / gcd(*k, *n))),
            (Witness::Torsion(k), Node::Quaternion) => Elem::Res(q8_multiples_reduce(q8_torsion_k(*k), x.res())),
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Product(fs)) => {
                Elem::tuple(fs.iter().zip(x.parts()).map(|(f, y)| self.reduce(f, y)).collect::<Result<_>>()?)
            }
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Sum { component, .. }) => {
                let id = component.identity();
                let mut out = Vec::new();
                for (i, c) in x.coords() {
                    let r = self.reduce(component, c)?;
                    if r != id {
                        out.push((*i, r));
                    }
                }
                Elem::sparse(out)
            }
            (Witness::Multiples(_) | Witness::Coordinates { .. }, Node::Semidirect(sd)) => {
                let p = x.parts();
                Elem::tuple(vec![self.reduce(&sd.base, &p[0])?, p[1].clone()])
            }
            (Witness::Coordinates { from }, Node::Sum { .. }) => {
                Elem::sparse(x.coords().iter().filter(|(i, _)| i < from).cloned().collect())
            }
            (Witness::Factors(ws), Node::Product(fs)) => Elem::tuple(
                ws.iter().zip(fs).zip(x.parts()).map(|((w, f), y)| w.reduce(f, y)).collect::<Result<_>>()?,
            ),
            (Witness::Base, Node::Semidirect(sd)) => Elem::tuple(vec![sd.base.identity(), x.parts()[1].clone()]),
            _ => return Err(Error::unsupported(format!("no coset representatives for {self} in {parent}"))),
        })
    }

    pub(crate) fn reduce_unchecked(&self, parent: &Group, x: &Elem) -> Elem {
        self.reduce(parent, x).expect("quotient witness was validated at construction")
    }

    /// Normality in `parent`: `Some(answer)` when decidable from the structure.
    pub fn is_normal_in(&self, parent: &Group) -> Result<Option<bool>> {
        Ok(match self {
            Witness::Whole | Witness::Trivial => Some(true),
            Witness::Multiples(_) | Witness::Torsion(_) | Witness::Coordinates { .. } | Witness::Base => Some(true),
            Witness::Factors(ws) => {
                let fs = parent.factors().ok_or_else(|| Error::structure("factor witness on a non-product"))?;
                let mut all = Some(true);
                for (w, f) in ws.iter().zip(fs) {
                    match w.is_normal_in(f)? {
                        Some(true) => {}
                        Some(false) => return Ok(Some(false)),
                        None => all = None,
                    }
                }
                all
            }
            Witness::Finite(h) => finite_normality(parent, h)?,
        })
    }

    pub fn subgroup_is_finite(&self, parent: &Group) -> bool {
        if parent.is_finite() {
            return true;
        }
        match (self, parent.node()) {
            (Witness::Trivial | Witness::Finite(_), _) => true,
            (Witness::Whole, _) => false,
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Product(fs)) => {
                fs.iter().all(|f| self.subgroup_is_finite(f))
            }
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Sum { component, .. }) => {
                component.elements(DEFAULT_BUDGET).map(|es| es.iter().all(|c| component.is_identity(c) || !self.contains(component, c))).unwrap_or(false)
            }
            (Witness::Multiples(_) | Witness::Coordinates { .. }, Node::Semidirect(sd)) => {
                self.subgroup_is_finite(&sd.base)
            }
            (Witness::Factors(ws), Node::Product(fs)) => ws.iter().zip(fs).all(|(w, f)| w.subgroup_is_finite(f)),
            (Witness::Base, Node::Semidirect(sd)) => sd.base.is_finite(),
            _ => false,
        }
    }

    pub fn index_is_finite(&self, parent: &Group) -> bool {
        if parent.is_finite() {
            return true;
        }
        match (self, parent.node()) {
            (Witness::Whole, _) => true,
            (Witness::Trivial | Witness::Finite(_), _) => false,
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Product(fs)) => {
                fs.iter().all(|f| self.index_is_finite(f))
            }
            (Witness::Multiples(_) | Witness::Torsion(_), Node::Sum { component, .. }) => component
                .elements(DEFAULT_BUDGET)
                .map(|es| es.iter().all(|c| self.contains(component, c)))
                .unwrap_or(false),
            (Witness::Multiples(_) | Witness::Coordinates { .. }, Node::Semidirect(sd)) => {
                self.index_is_finite(&sd.base)
            }
            (Witness::Coordinates { .. }, Node::Sum { index, .. }) => *index == IndexSet::N,
            (Witness::Factors(ws), Node::Product(fs)) => ws.iter().zip(fs).all(|(w, f)| w.index_is_finite(f)),
            (Witness::Base, Node::Semidirect(_)) => true,
            _ => false,
        }
    }

    /// Block size whose generators, reduced, generate a finite quotient.
    pub(crate) fn generating_block(&self, parent: &Group) -> usize {
        match (self, parent.node()) {
            (Witness::Coordinates { from }, _) => (*from).max(1) as usize,
            (Witness::Factors(ws), Node::Product(fs)) => {
                ws.iter().zip(fs).map(|(w, f)| w.generating_block(f)).max().unwrap_or(1)
            }
            _ => 1,
        }
    }

    pub(crate) fn sample_member<R: Rng + ?Sized>(&self, parent: &Group, rng: &mut R, spread: usize) -> Elem {
        match (self, parent.node()) {
            (Witness::Whole, _) => parent.sample(rng, spread),
            (Witness::Trivial, _) => parent.identity(),
            (Witness::Finite(h), _) => h.elements()[rng.gen_range(0..h.elements().len())].clone(),
            (Witness::Multiples(k), Node::Semidirect(sd)) => {
                Elem::tuple(vec![sd.base.pow(&sd.base.sample(rng, spread), *k), Elem::Res(0)])
            }
            (Witness::Multiples(k), _) => parent.pow(&parent.sample(rng, spread), *k),
            (Witness::Torsion(k), _) => {
                let e = parent.exponent().unwrap_or(1);
                parent.pow(&parent.sample(rng, spread), e / gcd(e, *k))
            }
            (Witness::Coordinates { from }, Node::Sum { .. }) => {
                let s = parent.sample(rng, spread);
                Elem::sparse(
                    s.coords().iter().map(|(i, c)| (i + from.max(&0), c.clone())).filter(|(i, _)| i >= from).collect(),
                )
            }
            (Witness::Coordinates { .. }, Node::Semidirect(sd)) => {
                Elem::tuple(vec![self.sample_member(&sd.base, rng, spread), Elem::Res(0)])
            }
            (Witness::Factors(ws), Node::Product(fs)) => {
                Elem::tuple(ws.iter().zip(fs).map(|(w, f)| w.sample_member(f, rng, spread)).collect())
            }
            (Witness::Base, Node::Semidirect(sd)) => Elem::tuple(vec![sd.base.sample(rng, spread), Elem::Res(0)]),
            _ => parent.identity(),
        }
    }

    /// Enumerates the subgroup when it is finite.
    pub fn to_finite(&self, parent: &Group, cap: usize) -> Result<FiniteSubgroup> {
        match self {
            Witness::Finite(h) => return Ok(h.clone()),
            Witness::Trivial => return closure(parent, &[], cap),
            _ => {}
        }
        if !self.subgroup_is_finite(parent) {
            return Err(Error::unsupported(format!("{self} is infinite in {parent}")));
        }
        let pool = if parent.is_finite() {
            parent.elements(cap)?
        } else {
            closure(parent, &parent.block_generators(1), cap)?.elements().to_vec()
        };
        let inside: Vec<Elem> = pool.into_iter().filter(|x| self.contains(parent, x)).collect();
        let gens = crate::subgroup::small_generating_set(parent, &inside);
        closure(parent, &gens, cap)
    }

    pub fn is_whole(&self) -> bool {
        matches!(self, Witness::Whole)
    }
}

fn finite_normality(parent: &Group, h: &FiniteSubgroup) -> Result<Option<bool>> {
    if parent.known_abelian() == Some(true) {
        return Ok(Some(true));
    }
    let conj_ok = |gens: &[Elem]| {
        gens.iter().all(|g| h.generators().iter().all(|x| h.contains(&parent.conjugate(g, x))))
    };
    if parent.is_finite() {
        let gens = parent.block_generators(1);
        return Ok(Some(conj_ok(&gens)));
    }
    let (lo, hi) = h
        .elements()
        .iter()
        .filter_map(|x| parent.support_window(x))
        .fold((0, 0), |(a, b), (c, d)| (a.min(c), b.max(d)));
    if is_local(parent) {
        // generators supported outside the window commute with H
        return Ok(Some(conj_ok(&parent.window_generators(lo - 1, hi + 1))));
    }
    if let Some(sd) = parent.semidirect() {
        if h.elements().iter().all(|x| x.parts()[1].res() == 0) && sd.base.known_abelian() == Some(true) {
            // A is abelian, so only the acting generator matters
            let t = Elem::tuple(vec![sd.base.identity(), Elem::Res(1 % sd.order)]);
            return Ok(Some(conj_ok(&[t])));
        }
    }
    Ok(None)
}

fn is_local(g: &Group) -> bool {
    match g.node() {
        Node::Cyclic(_) | Node::Quaternion => true,
        Node::Product(fs) => fs.iter().all(is_local),
        Node::Sum { component, .. } => is_local(component),
        _ => false,
    }
}
