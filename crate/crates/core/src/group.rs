//! Ambient groups: constructor trees with computable arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::elem::{Elem, ElementCode};
use crate::error::{Error, Result};
use crate::numtheory::{gcd, lcm, pow_mod};
use crate::witness::Witness;

/// Upper bound on element orders explored by brute-force order searches.
pub const ORDER_CAP: u64 = 1 << 24;

/// Index set of a restricted direct sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    N,
    Z,
}

/// Parameters of an Iwasawa group `A x| Z(p^m)` with `t a t^-1 = a^(1+p^s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IwasawaParams {
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub s: u32,
}

/// How the cyclic factor of a semidirect product acts on its base.
#[derive(Clone, Debug)]
pub enum Action {
    /// `a -> a^u`; `coeffs[x]` holds `u^x` reduced modulo the base exponent.
    Power { u: u64, coeffs: Vec<u64> },
    /// Explicit automorphism of a finite base; `maps[x]` is the `x`-th power.
    Table { maps: Vec<HashMap<Elem, Elem>> },
}

impl Action {
    pub fn is_trivial(&self) -> bool {
        match self {
            Action::Power { coeffs, .. } => coeffs.iter().all(|&c| c == 1),
            Action::Table { maps } => maps.iter().all(|m| m.iter().all(|(k, v)| k == v)),
        }
    }
}

#[derive(Debug)]
pub(crate) struct Semidirect {
    pub base: Group,
    pub order: u64,
    pub action: Action,
    pub iwasawa: Option<IwasawaParams>,
}

pub(crate) enum Node {
    Cyclic(u64),
    Quaternion,
    Product(Vec<Group>),
    Sum { component: Group, index: IndexSet },
    Semidirect(Semidirect),
    Sub { parent: Group, witness: Witness },
    Quotient { parent: Group, witness: Witness },
}

/// A (possibly infinite) locally finite group with computable arithmetic.
///
/// Cloning is cheap; the constructor tree is shared.
#[derive(Clone)]
pub struct Group {
    node: Arc<Node>,
    label: Arc<str>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.node, &other.node) || self.label == other.label
    }
}

const Q8_NAMES: [&str; 8] = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"];

// (unit, sign) of the product of units 1, i, j, k
const Q8_UNIT_MUL: [[(u64, u64); 4]; 4] = [
    [(0, 0), (1, 0), (2, 0), (3, 0)],
    [(1, 0), (0, 1), (3, 0), (2, 1)],
    [(2, 0), (3, 1), (0, 1), (1, 0)],
    [(3, 0), (2, 0), (1, 1), (0, 1)],
];

fn q8_mul(a: u64, b: u64) -> u64 {
    let (u, s) = Q8_UNIT_MUL[(a / 2) as usize][(b / 2) as usize];
    2 * u + ((a % 2) ^ (b % 2) ^ s)
}

fn q8_inv(a: u64) -> u64 {
    if a < 2 {
        a
    } else {
        a ^ 1
    }
}

fn cyclic_width(n: u64) -> usize {
    let bits = 64 - (n.saturating_sub(1)).leading_zeros() as usize;
    bits.div_ceil(8).max(1)
}

fn encode_index(i: i64) -> [u8; 8] {
    ((i as u64) ^ (1u64 << 63)).to_be_bytes()
}

fn decode_index(b: &[u8]) -> i64 {
    let mut arr = [0u8; 8];
    arr.copy_from_slice(b);
    (u64::from_be_bytes(arr) ^ (1u64 << 63)) as i64
}

impl Group {
    fn from_node(node: Node) -> Group {
        let label = describe(&node);
        Group { node: Arc::new(node), label: label.into() }
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    pub fn cyclic(n: u64) -> Result<Group> {
        if n == 0 {
            return Err(Error::param("cyclic group order must be at least 1"));
        }
        Ok(Group::from_node(Node::Cyclic(n)))
    }

    pub fn quaternion() -> Group {
        Group::from_node(Node::Quaternion)
    }

    pub fn product(factors: Vec<Group>) -> Group {
        Group::from_node(Node::Product(factors))
    }

    /// Restricted direct sum of copies of a finite `component` indexed by `index`.
    pub fn restricted_sum(component: Group, index: IndexSet) -> Result<Group> {
        if !component.is_finite() {
            return Err(Error::param("restricted sums need a finite component group"));
        }
        Ok(Group::from_node(Node::Sum { component, index }))
    }

    /// `base x| Z(order)` where the generator acts as `a -> a^u`.
    pub fn semidirect_power(base: Group, order: u64, u: u64) -> Result<Group> {
        Group::semidirect_power_tagged(base, order, u, None)
    }

    pub(crate) fn semidirect_power_tagged(
        base: Group,
        order: u64,
        u: u64,
        iwasawa: Option<IwasawaParams>,
    ) -> Result<Group> {
        if order == 0 {
            return Err(Error::param("acting cyclic group order must be at least 1"));
        }
        if base.known_abelian() != Some(true) {
            return Err(Error::param("power actions need an abelian base group"));
        }
        let e = base
            .exponent()
            .ok_or_else(|| Error::param("power actions need a base of bounded exponent"))?;
        if gcd(u % e.max(1), e) != 1 && e > 1 {
            return Err(Error::param(format!("power action exponent {u} is not a unit modulo the base exponent {e}")));
        }
        if e > 1 && pow_mod(u, order, e) != 1 {
            return Err(Error::param(format!(
                "power action a -> a^{u} has order not dividing {order} (u^{order} mod {e} = {})",
                pow_mod(u, order, e)
            )));
        }
        let coeffs = (0..order).map(|x| if e > 1 { pow_mod(u, x, e) } else { 1 }).collect();
        Ok(Group::from_node(Node::Semidirect(Semidirect { base, order, action: Action::Power { u, coeffs }, iwasawa })))
    }

    /// `base x| Z(order)` where the generator acts by the automorphism extending
    /// the given images of generators of the finite base.
    pub fn semidirect_table(base: Group, order: u64, images: &[(Elem, Elem)]) -> Result<Group> {
        if order == 0 {
            return Err(Error::param("acting cyclic group order must be at least 1"));
        }
        if !base.is_finite() {
            return Err(Error::param("table actions need a finite base group"));
        }
        let map = crate::morphism::extend_generator_images(&base, images)?;
        let elements = base.elements(1 << 16)?;
        let mut seen: Vec<&Elem> = map.values().collect();
        seen.sort();
        seen.dedup();
        if seen.len() != elements.len() {
            return Err(Error::param("table action is not bijective"));
        }
        let mut maps = vec![elements.iter().map(|a| (a.clone(), a.clone())).collect::<HashMap<_, _>>()];
        for x in 1..=order {
            let prev = &maps[(x - 1) as usize];
            let next: HashMap<Elem, Elem> = elements.iter().map(|a| (a.clone(), map[&prev[a]].clone())).collect();
            if x == order {
                if next.iter().any(|(k, v)| k != v) {
                    return Err(Error::param(format!("table action has order not dividing {order}")));
                }
            } else {
                maps.push(next);
            }
        }
        Ok(Group::from_node(Node::Semidirect(Semidirect { base, order, action: Action::Table { maps }, iwasawa: None })))
    }

    /// The subgroup described by `witness`, viewed as a group with the parent's arithmetic.
    pub fn subgroup_view(parent: &Group, witness: Witness) -> Result<Group> {
        witness.check_applicable(parent)?;
        Ok(Group::from_node(Node::Sub { parent: parent.clone(), witness }))
    }

    /// The quotient of `parent` by the normal subgroup described by `witness`,
    /// with byte-minimal coset representatives.
    pub fn quotient_by(parent: &Group, witness: Witness) -> Result<Group> {
        witness.check_applicable(parent)?;
        match witness.is_normal_in(parent)? {
            Some(true) => {}
            Some(false) => return Err(Error::structure(format!("{witness} is not normal in {parent}"))),
            None => return Err(Error::structure(format!("cannot decide normality of {witness} in {parent}"))),
        }
        // reduction must be available
        witness.reduce(parent, &parent.identity())?;
        Ok(Group::from_node(Node::Quotient { parent: parent.clone(), witness }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ensure_same(&self, other: &Group) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AmbientMismatch { left: self.label.to_string(), right: other.label.to_string() })
        }
    }

    /// The parent group and witness when this is a subgroup view.
    pub fn as_subgroup_view(&self) -> Option<(&Group, &Witness)> {
        match self.node() {
            Node::Sub { parent, witness } => Some((parent, witness)),
            _ => None,
        }
    }

    /// The parent group and kernel witness when this is a quotient.
    pub fn as_quotient(&self) -> Option<(&Group, &Witness)> {
        match self.node() {
            Node::Quotient { parent, witness } => Some((parent, witness)),
            _ => None,
        }
    }

    pub fn iwasawa_params(&self) -> Option<IwasawaParams> {
        match self.node() {
            Node::Semidirect(sd) => sd.iwasawa,
            _ => None,
        }
    }

    pub(crate) fn semidirect(&self) -> Option<&Semidirect> {
        match self.node() {
            Node::Semidirect(sd) => Some(sd),
            _ => None,
        }
    }

    /// Index set and component group of a restricted sum.
    pub fn as_sum(&self) -> Option<(&Group, IndexSet)> {
        match self.node() {
            Node::Sum { component, index } => Some((component, *index)),
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<&[Group]> {
        match self.node() {
            Node::Product(f) => Some(f),
            _ => None,
        }
    }

    pub fn identity(&self) -> Elem {
        match self.node() {
            Node::Cyclic(_) | Node::Quaternion => Elem::Res(0),
            Node::Product(fs) => Elem::tuple(fs.iter().map(|f| f.identity()).collect()),
            Node::Sum { .. } => Elem::empty_sparse(),
            Node::Semidirect(sd) => Elem::tuple(vec![sd.base.identity(), Elem::Res(0)]),
            Node::Sub { parent, .. } | Node::Quotient { parent, .. } => parent.identity(),
        }
    }

    pub fn is_identity(&self, a: &Elem) -> bool {
        *a == self.identity()
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match self.node() {
            Node::Cyclic(n) => Elem::Res(((a.res() as u128 + b.res() as u128) % *n as u128) as u64),
            Node::Quaternion => Elem::Res(q8_mul(a.res(), b.res())),
            Node::Product(fs) => {
                Elem::tuple(fs.iter().zip(a.parts()).zip(b.parts()).map(|((f, x), y)| f.mul(x, y)).collect())
            }
            Node::Sum { component, .. } => {
                let (xs, ys) = (a.coords(), b.coords());
                let mut out = Vec::with_capacity(xs.len() + ys.len());
                let (mut i, mut j) = (0, 0);
                let id = component.identity();
                while i < xs.len() || j < ys.len() {
                    if j == ys.len() || (i < xs.len() && xs[i].0 < ys[j].0) {
                        out.push(xs[i].clone());
                        i += 1;
                    } else if i == xs.len() || ys[j].0 < xs[i].0 {
                        out.push(ys[j].clone());
                        j += 1;
                    } else {
                        let c = component.mul(&xs[i].1, &ys[j].1);
                        if c != id {
                            out.push((xs[i].0, c));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                Elem::sparse(out)
            }
            Node::Semidirect(sd) => {
                let (pa, pb) = (a.parts(), b.parts());
                let x1 = pa[1].res();
                let acted = sd.act(x1, &pb[0]);
                Elem::tuple(vec![sd.base.mul(&pa[0], &acted), Elem::Res((x1 + pb[1].res()) % sd.order)])
            }
            Node::Sub { parent, .. } => parent.mul(a, b),
            Node::Quotient { parent, witness } => witness.reduce_unchecked(parent, &parent.mul(a, b)),
        }
    }

    pub fn inv(&self, a: &Elem) -> Elem {
        match self.node() {
            Node::Cyclic(n) => Elem::Res((n - a.res() % n) % n),
            Node::Quaternion => Elem::Res(q8_inv(a.res())),
            Node::Product(fs) => Elem::tuple(fs.iter().zip(a.parts()).map(|(f, x)| f.inv(x)).collect()),
            Node::Sum { component, .. } => {
                Elem::sparse(a.coords().iter().map(|(i, c)| (*i, component.inv(c))).collect())
            }
            Node::Semidirect(sd) => {
                let p = a.parts();
                let x = p[1].res();
                let nx = (sd.order - x) % sd.order;
                Elem::tuple(vec![sd.act(nx, &sd.base.inv(&p[0])), Elem::Res(nx)])
            }
            Node::Sub { parent, .. } => parent.inv(a),
            Node::Quotient { parent, witness } => witness.reduce_unchecked(parent, &parent.inv(a)),
        }
    }

    pub fn pow(&self, a: &Elem, k: u64) -> Elem {
        match self.node() {
            Node::Cyclic(n) => Elem::Res(((a.res() as u128 * k as u128) % *n as u128) as u64),
            Node::Product(fs) => Elem::tuple(fs.iter().zip(a.parts()).map(|(f, x)| f.pow(x, k)).collect()),
            Node::Sum { component, .. } => {
                let id = component.identity();
                Elem::sparse(
                    a.coords()
                        .iter()
                        .filter_map(|(i, c)| {
                            let p = component.pow(c, k);
                            (p != id).then_some((*i, p))
                        })
                        .collect(),
                )
            }
            Node::Sub { parent, .. } => parent.pow(a, k),
            Node::Quotient { parent, witness } => witness.reduce_unchecked(parent, &parent.pow(a, k)),
            _ => {
                let mut result = self.identity();
                let mut base = a.clone();
                let mut k = k;
                while k > 0 {
                    if k & 1 == 1 {
                        result = self.mul(&result, &base);
                    }
                    base = self.mul(&base, &base);
                    k >>= 1;
                }
                result
            }
        }
    }

    /// `a^k` for a signed exponent.
    pub fn pow_signed(&self, a: &Elem, k: i128) -> Result<Elem> {
        let o = self.order_of(a)? as i128;
        Ok(self.pow(a, k.rem_euclid(o) as u64))
    }

    /// The order of `a`: the least `n >= 1` with `a^n = e`.
    pub fn order_of(&self, a: &Elem) -> Result<u64> {
        match self.node() {
            Node::Cyclic(n) => Ok(n / gcd(a.res(), *n)),
            Node::Quaternion => Ok([1, 2, 4, 4, 4, 4, 4, 4][a.res() as usize]),
            Node::Product(fs) => {
                fs.iter().zip(a.parts()).try_fold(1u64, |acc, (f, x)| Ok(lcm(acc, f.order_of(x)?)))
            }
            Node::Sum { component, .. } => {
                a.coords().iter().try_fold(1u64, |acc, (_, c)| Ok(lcm(acc, component.order_of(c)?)))
            }
            Node::Semidirect(sd) => {
                let x = a.parts()[1].res();
                let d = sd.order / gcd(x, sd.order);
                let y = self.pow(a, d);
                Ok(d * sd.base.order_of(&y.parts()[0])?)
            }
            Node::Sub { parent, .. } => parent.order_of(a),
            Node::Quotient { parent, .. } => {
                let bound = parent.order_of(a)?;
                let id = self.identity();
                let mut d = 1;
                while d <= bound {
                    if bound % d == 0 && self.pow(a, d) == id {
                        return Ok(d);
                    }
                    d += 1;
                }
                Err(Error::Budget { what: "order search", limit: ORDER_CAP as usize })
            }
        }
    }

    pub fn commutator(&self, a: &Elem, b: &Elem) -> Elem {
        let ab = self.mul(a, b);
        let ai_bi = self.mul(&self.inv(a), &self.inv(b));
        self.mul(&ab, &ai_bi)
    }

    pub fn conjugate(&self, g: &Elem, x: &Elem) -> Elem {
        self.mul(&self.mul(g, x), &self.inv(g))
    }

    pub fn encode(&self, a: &Elem) -> ElementCode {
        let mut out = Vec::new();
        self.encode_into(a, &mut out);
        ElementCode(out)
    }

    fn encode_into(&self, a: &Elem, out: &mut Vec<u8>) {
        match self.node() {
            Node::Cyclic(n) => {
                let w = cyclic_width(*n);
                out.extend_from_slice(&a.res().to_be_bytes()[8 - w..]);
            }
            Node::Quaternion => out.push(a.res() as u8),
            Node::Product(fs) => {
                for (f, x) in fs.iter().zip(a.parts()) {
                    f.encode_into(x, out);
                }
            }
            Node::Sum { component, .. } => {
                let cs = a.coords();
                out.extend_from_slice(&(cs.len() as u32).to_be_bytes());
                for (i, c) in cs {
                    out.extend_from_slice(&encode_index(*i));
                    component.encode_into(c, out);
                }
            }
            Node::Semidirect(sd) => {
                let p = a.parts();
                sd.base.encode_into(&p[0], out);
                Group::from_node(Node::Cyclic(sd.order)).encode_into(&p[1], out);
            }
            Node::Sub { parent, .. } | Node::Quotient { parent, .. } => parent.encode_into(a, out),
        }
    }

    /// Decodes a canonical code, rejecting malformed or non-canonical input.
    pub fn decode(&self, code: &ElementCode) -> Result<Elem> {
        let bad = |reason: String| Error::Decode { code: code.clone(), reason };
        let (e, used) = self.decode_prefix(code.as_bytes()).map_err(bad)?;
        if used != code.0.len() {
            return Err(bad(format!("{} trailing bytes", code.0.len() - used)));
        }
        match self.node() {
            Node::Sub { parent, witness } if !witness.contains(parent, &e) => {
                Err(bad(format!("element is not in {witness}")))
            }
            Node::Quotient { parent, witness } if witness.reduce_unchecked(parent, &e) != e => {
                Err(bad("not a canonical coset representative".into()))
            }
            _ => Ok(e),
        }
    }

    fn decode_prefix(&self, b: &[u8]) -> std::result::Result<(Elem, usize), String> {
        match self.node() {
            Node::Cyclic(n) => {
                let w = cyclic_width(*n);
                if b.len() < w {
                    return Err("truncated residue".into());
                }
                let mut arr = [0u8; 8];
                arr[8 - w..].copy_from_slice(&b[..w]);
                let r = u64::from_be_bytes(arr);
                if r >= *n {
                    return Err(format!("residue {r} out of range for Z({n})"));
                }
                Ok((Elem::Res(r), w))
            }
            Node::Quaternion => match b.first() {
                Some(&x) if x < 8 => Ok((Elem::Res(x as u64), 1)),
                Some(&x) => Err(format!("byte {x} is not a Q8 element")),
                None => Err("truncated Q8 element".into()),
            },
            Node::Product(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                let mut used = 0;
                for f in fs {
                    let (e, u) = f.decode_prefix(&b[used..])?;
                    parts.push(e);
                    used += u;
                }
                Ok((Elem::tuple(parts), used))
            }
            Node::Sum { component, index } => {
                if b.len() < 4 {
                    return Err("truncated support count".into());
                }
                let count = u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize;
                let mut used = 4;
                let mut coords: Vec<(i64, Elem)> = Vec::with_capacity(count.min(1024));
                let id = component.identity();
                for _ in 0..count {
                    if b.len() < used + 8 {
                        return Err("truncated coordinate index".into());
                    }
                    let i = decode_index(&b[used..used + 8]);
                    used += 8;
                    if *index == IndexSet::N && i < 0 {
                        return Err(format!("negative index {i} in a sum over N"));
                    }
                    if let Some((last, _)) = coords.last() {
                        if *last >= i {
                            return Err("coordinate indices not strictly increasing".into());
                        }
                    }
                    let (c, u) = component.decode_prefix(&b[used..])?;
                    used += u;
                    if c == id {
                        return Err(format!("identity coordinate stored at index {i}"));
                    }
                    coords.push((i, c));
                }
                Ok((Elem::sparse(coords), used))
            }
            Node::Semidirect(sd) => {
                let (a, u1) = sd.base.decode_prefix(b)?;
                let (x, u2) = Group::from_node(Node::Cyclic(sd.order)).decode_prefix(&b[u1..])?;
                Ok((Elem::tuple(vec![a, x]), u1 + u2))
            }
            Node::Sub { parent, .. } | Node::Quotient { parent, .. } => parent.decode_prefix(b),
        }
    }

    /// Validates that `a` is a well-formed element of this group.
    pub fn check(&self, a: &Elem) -> Result<()> {
        let code = self.encode(a);
        let back = self.decode(&code)?;
        if &back != a {
            return Err(Error::InvalidElement(format!("{a:?} is not a canonical element of {self}")));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        match self.node() {
            Node::Cyclic(_) | Node::Quaternion => true,
            Node::Product(fs) => fs.iter().all(|f| f.is_finite()),
            Node::Sum { component, .. } => component.size() == Some(1),
            Node::Semidirect(sd) => sd.base.is_finite(),
            Node::Sub { parent, witness } => witness.subgroup_is_finite(parent),
            Node::Quotient { parent, witness } => witness.index_is_finite(parent),
        }
    }

    /// Number of elements, if finite.
    pub fn size(&self) -> Option<u128> {
        match self.node() {
            Node::Cyclic(n) => Some(*n as u128),
            Node::Quaternion => Some(8),
            Node::Product(fs) => fs.iter().try_fold(1u128, |acc, f| acc.checked_mul(f.size()?)),
            Node::Sum { component, .. } => (component.size() == Some(1)).then_some(1),
            Node::Semidirect(sd) => sd.base.size()?.checked_mul(sd.order as u128),
            Node::Sub { .. } | Node::Quotient { .. } => {
                if self.is_finite() {
                    self.elements(crate::subgroup::DEFAULT_BUDGET).ok().map(|e| e.len() as u128)
                } else {
                    None
                }
            }
        }
    }

    /// All elements in canonical order; fails for infinite groups or beyond `cap`.
    pub fn elements(&self, cap: usize) -> Result<Vec<Elem>> {
        if !self.is_finite() {
            return Err(Error::unsupported(format!("{self} is infinite")));
        }
        if let Some(s) = self.size_hint() {
            if s > cap as u128 {
                return Err(Error::Budget { what: "group enumeration", limit: cap });
            }
        }
        let mut out = match self.node() {
            Node::Cyclic(n) => (0..*n).map(Elem::Res).collect(),
            Node::Quaternion => (0..8).map(Elem::Res).collect(),
            Node::Product(fs) => {
                let mut acc = vec![Vec::new()];
                for f in fs {
                    let fe = f.elements(cap)?;
                    let mut next = Vec::with_capacity(acc.len() * fe.len());
                    for prefix in &acc {
                        for e in &fe {
                            let mut v: Vec<Elem> = prefix.clone();
                            v.push(e.clone());
                            next.push(v);
                        }
                    }
                    acc = next;
                }
                acc.into_iter().map(Elem::tuple).collect()
            }
            Node::Sum { .. } => vec![Elem::empty_sparse()],
            Node::Semidirect(sd) => {
                let base = sd.base.elements(cap)?;
                let mut v = Vec::with_capacity(base.len() * sd.order as usize);
                for a in &base {
                    for x in 0..sd.order {
                        v.push(Elem::tuple(vec![a.clone(), Elem::Res(x)]));
                    }
                }
                v
            }
            Node::Sub { parent, witness } => match witness {
                Witness::Finite(h) => h.elements().to_vec(),
                Witness::Trivial => vec![parent.identity()],
                _ if parent.is_finite() => {
                    parent.elements(cap)?.into_iter().filter(|x| witness.contains(parent, x)).collect()
                }
                _ => return Err(Error::unsupported(format!("cannot enumerate {self}"))),
            },
            Node::Quotient { parent, witness } => {
                if parent.is_finite() {
                    let mut v: Vec<Elem> =
                        parent.elements(cap)?.iter().map(|x| witness.reduce_unchecked(parent, x)).collect();
                    v.sort();
                    v.dedup();
                    v
                } else {
                    let k = witness.generating_block(parent);
                    let gens: Vec<Elem> =
                        parent.block_generators(k).iter().map(|x| witness.reduce_unchecked(parent, x)).collect();
                    crate::subgroup::closure(self, &gens, cap)?.elements().to_vec()
                }
            }
        };
        out.sort();
        out.dedup();
        if out.len() > cap {
            return Err(Error::Budget { what: "group enumeration", limit: cap });
        }
        Ok(out)
    }

    fn size_hint(&self) -> Option<u128> {
        match self.node() {
            Node::Sub { .. } | Node::Quotient { .. } => None,
            _ => self.size(),
        }
    }

    /// Exponent of the group, when it is bounded and cheaply known.
    pub fn exponent(&self) -> Option<u64> {
        match self.node() {
            Node::Cyclic(n) => Some(*n),
            Node::Quaternion => Some(4),
            Node::Product(fs) => fs.iter().try_fold(1u64, |acc, f| Some(lcm(acc, f.exponent()?))),
            Node::Sum { component, .. } => component.exponent(),
            Node::Semidirect(_) => None,
            Node::Sub { parent, .. } => parent.exponent(),
            Node::Quotient { parent, .. } => parent.exponent(),
        }
    }

    /// Whether the group is abelian, when this follows from its construction.
    pub fn known_abelian(&self) -> Option<bool> {
        match self.node() {
            Node::Cyclic(_) => Some(true),
            Node::Quaternion => Some(false),
            Node::Product(fs) => {
                let mut all = true;
                for f in fs {
                    match f.known_abelian() {
                        Some(true) => {}
                        Some(false) => return Some(false),
                        None => all = false,
                    }
                }
                all.then_some(true)
            }
            Node::Sum { component, .. } => component.known_abelian(),
            Node::Semidirect(sd) => match sd.base.known_abelian() {
                Some(true) => Some(sd.action.is_trivial()),
                _ => None,
            },
            Node::Sub { parent, .. } | Node::Quotient { parent, .. } => match parent.known_abelian() {
                Some(true) => Some(true),
                _ => None,
            },
        }
    }

    /// Generators of the standard finite block: coordinates `0..k` of every
    /// restricted sum in the tree, and all standard generators of finite parts.
    pub fn block_generators(&self, k: usize) -> Vec<Elem> {
        self.window_generators(0, k as i64 - 1)
    }

    /// Like [`Group::block_generators`] for sum coordinates `lo..=hi`.
    pub fn window_generators(&self, lo: i64, hi: i64) -> Vec<Elem> {
        match self.node() {
            Node::Cyclic(n) => {
                if *n > 1 {
                    vec![Elem::Res(1)]
                } else {
                    vec![]
                }
            }
            Node::Quaternion => vec![Elem::Res(2), Elem::Res(4)],
            Node::Product(fs) => {
                let mut out = Vec::new();
                for (idx, f) in fs.iter().enumerate() {
                    for g in f.window_generators(lo, hi) {
                        let mut parts: Vec<Elem> = fs.iter().map(|h| h.identity()).collect();
                        parts[idx] = g;
                        out.push(Elem::tuple(parts));
                    }
                }
                out
            }
            Node::Sum { component, index } => {
                let lo = if *index == IndexSet::N { lo.max(0) } else { lo };
                let mut out = Vec::new();
                for i in lo..=hi {
                    for g in component.window_generators(lo, hi) {
                        out.push(Elem::sparse(vec![(i, g)]));
                    }
                }
                out
            }
            Node::Semidirect(sd) => {
                let mut out: Vec<Elem> = sd
                    .base
                    .window_generators(lo, hi)
                    .into_iter()
                    .map(|a| Elem::tuple(vec![a, Elem::Res(0)]))
                    .collect();
                if sd.order > 1 {
                    out.push(Elem::tuple(vec![sd.base.identity(), Elem::Res(1)]));
                }
                out
            }
            Node::Sub { parent, witness } => {
                let gens = parent.window_generators(lo, hi);
                match crate::subgroup::closure(parent, &gens, crate::subgroup::DEFAULT_BUDGET) {
                    Ok(block) => {
                        let inside: Vec<Elem> =
                            block.elements().iter().filter(|x| witness.contains(parent, x)).cloned().collect();
                        crate::subgroup::small_generating_set(self, &inside)
                    }
                    Err(_) => Vec::new(),
                }
            }
            Node::Quotient { parent, witness } => {
                let mut out: Vec<Elem> = parent
                    .window_generators(lo, hi)
                    .iter()
                    .map(|x| witness.reduce_unchecked(parent, x))
                    .filter(|x| *x != parent.identity())
                    .collect();
                out.sort();
                out.dedup();
                out
            }
        }
    }

    /// Smallest and largest sum coordinate used by `a`, if any.
    pub fn support_window(&self, a: &Elem) -> Option<(i64, i64)> {
        fn merge(x: Option<(i64, i64)>, y: Option<(i64, i64)>) -> Option<(i64, i64)> {
            match (x, y) {
                (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
                (x, None) => x,
                (None, y) => y,
            }
        }
        match self.node() {
            Node::Cyclic(_) | Node::Quaternion => None,
            Node::Product(fs) => fs.iter().zip(a.parts()).fold(None, |acc, (f, x)| merge(acc, f.support_window(x))),
            Node::Sum { .. } => {
                let cs = a.coords();
                Some((cs.first()?.0, cs.last()?.0))
            }
            Node::Semidirect(sd) => sd.base.support_window(&a.parts()[0]),
            Node::Sub { parent, .. } | Node::Quotient { parent, .. } => parent.support_window(a),
        }
    }

    /// A pseudo-random element; sum coordinates are drawn from a window of width `spread`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, spread: usize) -> Elem {
        match self.node() {
            Node::Cyclic(n) => Elem::Res(rng.gen_range(0..*n)),
            Node::Quaternion => Elem::Res(rng.gen_range(0..8)),
            Node::Product(fs) => Elem::tuple(fs.iter().map(|f| f.sample(rng, spread)).collect()),
            Node::Sum { component, index } => {
                let spread = spread.max(1) as i64;
                let (lo, hi) = match index {
                    IndexSet::N => (0, spread),
                    IndexSet::Z => (-(spread / 2), spread - spread / 2),
                };
                let id = component.identity();
                let mut coords = Vec::new();
                for i in lo..hi {
                    if rng.gen_bool(0.5) {
                        let c = component.sample(rng, spread as usize);
                        if c != id {
                            coords.push((i, c));
                        }
                    }
                }
                Elem::sparse(coords)
            }
            Node::Semidirect(sd) => {
                Elem::tuple(vec![sd.base.sample(rng, spread), Elem::Res(rng.gen_range(0..sd.order))])
            }
            Node::Sub { parent, witness } => witness.sample_member(parent, rng, spread),
            Node::Quotient { parent, witness } => witness.reduce_unchecked(parent, &parent.sample(rng, spread)),
        }
    }

    /// Parses an element from JSON: a `"0x.."` hex code or the structured form
    /// (integer residue, Q8 name, array for products and semidirect pairs,
    /// object `{"index": component}` for restricted sums).
    pub fn parse_element(&self, v: &Value) -> Result<Elem> {
        if let Value::String(s) = v {
            if s.starts_with("0x") {
                let code = ElementCode::from_hex(s)
                    .ok_or_else(|| Error::InvalidElement(format!("bad hex element code {s:?}")))?;
                return self.decode(&code);
            }
        }
        let bad = |what: &str| Error::InvalidElement(format!("expected {what} for an element of {self}, got {v}"));
        let e = match self.node() {
            Node::Cyclic(n) => {
                let r = v.as_i64().ok_or_else(|| bad("an integer"))?;
                Elem::Res(r.rem_euclid(*n as i64) as u64)
            }
            Node::Quaternion => {
                let s = v.as_str().ok_or_else(|| bad("a quaternion unit name"))?;
                let idx = Q8_NAMES.iter().position(|n| *n == s).ok_or_else(|| bad("one of 1,-1,i,-i,j,-j,k,-k"))?;
                Elem::Res(idx as u64)
            }
            Node::Product(fs) => {
                let arr = v.as_array().ok_or_else(|| bad("an array"))?;
                if arr.len() != fs.len() {
                    return Err(bad(&format!("an array of length {}", fs.len())));
                }
                Elem::tuple(fs.iter().zip(arr).map(|(f, x)| f.parse_element(x)).collect::<Result<_>>()?)
            }
            Node::Sum { component, index } => {
                let mut coords: Vec<(i64, Elem)> = Vec::new();
                let mut push = |i: i64, x: &Value| -> Result<()> {
                    if *index == IndexSet::N && i < 0 {
                        return Err(bad("non-negative indices"));
                    }
                    coords.push((i, component.parse_element(x)?));
                    Ok(())
                };
                match v {
                    Value::Object(map) => {
                        for (k, x) in map {
                            let i: i64 = k.parse().map_err(|_| bad("integer coordinate keys"))?;
                            push(i, x)?;
                        }
                    }
                    Value::Array(pairs) => {
                        for p in pairs {
                            let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("[index, value] pairs"))?;
                            let i = pair[0].as_i64().ok_or_else(|| bad("integer indices"))?;
                            push(i, &pair[1])?;
                        }
                    }
                    _ => return Err(bad("an object or list of pairs")),
                }
                coords.sort_by_key(|(i, _)| *i);
                let mut merged: Vec<(i64, Elem)> = Vec::new();
                for (i, c) in coords {
                    match merged.last_mut() {
                        Some((j, d)) if *j == i => *d = component.mul(d, &c),
                        _ => merged.push((i, c)),
                    }
                }
                let id = component.identity();
                merged.retain(|(_, c)| *c != id);
                Elem::sparse(merged)
            }
            Node::Semidirect(sd) => {
                let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("an [a, x] pair"))?;
                let x = arr[1].as_i64().ok_or_else(|| bad("an integer cyclic part"))?;
                Elem::tuple(vec![sd.base.parse_element(&arr[0])?, Elem::Res(x.rem_euclid(sd.order as i64) as u64)])
            }
            Node::Sub { parent, witness } => {
                let e = parent.parse_element(v)?;
                if !witness.contains(parent, &e) {
                    return Err(Error::InvalidElement(format!("{} is not in {witness}", parent.format(&e))));
                }
                e
            }
            Node::Quotient { parent, witness } => witness.reduce(parent, &parent.parse_element(v)?)?,
        };
        Ok(e)
    }

    /// Human-readable rendering of an element.
    pub fn format(&self, a: &Elem) -> String {
        match self.node() {
            Node::Cyclic(_) => a.res().to_string(),
            Node::Quaternion => Q8_NAMES[a.res() as usize].to_string(),
            Node::Product(fs) => {
                let parts: Vec<String> = fs.iter().zip(a.parts()).map(|(f, x)| f.format(x)).collect();
                format!("({})", parts.join(", "))
            }
            Node::Sum { component, .. } => {
                let parts: Vec<String> =
                    a.coords().iter().map(|(i, c)| format!("{i}: {}", component.format(c))).collect();
                format!("{{{}}}", parts.join(", "))
            }
            Node::Semidirect(sd) => {
                let p = a.parts();
                format!("({} | t^{})", sd.base.format(&p[0]), p[1].res())
            }
            Node::Sub { parent, .. } | Node::Quotient { parent, .. } => parent.format(a),
        }
    }
}

impl Semidirect {
    pub(crate) fn act(&self, x: u64, a: &Elem) -> Elem {
        match &self.action {
            Action::Power { coeffs, .. } => {
                let c = coeffs[x as usize];
                if c == 1 {
                    a.clone()
                } else {
                    self.base.pow(a, c)
                }
            }
            Action::Table { maps } => maps[x as usize][a].clone(),
        }
    }
}

fn describe(node: &Node) -> String {
    match node {
        Node::Cyclic(n) => format!("Z({n})"),
        Node::Quaternion => "Q8".to_string(),
        Node::Product(fs) => {
            if fs.is_empty() {
                "1".to_string()
            } else {
                fs.iter().map(|f| f.label().to_string()).collect::<Vec<_>>().join(" x ")
            }
        }
        Node::Sum { component, index } => {
            let idx = match index {
                IndexSet::N => "N",
                IndexSet::Z => "Z",
            };
            format!("sum_{idx}[{}]", component.label())
        }
        Node::Semidirect(sd) => {
            let act = match &sd.action {
                Action::Power { u, .. } => format!("a^{u}"),
                Action::Table { maps } => {
                    let mut pairs: Vec<String> = maps
                        .get(1)
                        .map(|m| {
                            let mut kv: Vec<(&Elem, &Elem)> = m.iter().collect();
                            kv.sort();
                            kv.iter().map(|(k, v)| format!("{}>{}", sd.base.format(k), sd.base.format(v))).collect()
                        })
                        .unwrap_or_default();
                    pairs.truncate(64);
                    format!("table[{}]", pairs.join(","))
                }
            };
            format!("({} x| Z({}) by {act})", sd.base.label(), sd.order)
        }
        Node::Sub { parent, witness } => format!("sub({}, {witness})", parent.label()),
        Node::Quotient { parent, witness } => format!("({}) / {witness}", parent.label()),
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&describe(self))
    }
}
