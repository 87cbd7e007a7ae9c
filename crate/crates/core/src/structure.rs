//! Structural predicates and decompositions.
//!
//! Exhaustive tests run on finite groups through a precomputed
//! multiplication table with bitset subgroups, so that enumerating every
//! subgroup of a group of order 128 stays cheap.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builders::iwasawa_finite;
use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::group::{Group, IwasawaParams};
use crate::numtheory::{ext_gcd, factorize};
use crate::subgroup::{closure, commutator_subgroup, FiniteSubgroup, ProductSet, DEFAULT_BUDGET};
use crate::witness::Witness;

/// Default order cap for exhaustive subgroup enumeration.
pub const SUBGROUP_ENUMERATION_CAP: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b))
    }
    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

/// Multiplication table of a finite group (or finite subgroup).
struct Table {
    elements: Vec<Elem>,
    mul: Vec<u32>,
    inv: Vec<u32>,
    n: usize,
}

impl Table {
    fn new(group: &Group, elements: &[Elem]) -> Self {
        let n = elements.len();
        let index: HashMap<&Elem, u32> = elements.iter().enumerate().map(|(i, e)| (e, i as u32)).collect();
        let mut mul = vec![0u32; n * n];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                mul[i * n + j] = index[&group.mul(a, b)];
            }
        }
        let inv = elements.iter().map(|a| index[&group.inv(a)]).collect();
        Table { elements: elements.to_vec(), mul, inv, n }
    }

    fn m(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    fn identity(&self) -> usize {
        (0..self.n).find(|&i| self.m(i, i) == i).expect("groups have an identity")
    }

    fn close(&self, mut set: Bits) -> Bits {
        let mut frontier: Vec<usize> = set.ones().collect();
        let gens = frontier.clone();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = self.m(x, g);
                if !set.get(y) {
                    set.set(y);
                    frontier.push(y);
                }
            }
        }
        set
    }

    fn cyclic(&self, x: usize) -> Bits {
        let mut b = Bits::new(self.n);
        let e = self.identity();
        let mut y = x;
        b.set(e);
        while y != e {
            b.set(y);
            y = self.m(y, x);
        }
        b
    }

    fn cyclic_subgroups(&self) -> Vec<(usize, Bits)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for x in 0..self.n {
            let c = self.cyclic(x);
            if seen.insert(c.clone()) {
                out.push((x, c));
            }
        }
        out
    }

    fn product(&self, x: &Bits, y: &Bits) -> Bits {
        let mut out = Bits::new(self.n);
        for a in x.ones() {
            for b in y.ones() {
                out.set(self.m(a, b));
            }
        }
        out
    }

    fn is_normal(&self, h: &Bits, conj_by: &[usize]) -> bool {
        conj_by.iter().all(|&g| h.ones().all(|x| h.get(self.m(self.m(g, x), self.inv[g] as usize))))
    }

    /// Every subgroup: cyclic subgroups closed under joins with cyclic subgroups.
    fn all_subgroups(&self) -> Vec<Bits> {
        let cyclics: Vec<Bits> = self.cyclic_subgroups().into_iter().map(|c| c.1).collect();
        let mut seen: HashSet<Bits> = cyclics.iter().cloned().collect();
        let mut queue: Vec<Bits> = cyclics.clone();
        let mut out = cyclics.clone();
        while let Some(h) = queue.pop() {
            for c in &cyclics {
                if c.is_subset(&h) {
                    continue;
                }
                let mut u = h.clone();
                for (a, b) in u.0.iter_mut().zip(&c.0) {
                    *a |= b;
                }
                let j = self.close(u);
                if seen.insert(j.clone()) {
                    out.push(j.clone());
                    queue.push(j);
                }
            }
        }
        out
    }
}

/// Verdict on quasihamiltonicity, distinguishing exhaustive and sampled checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasihamiltonianVerdict {
    pub value: bool,
    /// `"exhaustive"` or `"sampled"`.
    pub mode: String,
    /// Generators `x, y` with `<x><y> != <y><x>`, when false.
    pub witness: Option<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub order: Option<u64>,
    pub abelian: bool,
    /// `None` when exhaustive subgroup enumeration is beyond the cap.
    pub hamiltonian: Option<bool>,
    pub quasihamiltonian: QuasihamiltonianVerdict,
    pub fc: Option<bool>,
    /// Non-commuting pair, when not abelian.
    pub noncommuting: Option<(String, String)>,
    /// A non-normal subgroup's generators, when one was found.
    pub non_normal_subgroup: Option<Vec<String>>,
}

/// Classifies a finite group exhaustively (up to `cap` elements).
pub fn classify(g: &Group, cap: usize) -> Result<ClassificationReport> {
    let all = closure(g, &g.block_generators(1), cap)?;
    if g.is_finite() && g.size() != Some(all.order() as u128) {
        return Err(Error::Invariant(format!("standard generators of {g} do not generate it")));
    }
    classify_subgroup(&all, cap)
}

/// Classifies a finite subgroup exhaustively.
pub fn classify_subgroup(h: &FiniteSubgroup, cap: usize) -> Result<ClassificationReport> {
    if h.order() > cap {
        return Err(Error::Budget { what: "classification order", limit: cap });
    }
    let g = h.group();
    let code = |i: usize, t: &Table| g.encode(&t.elements[i]).to_string();
    let t = Table::new(g, h.elements());
    let gen_idx: Vec<usize> =
        h.generators().iter().map(|x| h.elements().binary_search(x).expect("generator in subgroup")).collect();
    let mut noncommuting = None;
    'outer: for &a in &gen_idx {
        for &b in &gen_idx {
            if t.m(a, b) != t.m(b, a) {
                noncommuting = Some((code(a, &t), code(b, &t)));
                break 'outer;
            }
        }
    }
    let abelian = noncommuting.is_none();
    let quasihamiltonian = if abelian {
        QuasihamiltonianVerdict { value: true, mode: "exhaustive".into(), witness: None }
    } else {
        table_quasihamiltonian(&t, &|i| code(i, &t))
    };
    let (hamiltonian, non_normal_subgroup) = if abelian {
        (Some(false), None)
    } else if h.order() <= SUBGROUP_ENUMERATION_CAP {
        match t.all_subgroups().into_iter().find(|s| !t.is_normal(s, &gen_idx)) {
            Some(s) => {
                let elems: Vec<Elem> = s.ones().map(|i| t.elements[i].clone()).collect();
                let gens = crate::subgroup::small_generating_set(g, &elems);
                (Some(false), Some(gens.iter().map(|x| g.encode(x).to_string()).collect()))
            }
            None => (Some(true), None),
        }
    } else {
        (None, None)
    };
    Ok(ClassificationReport {
        order: Some(h.order() as u64),
        abelian,
        hamiltonian,
        quasihamiltonian,
        fc: Some(true),
        noncommuting,
        non_normal_subgroup,
    })
}

fn table_quasihamiltonian(t: &Table, code: &dyn Fn(usize) -> String) -> QuasihamiltonianVerdict {
    let cyclics = t.cyclic_subgroups();
    for (i, (x, cx)) in cyclics.iter().enumerate() {
        for (y, cy) in &cyclics[i + 1..] {
            let xy = t.product(cx, cy);
            let yx = t.product(cy, cx);
            if xy != yx {
                return QuasihamiltonianVerdict {
                    value: false,
                    mode: "exhaustive".into(),
                    witness: Some((code(*x), code(*y))),
                };
            }
        }
    }
    QuasihamiltonianVerdict { value: true, mode: "exhaustive".into(), witness: None }
}

/// Exhaustive "every subgroup is normal and the group is non-abelian" test.
pub fn exhaustive_hamiltonian(g: &Group, cap: usize) -> Result<bool> {
    let all = closure(g, &g.block_generators(1), cap)?;
    if all.order() > cap {
        return Err(Error::Budget { what: "subgroup enumeration", limit: cap });
    }
    let t = Table::new(g, all.elements());
    let gens: Vec<usize> = all.generators().iter().map(|x| all.elements().binary_search(x).unwrap()).collect();
    let abelian = gens.iter().all(|&a| gens.iter().all(|&b| t.m(a, b) == t.m(b, a)));
    Ok(!abelian && t.all_subgroups().iter().all(|s| t.is_normal(s, &gens)))
}

/// Classification of a possibly infinite group: exhaustive on the finite
/// truncation spanned by `block` coordinates, plus `samples` random cyclic
/// pairs from the whole group.
pub fn classify_structural(g: &Group, block: usize, samples: usize, seed: u64) -> Result<ClassificationReport> {
    if g.is_finite() {
        return classify(g, 1 << 12);
    }
    let trunc = closure(g, &g.block_generators(block), 1 << 12)?;
    let mut report = classify_subgroup(&trunc, 1 << 12)?;
    report.order = None;
    report.hamiltonian = match g.known_abelian() {
        Some(true) => Some(false),
        _ => None,
    };
    if let Some(a) = g.known_abelian() {
        report.abelian = a;
    }
    report.fc = fc_structural(g);
    if report.quasihamiltonian.value {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let (x, y) = (g.sample(&mut rng, block + 2), g.sample(&mut rng, block + 2));
            if !cyclic_pair_permutes(g, &x, &y)? {
                report.quasihamiltonian = QuasihamiltonianVerdict {
                    value: false,
                    mode: "sampled".into(),
                    witness: Some((g.encode(&x).to_string(), g.encode(&y).to_string())),
                };
                return Ok(report);
            }
        }
        report.quasihamiltonian.mode = "sampled".into();
    }
    Ok(report)
}

/// `<x><y> = <y><x>`.
pub fn cyclic_pair_permutes(g: &Group, x: &Elem, y: &Elem) -> Result<bool> {
    let cx = closure(g, std::slice::from_ref(x), DEFAULT_BUDGET)?;
    let cy = closure(g, std::slice::from_ref(y), DEFAULT_BUDGET)?;
    let xy = crate::subgroup::product_set(g, cx.elements(), cy.elements(), true, DEFAULT_BUDGET)?;
    let yx = crate::subgroup::product_set(g, cy.elements(), cx.elements(), true, DEFAULT_BUDGET)?;
    Ok(xy == yx)
}

fn fc_structural(g: &Group) -> Option<bool> {
    if g.known_abelian() == Some(true) {
        return Some(true);
    }
    if g.iwasawa_params().is_some() {
        return fc_by_commutator(g).ok();
    }
    None
}

/// Outcome of the constructive Dedekind–Baer decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DedekindBaer {
    Abelian,
    NotHamiltonian { reason: String },
    Hamiltonian {
        /// Images of `i` and `j`.
        q8: (String, String),
        b_generators: Vec<String>,
        b_order: u64,
        d_generators: Vec<String>,
        d_order: u64,
    },
}

/// Decomposition together with the exhaustive cross-check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub decomposition: DedekindBaer,
    pub exhaustive_hamiltonian: Option<bool>,
    pub agrees: Option<bool>,
}

/// Locates `Q8`, the exponent-2 complement `B` and the odd part `D`, and
/// verifies `Q8 x B x D -> G, (q, b, d) -> q b d` is an isomorphism.
pub fn dedekind_baer_decompose(g: &Group, cap: usize) -> Result<DecompositionReport> {
    let all = closure(g, &g.block_generators(1), cap)?;
    let decomposition = decompose_subgroup(&all)?;
    let exhaustive = if all.order() <= SUBGROUP_ENUMERATION_CAP.max(cap.min(SUBGROUP_ENUMERATION_CAP)) {
        Some(exhaustive_hamiltonian(g, SUBGROUP_ENUMERATION_CAP)?)
    } else {
        None
    };
    let agrees = exhaustive.map(|e| e == matches!(decomposition, DedekindBaer::Hamiltonian { .. }));
    Ok(DecompositionReport { decomposition, exhaustive_hamiltonian: exhaustive, agrees })
}

fn decompose_subgroup(all: &FiniteSubgroup) -> Result<DedekindBaer> {
    let g = all.group();
    let elems = all.elements();
    let commute = |a: &Elem, b: &Elem| g.mul(a, b) == g.mul(b, a);
    let gens = all.generators();
    if gens.iter().all(|a| gens.iter().all(|b| commute(a, b))) {
        return Ok(DedekindBaer::Abelian);
    }
    let not = |reason: &str| Ok(DedekindBaer::NotHamiltonian { reason: reason.to_string() });
    // a Q8: a, b of order 4 with a^2 = b^2 and ab != ba
    let order4: Vec<&Elem> = elems.iter().filter(|x| g.order_of(x).ok() == Some(4)).collect();
    let mut q8 = None;
    'search: for a in &order4 {
        for b in &order4 {
            if g.pow(a, 2) == g.pow(b, 2) && !commute(a, b) {
                q8 = Some(((*a).clone(), (*b).clone()));
                break 'search;
            }
        }
    }
    let Some((qa, qb)) = q8 else {
        return not("no quaternion subgroup");
    };
    let q = closure(g, &[qa.clone(), qb.clone()], 64)?;
    if q.order() != 8 {
        return not("quaternion candidates generate a group of the wrong order");
    }
    let two = p_component(all, 2);
    let odd: Vec<Elem> = elems.iter().filter(|x| g.order_of(x).map(|o| o % 2 == 1).unwrap_or(false)).cloned().collect();
    let (Ok(s), Ok(d)) = (two, ProductSet::from_elements(g, odd).into_subgroup()) else {
        return not("primary parts are not subgroups");
    };
    if !d.generators().iter().all(|a| d.generators().iter().all(|b| commute(a, b))) {
        return not("odd part is not abelian");
    }
    // B: complement of <a^2> in the elementary abelian part of the centre of S
    let minus_one = g.pow(&qa, 2);
    let centre_involutions: Vec<Elem> = s
        .elements()
        .iter()
        .filter(|z| g.pow(z, 2) == g.identity() && s.generators().iter().all(|y| commute(z, y)))
        .cloned()
        .collect();
    let mut span = closure(g, std::slice::from_ref(&minus_one), 4)?;
    let mut b_gens: Vec<Elem> = Vec::new();
    for z in &centre_involutions {
        if !span.contains(z) {
            b_gens.push(z.clone());
            let mut gs = span.generators().to_vec();
            gs.push(z.clone());
            span = closure(g, &gs, DEFAULT_BUDGET)?;
        }
    }
    let b = closure(g, &b_gens, DEFAULT_BUDGET)?;
    let (qo, bo, do_) = (q.order() as u128, b.order() as u128, d.order() as u128);
    if qo * bo * do_ != elems.len() as u128 {
        return not("Q8 x B x D has the wrong order");
    }
    // verify the multiplication map is an isomorphism
    let parts = [q.generators(), b.generators(), d.generators()];
    for (i, x) in parts.iter().enumerate() {
        for y in parts.iter().skip(i + 1) {
            if !x.iter().all(|a| y.iter().all(|c| commute(a, c))) {
                return not("factors do not commute");
            }
        }
    }
    let mut image: HashSet<Elem> = HashSet::new();
    for x in q.elements() {
        for y in b.elements() {
            for z in d.elements() {
                image.insert(g.mul(&g.mul(x, y), z));
            }
        }
    }
    if image.len() != elems.len() {
        return not("multiplication map is not injective");
    }
    check_q8_images(g, &qa, &qb)?;
    let code = |x: &Elem| g.encode(x).to_string();
    Ok(DedekindBaer::Hamiltonian {
        q8: (code(&qa), code(&qb)),
        b_generators: b.generators().iter().map(code).collect(),
        b_order: b.order() as u64,
        d_generators: d.generators().iter().map(code).collect(),
        d_order: d.order() as u64,
    })
}

/// Checks that `i -> a, j -> b` extends to an injective homomorphism `Q8 -> G`.
fn check_q8_images(g: &Group, a: &Elem, b: &Elem) -> Result<()> {
    let q = Group::quaternion();
    let (i, j) = (Elem::Res(2), Elem::Res(4));
    let mut map: HashMap<Elem, Elem> = HashMap::from([(q.identity(), g.identity())]);
    let mut frontier = vec![q.identity()];
    while let Some(x) = frontier.pop() {
        for (gen, img) in [(&i, a), (&j, b)] {
            let y = q.mul(&x, gen);
            let fy = g.mul(&map[&x], img);
            match map.get(&y) {
                Some(prev) if *prev != fy => return Err(Error::Invariant("quaternion images inconsistent".into())),
                Some(_) => {}
                None => {
                    map.insert(y.clone(), fy);
                    frontier.push(y);
                }
            }
        }
    }
    let distinct: HashSet<&Elem> = map.values().collect();
    if distinct.len() != 8 {
        return Err(Error::Invariant("quaternion images are not injective".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IwasawaDerivedReport {
    pub params: (u64, u32, u32, u32),
    pub rank: usize,
    pub group_order: u64,
    pub derived_order: u64,
    pub structural_order: u64,
    pub equal: bool,
}

/// Compares the exhaustive commutator subgroup of `Z(p^n)^r x| Z(p^m)` with `A^(p^s)`.
pub fn iwasawa_derived(params: IwasawaParams, rank: usize) -> Result<IwasawaDerivedReport> {
    let g = iwasawa_finite(params, rank)?;
    let all = closure(&g, &g.block_generators(1), DEFAULT_BUDGET)?;
    let derived = commutator_subgroup(&all, DEFAULT_BUDGET)?;
    let structural = Witness::Multiples(params.p.pow(params.s)).to_finite(&g, DEFAULT_BUDGET)?;
    Ok(IwasawaDerivedReport {
        params: (params.p, params.n, params.m, params.s),
        rank,
        group_order: all.order() as u64,
        derived_order: derived.order() as u64,
        structural_order: structural.order() as u64,
        equal: derived.elements() == structural.elements(),
    })
}

/// Whether an Iwasawa group is FC, decided by finiteness of `G' = A^(p^s)`.
pub fn fc_by_commutator(g: &Group) -> Result<bool> {
    let params = g.iwasawa_params().ok_or_else(|| Error::Precondition(format!("{g} is not an Iwasawa group")))?;
    Ok(Witness::Multiples(params.p.pow(params.s)).subgroup_is_finite(g))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimaryPart {
    pub prime: u64,
    pub exponent: u32,
    /// `m_i = o(x) / p_i^r_i`.
    pub cofactor: u64,
    /// Bezout coefficient `s_i`.
    pub coefficient: i128,
    pub part: String,
    pub part_order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimaryDecomposition {
    pub element: String,
    pub order: u64,
    pub parts: Vec<PrimaryPart>,
}

impl PrimaryDecomposition {
    /// `sum s_i m_i`, which must equal 1 for a nontrivial element.
    pub fn bezout_sum(&self) -> i128 {
        self.parts.iter().map(|p| p.coefficient * p.cofactor as i128).sum()
    }
}

/// `x = prod x^(s_i m_i)` with `x^(s_i m_i)` of order `p_i^r_i`.
pub fn p_decompose_element(g: &Group, x: &Elem) -> Result<PrimaryDecomposition> {
    g.check(x)?;
    let order = g.order_of(x)?;
    let factors = factorize(order);
    let cofactors: Vec<u64> = factors.iter().map(|(p, r)| order / p.pow(*r)).collect();
    let coeffs = bezout(&cofactors);
    let mut parts = Vec::new();
    for (((p, r), m), s) in factors.iter().zip(&cofactors).zip(&coeffs) {
        let e = (s * *m as i128).rem_euclid(order as i128) as u64;
        let part = g.pow(x, e);
        parts.push(PrimaryPart {
            prime: *p,
            exponent: *r,
            cofactor: *m,
            coefficient: *s,
            part_order: g.order_of(&part)?,
            part: g.encode(&part).to_string(),
        });
    }
    Ok(PrimaryDecomposition { element: g.encode(x).to_string(), order, parts })
}

/// Coefficients `s_i` with `sum s_i m_i = gcd(m_1, ..., m_k)`.
fn bezout(ms: &[u64]) -> Vec<i128> {
    let Some(first) = ms.first() else {
        return Vec::new();
    };
    let mut coeffs = vec![1i128];
    let mut acc = *first as i128;
    for m in &ms[1..] {
        let (d, x, y) = ext_gcd(acc, *m as i128);
        for c in coeffs.iter_mut() {
            *c *= x;
        }
        coeffs.push(y);
        acc = d;
    }
    coeffs
}

/// `{x in F : o(x) is a power of p}`, when that is a subgroup.
pub fn p_component(f: &FiniteSubgroup, p: u64) -> Result<FiniteSubgroup> {
    let g = f.group();
    let mut inside = Vec::new();
    for x in f.elements() {
        let o = g.order_of(x)?;
        if factorize(o).iter().all(|(q, _)| *q == p) {
            inside.push(x.clone());
        }
    }
    ProductSet::from_elements(g, inside)
        .into_subgroup()
        .map_err(|_| Error::structure(format!("the {p}-elements of {g} do not form a subgroup")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::IndexSet;

    fn z(n: u64) -> Group {
        Group::cyclic(n).unwrap()
    }

    fn s3() -> Group {
        Group::semidirect_table(z(3), 2, &[(Elem::Res(1), Elem::Res(2))]).unwrap()
    }

    #[test]
    fn classify_examples() {
        let r = classify(&z(6), 128).unwrap();
        assert!(r.abelian && r.quasihamiltonian.value && r.hamiltonian == Some(false));
        let r = classify(&Group::quaternion(), 128).unwrap();
        assert_eq!(r.hamiltonian, Some(true));
        assert!(r.quasihamiltonian.value);
        let r = classify(&s3(), 128).unwrap();
        assert!(!r.quasihamiltonian.value);
        assert!(r.quasihamiltonian.witness.is_some());
        assert_eq!(r.hamiltonian, Some(false));
    }

    #[test]
    fn subgroup_counts() {
        // Z(2)^3 has 16 subgroups, Q8 has 6, S3 has 6
        let t = |g: &Group| {
            let all = closure(g, &g.block_generators(1), 1000).unwrap();
            Table::new(g, all.elements()).all_subgroups().len()
        };
        assert_eq!(t(&Group::product(vec![z(2), z(2), z(2)])), 16);
        assert_eq!(t(&Group::quaternion()), 6);
        assert_eq!(t(&s3()), 6);
    }

    #[test]
    fn decompositions() {
        let q = Group::quaternion();
        let r = dedekind_baer_decompose(&q, 128).unwrap();
        assert!(matches!(r.decomposition, DedekindBaer::Hamiltonian { b_order: 1, d_order: 1, .. }));
        assert_eq!(r.agrees, Some(true));
        let g = Group::product(vec![q.clone(), z(2), z(3)]);
        let r = dedekind_baer_decompose(&g, 128).unwrap();
        assert!(matches!(r.decomposition, DedekindBaer::Hamiltonian { b_order: 2, d_order: 3, .. }));
        assert_eq!(r.agrees, Some(true));
        let g = Group::product(vec![q, z(4)]);
        let r = dedekind_baer_decompose(&g, 128).unwrap();
        assert!(matches!(r.decomposition, DedekindBaer::NotHamiltonian { .. }));
        assert_eq!(r.agrees, Some(true));
        let r = dedekind_baer_decompose(&s3(), 128).unwrap();
        assert!(matches!(r.decomposition, DedekindBaer::NotHamiltonian { .. }));
    }

    #[test]
    fn iwasawa_small() {
        let r = iwasawa_derived(IwasawaParams { p: 3, n: 2, m: 1, s: 1 }, 1).unwrap();
        assert!(r.equal);
        assert_eq!(r.derived_order, 3);
        let r = iwasawa_derived(IwasawaParams { p: 3, n: 2, m: 1, s: 1 }, 2).unwrap();
        assert_eq!((r.group_order, r.derived_order), (243, 9));
        assert!(r.equal);
        let g = crate::builders::example_non_fc(3, 2).unwrap();
        assert!(!fc_by_commutator(&g).unwrap());
        let finite = iwasawa_finite(IwasawaParams { p: 3, n: 2, m: 1, s: 1 }, 1).unwrap();
        assert!(fc_by_commutator(&finite).unwrap());
    }

    #[test]
    fn bezout_example() {
        let d = p_decompose_element(&z(6), &Elem::Res(1)).unwrap();
        let parts: Vec<(u64, i128, &str)> = d.parts.iter().map(|p| (p.cofactor, p.coefficient, p.part.as_str())).collect();
        assert_eq!(parts, vec![(3, 1, "0x03"), (2, -1, "0x04")]);
        assert_eq!(d.bezout_sum(), 1);
        assert!(p_decompose_element(&z(6), &Elem::Res(0)).unwrap().parts.is_empty());
    }

    #[test]
    fn primary_components() {
        let all = closure(&z(6), &[Elem::Res(1)], 10).unwrap();
        assert_eq!(p_component(&all, 2).unwrap().elements(), &[Elem::Res(0), Elem::Res(3)]);
        let g = Group::product(vec![Group::quaternion(), z(3)]);
        let all = closure(&g, &g.block_generators(1), 100).unwrap();
        assert_eq!(p_component(&all, 2).unwrap().order(), 8);
        let s = s3();
        let all = closure(&s, &s.block_generators(1), 100).unwrap();
        assert!(p_component(&all, 2).is_err());
    }

    #[test]
    fn structural_classification_of_non_fc_example() {
        let g = crate::builders::example_non_fc(3, 2).unwrap();
        let r = classify_structural(&g, 2, 64, 0).unwrap();
        assert!(r.quasihamiltonian.value);
        assert_eq!(r.quasihamiltonian.mode, "sampled");
        assert_eq!(r.fc, Some(false));
        let s = Group::restricted_sum(z(2), IndexSet::N).unwrap();
        assert!(classify_structural(&s, 3, 16, 0).unwrap().abelian);
    }
}
