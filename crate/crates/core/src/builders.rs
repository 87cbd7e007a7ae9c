//! Group descriptors and constructors for the concrete families in scope.
//!
//! Descriptors are plain serde data. Their JSON form is the grammar read by
//! the command line tool:
//!
//! ```json
//! {"cyclic": 9}
//! "q8"
//! {"product": [{"cyclic": 2}, "q8"]}
//! {"sum": {"component": {"cyclic": 2}, "index": "N"}}
//! {"semidirect": {"base": {"cyclic": 9}, "order": 3, "action": {"power": 4}}}
//! {"semidirect": {"base": {"cyclic": 3}, "order": 2, "action": {"table": [[1, 2]]}}}
//! {"hamiltonian": {"b": {"cyclic": 2}, "d": {"cyclic": 3}}}
//! {"iwasawa": {"p": 3, "n": 2, "m": 1, "s": 1, "base": {"cyclic": 9}}}
//! {"quotient": {"base": {"sum": {"component": {"cyclic": 9}, "index": "N"}}, "power": 3}}
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::group::{Group, IndexSet, IwasawaParams};
use crate::numtheory::is_prime;
use crate::witness::Witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSpec {
    /// `a -> a^u` on an abelian base.
    Power(u64),
    /// Images of generators of a finite base, as `[generator, image]` pairs.
    Table(Vec<(Value, Value)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupDescriptor {
    Cyclic(u64),
    Q8,
    Product(Vec<GroupDescriptor>),
    Sum { component: Box<GroupDescriptor>, index: IndexSet },
    Semidirect { base: Box<GroupDescriptor>, order: u64, action: ActionSpec },
    Hamiltonian { b: Box<GroupDescriptor>, d: Box<GroupDescriptor> },
    Iwasawa { p: u64, n: u32, m: u32, s: u32, base: Box<GroupDescriptor> },
    Quotient { base: Box<GroupDescriptor>, power: u64 },
}

impl GroupDescriptor {
    pub fn cyclic(n: u64) -> Self {
        GroupDescriptor::Cyclic(n)
    }

    pub fn sum(component: GroupDescriptor, index: IndexSet) -> Self {
        GroupDescriptor::Sum { component: Box::new(component), index }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::param(format!("bad group descriptor: {e}")))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("descriptors serialize")
    }
}

/// Builds the group and property-checks its arithmetic on a seeded sample.
pub fn build(desc: &GroupDescriptor) -> Result<Group> {
    let g = build_unchecked(desc)?;
    check_axioms(&g, 0)?;
    Ok(g)
}

fn build_unchecked(desc: &GroupDescriptor) -> Result<Group> {
    match desc {
        GroupDescriptor::Cyclic(n) => Group::cyclic(*n),
        GroupDescriptor::Q8 => Ok(Group::quaternion()),
        GroupDescriptor::Product(fs) => Ok(Group::product(fs.iter().map(build_unchecked).collect::<Result<_>>()?)),
        GroupDescriptor::Sum { component, index } => Group::restricted_sum(build_unchecked(component)?, *index),
        GroupDescriptor::Semidirect { base, order, action } => {
            let a = build_unchecked(base)?;
            match action {
                ActionSpec::Power(u) => Group::semidirect_power(a, *order, *u),
                ActionSpec::Table(pairs) => {
                    let images = pairs
                        .iter()
                        .map(|(x, y)| Ok((a.parse_element(x)?, a.parse_element(y)?)))
                        .collect::<Result<Vec<(Elem, Elem)>>>()?;
                    Group::semidirect_table(a, *order, &images)
                }
            }
        }
        GroupDescriptor::Hamiltonian { b, d } => build_hamiltonian(&build_unchecked(b)?, &build_unchecked(d)?),
        GroupDescriptor::Iwasawa { p, n, m, s, base } => {
            build_iwasawa(IwasawaParams { p: *p, n: *n, m: *m, s: *s }, build_unchecked(base)?)
        }
        GroupDescriptor::Quotient { base, power } => structural_quotient(&build_unchecked(base)?, *power),
    }
}

/// Associativity, identity and inverse laws plus finite orders on seeded samples.
pub fn check_axioms(g: &Group, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = g.identity();
    for _ in 0..64 {
        let (a, b, c) = (g.sample(&mut rng, 6), g.sample(&mut rng, 6), g.sample(&mut rng, 6));
        let left = g.mul(&g.mul(&a, &b), &c);
        let right = g.mul(&a, &g.mul(&b, &c));
        if left != right {
            return Err(Error::Invariant(format!("associativity fails in {g}")));
        }
        if g.mul(&a, &e) != a || g.mul(&e, &a) != a || g.mul(&a, &g.inv(&a)) != e {
            return Err(Error::Invariant(format!("identity or inverse law fails in {g}")));
        }
        g.order_of(&a)?;
    }
    Ok(())
}

/// `Q8 x B x D` with `B` of exponent at most 2 and `D` of odd exponent.
pub fn build_hamiltonian(b: &Group, d: &Group) -> Result<Group> {
    if b.known_abelian() != Some(true) {
        return Err(Error::param("B must be abelian"));
    }
    match bounded_exponent(b)? {
        1 | 2 => {}
        e => return Err(Error::param(format!("B must have exponent at most 2, found {e}"))),
    }
    if d.known_abelian() != Some(true) {
        return Err(Error::param("D must be abelian"));
    }
    let e = bounded_exponent(d)?;
    if e % 2 == 0 {
        return Err(Error::param(format!("D must have odd exponent, found {e}")));
    }
    Ok(Group::product(vec![Group::quaternion(), b.clone(), d.clone()]))
}

fn bounded_exponent(g: &Group) -> Result<u64> {
    if let Some(e) = g.exponent() {
        return Ok(e);
    }
    // fall back on sampled orders
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut e = 1;
    for _ in 0..256 {
        e = crate::numtheory::lcm(e, g.order_of(&g.sample(&mut rng, 8))?);
    }
    Ok(e)
}

/// Checks the parameter constraints of an Iwasawa group, naming the violated one.
pub fn check_iwasawa_params(p: IwasawaParams) -> Result<()> {
    let IwasawaParams { p, n, m, s } = p;
    if !is_prime(p) {
        return Err(Error::param(format!("p = {p} is not prime")));
    }
    if n < 1 || m < 1 || s < 1 {
        return Err(Error::param("n, m and s must be positive"));
    }
    if s >= n {
        return Err(Error::param(format!("constraint s < n violated (s = {s}, n = {n})")));
    }
    if n > s + m {
        return Err(Error::param(format!("constraint n <= s + m violated (n = {n}, s + m = {})", s + m)));
    }
    if p == 2 && s < 2 {
        return Err(Error::param("constraint \"if p = 2 then s >= 2\" violated"));
    }
    Ok(())
}

/// `A x| Z(p^m)` with the generator acting as `a -> a^(1 + p^s)`, where `A`
/// is abelian of exponent `p^n`.
pub fn build_iwasawa(params: IwasawaParams, base: Group) -> Result<Group> {
    check_iwasawa_params(params)?;
    let IwasawaParams { p, n, m, s } = params;
    if base.known_abelian() != Some(true) {
        return Err(Error::param("the base A must be abelian"));
    }
    let e = base.exponent().ok_or_else(|| Error::param("the base A must have bounded exponent"))?;
    let pn = p.checked_pow(n).ok_or_else(|| Error::param("p^n overflows"))?;
    if e != pn {
        return Err(Error::param(format!("the base A must have exponent p^n = {pn}, found {e}")));
    }
    let order = p.checked_pow(m).ok_or_else(|| Error::param("p^m overflows"))?;
    let u = 1 + p.pow(s);
    Group::semidirect_power_tagged(base, order, u, Some(params))
}

/// The quotient by componentwise `k`-th powers: each coordinate `Z(n)` becomes `Z(gcd(k, n))`.
pub fn structural_quotient(base: &Group, k: u64) -> Result<Group> {
    let componentwise = base.as_sum().is_some()
        || base.semidirect().is_some_and(|sd| sd.base.as_sum().is_some() || sd.base.is_finite())
        || base.known_abelian() == Some(true);
    if !componentwise {
        return Err(Error::param(format!("no componentwise power subgroup in {base}")));
    }
    Group::quotient_by(base, Witness::Multiples(k))
}

/// `Z(p^n)^(N) x| Z(p)` with `a -> a^(1 + p^(n-1))`, the standard non-FC family.
pub fn example_non_fc(p: u64, n: u32) -> Result<Group> {
    let a = Group::restricted_sum(Group::cyclic(p.pow(n))?, IndexSet::N)?;
    build_iwasawa(IwasawaParams { p, n, m: 1, s: n - 1 }, a)
}

/// Finite truncation `Z(p^n)^k x| Z(p)` of [`example_non_fc`].
pub fn example_non_fc_truncation(p: u64, n: u32, k: usize) -> Result<Group> {
    iwasawa_finite(IwasawaParams { p, n, m: 1, s: n - 1 }, k)
}

/// All valid Iwasawa instances `(params, r)` for prime `p`, with base
/// `A = Z(p^n)^r` and `|A x| Z(p^m)| <= bound`.
pub fn iwasawa_instances(p: u64, bound: u64) -> Vec<(IwasawaParams, usize)> {
    let mut out = Vec::new();
    let mut max_e = 0u32;
    while p.checked_pow(max_e + 1).is_some_and(|x| x <= bound) {
        max_e += 1;
    }
    for n in 1..=max_e {
        for m in 1..=max_e {
            for s in 1..n {
                let t = IwasawaParams { p, n, m, s };
                if check_iwasawa_params(t).is_err() {
                    continue;
                }
                let mut r = 1u32;
                while p.checked_pow(n * r + m).is_some_and(|size| size <= bound) {
                    out.push((t, r as usize));
                    r += 1;
                }
            }
        }
    }
    out
}

/// The finite Iwasawa group `Z(p^n)^r x| Z(p^m)`.
pub fn iwasawa_finite(params: IwasawaParams, r: usize) -> Result<Group> {
    let c = Group::cyclic(params.p.pow(params.n))?;
    let a = if r == 1 { c } else { Group::product(vec![c; r]) };
    build_iwasawa(params, a)
}
