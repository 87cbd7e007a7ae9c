//! Exact entropy along finite subgroups.
//!
//! Entropy values are carried as the integer `beta`; the entropy itself is
//! `log beta`. Two independent algorithms are provided: trajectory growth
//! (`T_{n+1} = T_n phi^n(F)`, with `beta_n = |T_{n+1}| / |T_n|`) and the
//! limit-free chain `D_n = U ∩ phi^{-1}(U^(n))` with `beta = [U : D_n]`.
//! Both sit behind [`EntropyStrategy`] in a name-keyed [`StrategyRegistry`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::morphism::Endomorphism;
use crate::subgroup::{generalized_index, product_set, FiniteSubgroup, ProductSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub n_max: usize,
    pub window: usize,
    pub size_budget: usize,
    pub level_max: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig { n_max: 32, window: 3, size_budget: 1 << 20, level_max: 32 }
    }
}

/// Ordered from most to least trustworthy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    CertifiedZero,
    StabilizedWindow,
    BudgetExhausted,
    NonSubgroupMode,
}

impl EstimateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateStatus::CertifiedZero => "certified_zero",
            EstimateStatus::StabilizedWindow => "stabilized_window",
            EstimateStatus::BudgetExhausted => "budget_exhausted",
            EstimateStatus::NonSubgroupMode => "non_subgroup_mode",
        }
    }

    /// Certified or window-stable.
    pub fn is_reliable(self) -> bool {
        matches!(self, EstimateStatus::CertifiedZero | EstimateStatus::StabilizedWindow)
    }
}

impl fmt::Display for EstimateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub beta: u64,
    pub status: EstimateStatus,
    pub reached_at: usize,
    pub window: usize,
}

impl EntropyEstimate {
    pub fn is_reliable(&self) -> bool {
        self.status.is_reliable()
    }

    /// `log beta`, for display only.
    pub fn log_beta(&self) -> f64 {
        (self.beta as f64).ln()
    }
}

/// Incrementally extended trajectory `T_1 = F, T_{n+1} = T_n phi^n(F)`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    phi: Endomorphism,
    base: FiniteSubgroup,
    steps: Vec<ProductSet>,
    subgroup_flags: Vec<bool>,
    image: Vec<Elem>,
    image_gens: Vec<Elem>,
    gens: Vec<Elem>,
}

impl Trajectory {
    pub fn new(phi: &Endomorphism, base: &FiniteSubgroup) -> Result<Self> {
        phi.domain().ensure_same(base.group())?;
        Ok(Trajectory {
            phi: phi.clone(),
            base: base.clone(),
            steps: vec![base.as_set()],
            subgroup_flags: vec![true],
            image: base.elements().to_vec(),
            image_gens: base.generators().to_vec(),
            gens: base.generators().to_vec(),
        })
    }

    pub fn base(&self) -> &FiniteSubgroup {
        &self.base
    }

    /// `T_1, T_2, ...`
    pub fn steps(&self) -> &[ProductSet] {
        &self.steps
    }

    pub fn last(&self) -> &ProductSet {
        self.steps.last().expect("trajectories are never empty")
    }

    /// Number of computed steps `n` (so `T_n` is the last).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.len() as u64).collect()
    }

    pub fn subgroup_flags(&self) -> &[bool] {
        &self.subgroup_flags
    }

    pub fn subgroup_mode(&self) -> bool {
        self.subgroup_flags.iter().all(|&f| f)
    }

    /// `beta_n = t_{n+1} / t_n` for every computed `n`.
    pub fn betas(&self) -> Vec<Ratio<u64>> {
        self.sizes().windows(2).map(|w| Ratio::new(w[1], w[0])).collect()
    }

    /// `beta_{n+1} <= beta_n` at every computed step.
    pub fn weakly_decreasing(&self) -> bool {
        self.betas().windows(2).all(|w| w[1] <= w[0])
    }

    /// Computes `T_{n+1}` from `T_n`.
    pub fn extend(&mut self, budget: usize) -> Result<()> {
        let g = self.phi.domain().clone();
        let mut img = self.phi.apply_set(&self.image);
        img.sort();
        img.dedup();
        let last = self.last();
        let next = product_set(&g, last.elements(), &img, *self.subgroup_flags.last().unwrap(), budget)?;
        let mut img_gens = self.phi.apply_set(&self.image_gens);
        img_gens.retain(|x| !g.is_identity(x));
        let set = ProductSet::from_elements(&g, next);
        let flag = if *self.subgroup_flags.last().unwrap() {
            // T_n B with T_n = <gens> and B a subgroup is a subgroup iff it
            // is closed under right multiplication by every generator of T_n
            img.iter().all(|y| self.gens.iter().all(|a| set.contains(&g.mul(y, a))))
        } else {
            set.is_subgroup()
        };
        if flag {
            for x in &img_gens {
                if !self.gens.contains(x) {
                    self.gens.push(x.clone());
                }
            }
        }
        self.steps.push(set);
        self.subgroup_flags.push(flag);
        self.image = img;
        self.image_gens = img_gens;
        Ok(())
    }

    /// Whether `T_{n+1} = T_n` was observed for the last two steps.
    pub fn stalled(&self) -> bool {
        let n = self.steps.len();
        n >= 2 && self.steps[n - 1].len() == self.steps[n - 2].len()
    }
}

/// Exact trajectory up to `T_{n_max}` or until `T_{n+1} = T_n`.
pub fn trajectory(phi: &Endomorphism, base: &FiniteSubgroup, n_max: usize, size_budget: usize) -> Result<Trajectory> {
    let mut t = Trajectory::new(phi, base)?;
    while t.len() < n_max.max(1) {
        t.extend(size_budget)?;
        if t.subgroup_mode() && t.stalled() {
            break;
        }
    }
    Ok(t)
}

/// Entropy of `phi` along `base` by trajectory growth.
pub fn entropy_along(phi: &Endomorphism, base: &FiniteSubgroup, config: &EntropyConfig) -> Result<EntropyEstimate> {
    entropy_along_traced(phi, base, config).map(|(e, _)| e)
}

/// As [`entropy_along`], also returning the computed trajectory.
pub fn entropy_along_traced(
    phi: &Endomorphism,
    base: &FiniteSubgroup,
    config: &EntropyConfig,
) -> Result<(EntropyEstimate, Trajectory)> {
    let window = config.window.max(1);
    let mut t = Trajectory::new(phi, base)?;
    let estimate = |beta, status, reached_at| EntropyEstimate { beta, status, reached_at, window };
    loop {
        if t.len() > config.n_max {
            break;
        }
        match t.extend(config.size_budget) {
            Ok(()) => {}
            Err(Error::Budget { .. }) => break,
            Err(e) => return Err(e),
        }
        if !t.subgroup_mode() {
            continue;
        }
        if !t.weakly_decreasing() {
            return Err(Error::Invariant(format!("beta_n increased along {} on a subgroup trajectory", phi.label())));
        }
        let n = t.len() - 1;
        if t.stalled() {
            debug_check_stable(&mut t, config.size_budget)?;
            return Ok((estimate(1, EstimateStatus::CertifiedZero, n), t));
        }
        let betas = t.betas();
        let last = *betas.last().unwrap();
        let run = betas.iter().rev().take_while(|b| **b == last).count();
        if run >= window {
            return Ok((estimate(integer_beta(last)?, EstimateStatus::StabilizedWindow, n + 1 - run), t));
        }
    }
    let betas = t.betas();
    let n = betas.len();
    let Some(last) = betas.last().copied() else {
        // not even T_2 fits: beta <= |F|
        return Ok((estimate(base.order() as u64, EstimateStatus::BudgetExhausted, 0), t));
    };
    if t.subgroup_mode() {
        Ok((estimate(integer_beta(last)?, EstimateStatus::BudgetExhausted, n), t))
    } else {
        Ok((estimate(last.ceil().to_integer(), EstimateStatus::NonSubgroupMode, n), t))
    }
}

fn integer_beta(b: Ratio<u64>) -> Result<u64> {
    if b.is_integer() {
        Ok(b.to_integer())
    } else {
        Err(Error::Invariant(format!("subgroup trajectory produced a non-integer ratio {b}")))
    }
}

/// Once `T_{n+1} = T_n`, two further steps must not change `T`.
fn debug_check_stable(t: &mut Trajectory, budget: usize) -> Result<()> {
    if cfg!(debug_assertions) {
        let mut probe = t.clone();
        let fixed = probe.last().len();
        for _ in 0..2 {
            probe.extend(budget)?;
            if probe.last().len() != fixed {
                return Err(Error::Invariant("trajectory moved after stabilizing".into()));
            }
        }
    }
    Ok(())
}

/// One row of a family table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaseRow {
    pub base: String,
    pub order: u64,
    pub estimate: EntropyEstimate,
}

/// Maximum over a family of bases; a lower bound for the entropy of `phi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupEstimate {
    pub beta: u64,
    /// Least trustworthy status among the bases.
    pub status: EstimateStatus,
    /// Index of a base attaining the maximum.
    pub witness: usize,
    pub lower_bound: bool,
    pub rows: Vec<BaseRow>,
}

impl SupEstimate {
    pub fn is_reliable(&self) -> bool {
        self.status.is_reliable()
    }
}

pub fn base_label(f: &FiniteSubgroup) -> String {
    let g = f.group();
    let gens: Vec<String> = f.generators().iter().map(|x| g.encode(x).to_string()).collect();
    format!("<{}>", gens.join(","))
}

/// Sup of `entropy_along` over `family`, with the per-base table.
pub fn entropy_sup(phi: &Endomorphism, family: &[FiniteSubgroup], config: &EntropyConfig) -> Result<SupEstimate> {
    sup_with(family, |f| entropy_along(phi, f, config))
}

pub(crate) fn sup_with(
    family: &[FiniteSubgroup],
    mut est: impl FnMut(&FiniteSubgroup) -> Result<EntropyEstimate>,
) -> Result<SupEstimate> {
    if family.is_empty() {
        return Err(Error::param("base family is empty"));
    }
    let mut rows = Vec::with_capacity(family.len());
    for f in family {
        rows.push(BaseRow { base: base_label(f), order: f.order() as u64, estimate: est(f)? });
    }
    let (witness, best) = rows
        .iter()
        .enumerate()
        .max_by_key(|(i, r)| (r.estimate.beta, std::cmp::Reverse(*i)))
        .map(|(i, r)| (i, r.estimate.beta))
        .unwrap();
    let status = rows.iter().map(|r| r.estimate.status).max().unwrap();
    Ok(SupEstimate { beta: best, status, witness, lower_bound: true, rows })
}

/// Membership oracle for the increasing chain `U^(0) = U`, `U^(n+1) = U phi^{-1} U^(n)`.
pub struct UminChain {
    phi: Endomorphism,
    base: FiniteSubgroup,
    level_max: usize,
    memo: HashMap<(Elem, usize), bool>,
}

impl UminChain {
    pub fn new(phi: &Endomorphism, base: &FiniteSubgroup, level_max: usize) -> Result<Self> {
        phi.domain().ensure_same(base.group())?;
        Ok(UminChain { phi: phi.clone(), base: base.clone(), level_max, memo: HashMap::new() })
    }

    /// `x in U^(n)`.
    pub fn contains(&mut self, x: &Elem, n: usize) -> Result<bool> {
        if n > self.level_max {
            return Err(Error::Budget { what: "limit-free recursion depth", limit: self.level_max });
        }
        if self.base.contains(x) {
            return Ok(true);
        }
        if n == 0 {
            return Ok(false);
        }
        if let Some(&b) = self.memo.get(&(x.clone(), n)) {
            return Ok(b);
        }
        let g = self.phi.domain().clone();
        let mut found = self.contains(x, n - 1)?;
        if !found {
            for u in self.base.clone().elements() {
                let y = self.phi.apply(&g.mul(&g.inv(u), x));
                if self.contains(&y, n - 1)? {
                    found = true;
                    break;
                }
            }
        }
        self.memo.insert((x.clone(), n), found);
        Ok(found)
    }

    /// `D_n = { u in U : phi(u) in U^(n) }`, sorted.
    pub fn level(&mut self, n: usize) -> Result<Vec<Elem>> {
        let mut out = Vec::new();
        for u in self.base.clone().elements() {
            if self.contains(&self.phi.apply(u), n)? {
                out.push(u.clone());
            }
        }
        Ok(out)
    }
}

/// `x in U^(n)` for a one-off query.
pub fn umin_membership(phi: &Endomorphism, base: &FiniteSubgroup, x: &Elem, n: usize) -> Result<bool> {
    UminChain::new(phi, base, n)?.contains(x, n)
}

/// Entropy along `U` as `[U : D_n]` once the chain `D_n` settles.
pub fn limit_free_entropy(phi: &Endomorphism, base: &FiniteSubgroup, config: &EntropyConfig) -> Result<EntropyEstimate> {
    let window = config.window.max(1);
    let mut chain = UminChain::new(phi, base, config.level_max)?;
    let estimate = |beta, status, reached_at| EntropyEstimate { beta, status, reached_at, window };
    let g = phi.domain();
    let index_of = |d: &[Elem]| -> (u64, bool) {
        let set = ProductSet::from_elements(g, d.to_vec());
        let u = base.order() as u64;
        let k = d.len() as u64;
        (u.div_ceil(k), set.is_subgroup() && u % k == 0)
    };
    let mut prev: Option<Vec<Elem>> = None;
    let mut run = 0;
    let mut last = (base.order() as u64, true);
    for n in 0..=config.level_max {
        let d = match chain.level(n) {
            Ok(d) => d,
            Err(Error::Budget { .. }) => break,
            Err(e) => return Err(e),
        };
        if d.len() == base.order() {
            return Ok(estimate(1, EstimateStatus::CertifiedZero, n));
        }
        last = index_of(&d);
        if !last.1 {
            return Ok(estimate(last.0, EstimateStatus::NonSubgroupMode, n));
        }
        run = if prev.as_ref() == Some(&d) { run + 1 } else { 1 };
        if run >= window {
            return Ok(estimate(last.0, EstimateStatus::StabilizedWindow, n + 1 - run));
        }
        prev = Some(d);
    }
    Ok(estimate(last.0, EstimateStatus::BudgetExhausted, config.level_max))
}

/// `Delta = [U phi(U) : U] / [U phi(U) : phi(U)]`.
pub fn modulus(phi: &Endomorphism, base: &FiniteSubgroup, budget: usize) -> Result<Ratio<u64>> {
    let g = phi.domain();
    g.ensure_same(base.group())?;
    let image = phi.image_subgroup(base)?;
    let joined = ProductSet::from_elements(g, product_set(g, base.elements(), image.elements(), true, budget)?);
    if !joined.is_subgroup() {
        return Err(Error::structure(format!("U phi(U) is not a subgroup for {} on {}", phi.label(), base_label(base))));
    }
    let over_u = generalized_index(g, joined.elements(), base)?;
    let over_image = generalized_index(g, joined.elements(), &image)?;
    Ok(Ratio::new(over_u, over_image))
}

/// Result of comparing `beta(phi)` with `beta(phi^{-1}) * Delta(phi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InverseCheck {
    pub base: String,
    pub forward: EntropyEstimate,
    pub inverse: EntropyEstimate,
    /// `Delta` as `"p/q"` (or `"p"`).
    pub modulus: String,
    /// `None` when an estimate is neither certified nor window-stable.
    pub holds: Option<bool>,
}

pub fn inverse_entropy_check(phi: &Endomorphism, base: &FiniteSubgroup, config: &EntropyConfig) -> Result<InverseCheck> {
    let inv = phi
        .inverse()
        .ok_or_else(|| Error::Precondition(format!("{} has no declared inverse", phi.label())))?;
    let forward = entropy_along(phi, base, config)?;
    let inverse = entropy_along(&inv, base, config)?;
    let delta = modulus(phi, base, config.size_budget)?;
    let holds = (forward.is_reliable() && inverse.is_reliable())
        .then(|| Ratio::from_integer(forward.beta) == Ratio::from_integer(inverse.beta) * delta);
    Ok(InverseCheck { base: base_label(base), forward, inverse, modulus: delta.to_string(), holds })
}

/// An entropy algorithm selectable by name.
pub trait EntropyStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, phi: &Endomorphism, base: &FiniteSubgroup, config: &EntropyConfig) -> Result<EntropyEstimate>;
}

pub struct TrajectoryStrategy;

impl EntropyStrategy for TrajectoryStrategy {
    fn name(&self) -> &'static str {
        "trajectory"
    }
    fn estimate(&self, phi: &Endomorphism, base: &FiniteSubgroup, config: &EntropyConfig) -> Result<EntropyEstimate> {
        entropy_along(phi, base, config)
    }
}

pub struct LimitFreeStrategy;

impl EntropyStrategy for LimitFreeStrategy {
    fn name(&self) -> &'static str {
        "limit-free"
    }
    fn estimate(&self, phi: &Endomorphism, base: &FiniteSubgroup, config: &EntropyConfig) -> Result<EntropyEstimate> {
        limit_free_entropy(phi, base, config)
    }
}

/// Name-keyed registry of entropy strategies.
pub struct StrategyRegistry {
    strategies: BTreeMap<&'static str, Box<dyn EntropyStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { strategies: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(TrajectoryStrategy));
        r.register(Box::new(LimitFreeStrategy));
        r
    }

    pub fn register(&mut self, s: Box<dyn EntropyStrategy>) {
        self.strategies.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Result<&dyn EntropyStrategy> {
        self.strategies.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::param(format!("unknown strategy {name:?}; known: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.keys().copied().collect()
    }

    /// Sup over `family` using the named strategy.
    pub fn sup(&self, name: &str, phi: &Endomorphism, family: &[FiniteSubgroup], config: &EntropyConfig) -> Result<SupEstimate> {
        let s = self.get(name)?;
        sup_with(family, |f| s.estimate(phi, f, config))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, IndexSet};
    use crate::subgroup::closure;

    fn sum(p: u64, index: IndexSet) -> Group {
        Group::restricted_sum(Group::cyclic(p).unwrap(), index).unwrap()
    }

    fn coord0(g: &Group) -> FiniteSubgroup {
        closure(g, &g.block_generators(1), 1000).unwrap()
    }

    fn assert_flags_exact(phi: &Endomorphism, base: &FiniteSubgroup) -> Vec<bool> {
        let t = trajectory(phi, base, 6, 1 << 16).unwrap();
        let exact: Vec<bool> = t.steps().iter().map(|s| s.is_subgroup()).collect();
        let mut running = true;
        let prefix: Vec<bool> = exact.iter().map(|&f| { running &= f; running }).collect();
        let fast: Vec<bool> = t.subgroup_flags().iter().scan(true, |r, &f| { *r &= f; Some(*r) }).collect();
        assert_eq!(fast, prefix, "{}", phi.label());
        exact
    }

    #[test]
    fn fast_subgroup_flags_match_exhaustive_test() {
        let s3 = Group::semidirect_table(
            Group::cyclic(3).unwrap(),
            2,
            &[(Elem::Res(1), Elem::Res(2))],
        )
        .unwrap();
        let elems = s3.elements(16).unwrap();
        let mut saw_non_subgroup = false;
        for x in &elems {
            let phi = Endomorphism::conjugation(&s3, x.clone()).unwrap();
            for y in &elems {
                let base = closure(&s3, std::slice::from_ref(y), 16).unwrap();
                saw_non_subgroup |= assert_flags_exact(&phi, &base).contains(&false);
            }
        }
        assert!(saw_non_subgroup);
        let g = sum(6, IndexSet::N);
        assert_flags_exact(&Endomorphism::shift(&g, 1).unwrap(), &coord0(&g));
    }

    #[test]
    fn shift_is_window_stable_at_one() {
        let g = sum(2, IndexSet::N);
        let phi = Endomorphism::shift(&g, 1).unwrap();
        let e = entropy_along(&phi, &coord0(&g), &EntropyConfig::default()).unwrap();
        assert_eq!((e.beta, e.status, e.reached_at), (2, EstimateStatus::StabilizedWindow, 1));
    }

    #[test]
    fn identity_is_certified() {
        let g = sum(3, IndexSet::Z);
        let e = entropy_along(&Endomorphism::identity(&g), &coord0(&g), &EntropyConfig::default()).unwrap();
        assert_eq!((e.beta, e.status, e.reached_at), (1, EstimateStatus::CertifiedZero, 1));
        let e = limit_free_entropy(&Endomorphism::identity(&g), &coord0(&g), &EntropyConfig::default()).unwrap();
        assert_eq!((e.beta, e.status, e.reached_at), (1, EstimateStatus::CertifiedZero, 0));
    }

    #[test]
    fn limit_free_two_sided_shift() {
        let g = sum(2, IndexSet::Z);
        let phi = Endomorphism::shift(&g, 1).unwrap();
        let u = coord0(&g);
        let e_minus = Elem::sparse(vec![(-1, Elem::Res(1))]);
        let e_plus = Elem::sparse(vec![(1, Elem::Res(1))]);
        assert!(umin_membership(&phi, &u, &e_minus, 1).unwrap());
        assert!(!umin_membership(&phi, &u, &e_plus, 1).unwrap());
        let e = limit_free_entropy(&phi, &u, &EntropyConfig::default()).unwrap();
        assert_eq!((e.beta, e.status), (2, EstimateStatus::StabilizedWindow));
        assert_eq!(modulus(&phi, &u, 1 << 10).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn budget_is_a_status() {
        let g = sum(2, IndexSet::N);
        let phi = Endomorphism::shift(&g, 1).unwrap();
        let config = EntropyConfig { size_budget: 4, ..EntropyConfig::default() };
        let e = entropy_along(&phi, &coord0(&g), &config).unwrap();
        assert_eq!(e.status, EstimateStatus::BudgetExhausted);
        assert_eq!(e.beta, 2);
    }

    #[test]
    fn registry_lookup() {
        let r = StrategyRegistry::builtin();
        assert_eq!(r.names(), vec!["limit-free", "trajectory"]);
        assert!(r.get("nope").is_err());
    }
}
