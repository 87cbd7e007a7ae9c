//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use algent_core::builders::{build, example_non_fc, example_non_fc_truncation, iwasawa_instances, GroupDescriptor};
use algent_core::documents::{BaseSpec, EndoDescriptor};
use algent_core::entropy::{entropy_along, entropy_along_traced, EntropyConfig, EstimateStatus};
use algent_core::laws::{FixtureBundle, LawFixture, LawRegistry, LawReport, Verdict};
use algent_core::numtheory::factorize;
use algent_core::structure::{
    classify, dedekind_baer_decompose, fc_by_commutator, iwasawa_derived, p_decompose_element, DedekindBaer,
    SUBGROUP_ENUMERATION_CAP,
};
use algent_core::subgroup::closure;
use algent_core::{Endomorphism, FiniteSubgroup, Group};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn config() -> EntropyConfig {
    EntropyConfig::default()
}

fn group(v: &Value) -> Group {
    build(&GroupDescriptor::from_json(v).unwrap()).unwrap()
}

fn family(g: &Group, bases: &BaseSpec) -> Vec<FiniteSubgroup> {
    bases.build(g, config().size_budget).unwrap()
}

fn endo(f: &LawFixture, g: &Group) -> Option<Endomorphism> {
    f.endomorphism.as_ref().map(|v| EndoDescriptor::from_json(v).unwrap().build(g).unwrap())
}

fn law(id: &str) -> LawReport {
    let bundle = FixtureBundle::bundled();
    LawRegistry::builtin().run_law(id, &bundle.laws[id], &config()).unwrap()
}

fn fixture<'a>(report: &'a LawReport, name: &str) -> &'a Value {
    &report.fixtures.iter().find(|f| f.fixture == name).unwrap_or_else(|| panic!("no fixture {name}")).detail
}

/// The prime `p` when every element of the group has `p`-power order.
fn p_group_prime(g: &Group) -> Option<u64> {
    let f = factorize(g.exponent()?);
    (f.len() == 1).then(|| f[0].0)
}

fn is_power_of(p: u64, mut x: u64) -> bool {
    while x > 1 && x % p == 0 {
        x /= p;
    }
    x == 1
}

fn coord0(g: &Group) -> FiniteSubgroup {
    closure(g, &g.block_generators(1), 1 << 10).unwrap()
}

fn sum_n(p: u64) -> Group {
    group(&json!({"sum": {"component": {"cyclic": p}, "index": "N"}}))
}

fn identity_law() -> Outcome {
    let bundle = FixtureBundle::bundled();
    let mut bases = 0;
    for (id, f) in bundle.all_fixtures() {
        let g = group(&f.group);
        let phi = Endomorphism::identity(&g);
        for b in family(&g, &f.bases) {
            let e = entropy_along(&phi, &b, &config()).unwrap();
            ensure!(
                e.beta == 1 && e.status == EstimateStatus::CertifiedZero,
                "{id}/{}: beta {} status {}",
                f.name,
                e.beta,
                e.status.as_str()
            );
            bases += 1;
        }
    }
    let r = law("identity");
    ensure!(r.verdict == Verdict::HoldsExactly, "identity law verdict {}", r.verdict.as_str());
    Ok(format!("beta = 1, certified_zero on {bases} bases of {} fixtures", bundle.all_fixtures().count()))
}

fn shift_entropy() -> Outcome {
    for p in [2u64, 3, 5] {
        let g = sum_n(p);
        let phi = Endomorphism::shift(&g, 1).unwrap();
        let e = entropy_along(&phi, &coord0(&g), &config()).unwrap();
        ensure!(e.beta == p, "p = {p}: beta {}", e.beta);
        ensure!(e.status == EstimateStatus::StabilizedWindow, "p = {p}: status {}", e.status.as_str());
        ensure!(e.reached_at + e.window <= 4, "p = {p}: stable only from step {}", e.reached_at + e.window);
    }
    let bundle = FixtureBundle::bundled();
    let mut nonzero = 0;
    for (id, f) in bundle.all_fixtures() {
        let g = group(&f.group);
        let (Some(p), Some(phi)) = (p_group_prime(&g), endo(f, &g)) else { continue };
        for b in family(&g, &f.bases) {
            let e = entropy_along(&phi, &b, &config()).unwrap();
            ensure!(is_power_of(p, e.beta), "{id}/{}: beta {} on a {p}-group", f.name, e.beta);
            nonzero += usize::from(e.beta > 1);
        }
    }
    Ok(format!("beta = p for p in 2, 3, 5, stable by n = 4; {nonzero} nonzero p-group betas are powers of p"))
}

fn weak_decrease() -> Outcome {
    let bundle = FixtureBundle::bundled();
    let (mut checked, mut steps) = (0, 0);
    for (id, f) in bundle.all_fixtures() {
        let g = group(&f.group);
        let Some(phi) = endo(f, &g) else { continue };
        let mut maps = vec![phi.clone()];
        for m in f.powers.iter().flatten().filter(|&&m| (2..=3).contains(&m)) {
            maps.push(phi.power_iterate(*m));
        }
        for map in &maps {
            for b in family(&g, &f.bases) {
                let (_, t) = entropy_along_traced(map, &b, &config()).unwrap();
                if t.subgroup_mode() {
                    ensure!(t.weakly_decreasing(), "{id}/{}: sizes {:?}", f.name, t.sizes());
                    checked += 1;
                    steps += t.betas().len();
                }
            }
        }
    }
    Ok(format!("{checked} subgroup-mode trajectories, {steps} ratios, all weakly decreasing"))
}

fn oracle_equivalence() -> Outcome {
    let r = law("oracle-equivalence");
    let mut compared = 0;
    for f in &r.fixtures {
        ensure!(f.verdict != Verdict::Violation, "{}: violation", f.fixture);
        for row in f.detail["bases"].as_array().unwrap() {
            let (a, b) = (&row["trajectory"], &row["limit_free"]);
            let reliable = |x: &Value| x["status"] != "budget_exhausted" && x["status"] != "non_subgroup_mode";
            if reliable(a) && reliable(b) {
                ensure!(a["beta"] == b["beta"], "{}: {} vs {}", f.fixture, a["beta"], b["beta"]);
                compared += 1;
            }
        }
    }
    ensure!(compared > 0, "nothing compared");
    Ok(format!("trajectory and limit-free betas agree on {compared} bases over {} fixtures", r.fixtures.len()))
}

fn inverse_modulus() -> Outcome {
    let r = law("inverse-modulus");
    let mut bases = 0;
    for f in &r.fixtures {
        for row in f.detail["bases"].as_array().unwrap() {
            ensure!(row["modulus"] == "1", "{}: modulus {}", f.fixture, row["modulus"]);
            ensure!(row["holds"] == true, "{}: {row}", f.fixture);
            bases += 1;
        }
    }
    ensure!(r.violations() == 0, "violations");
    Ok(format!("beta(phi) = beta(phi^-1) * 1 on {bases} bases of {} automorphisms", r.fixtures.len()))
}

fn log_law() -> Outcome {
    let r = law("log-law");
    for (name, p) in [("shift-z2", 2u64), ("shift-z3", 3)] {
        let d = fixture(&r, name);
        let mut seen = Vec::new();
        for row in d["powers"].as_array().unwrap() {
            let m = row["m"].as_u64().unwrap() as u32;
            ensure!(row["beta_power"].as_u64() == Some(p.pow(m)), "{name}, m = {m}: {row}");
            seen.push(m);
        }
        ensure!([1, 2, 3].iter().all(|m| seen.contains(m)), "{name}: powers {seen:?}");
    }
    ensure!(r.violations() == 0, "violations");
    Ok("beta(phi^m) = beta(phi)^m for m = 1, 2, 3 on the shift fixtures".into())
}

fn prime_sum() -> Outcome {
    let r = law("prime-sum");
    for (name, total, primes) in [("shift-z6", 6u64, vec![2u64, 3]), ("shift-z30", 30, vec![2, 3, 5])] {
        let d = fixture(&r, name);
        let parts: Vec<u64> = d["primes"].as_array().unwrap().iter().map(|x| x["beta"]["beta"].as_u64().unwrap()).collect();
        ensure!(d["beta"]["beta"].as_u64() == Some(total), "{name}: beta {}", d["beta"]["beta"]);
        ensure!(parts == primes, "{name}: prime betas {parts:?}");
        ensure!(parts.iter().product::<u64>() == total, "{name}: product");
    }
    ensure!(r.violations() == 0, "violations");
    Ok("6 = 2 * 3 and 30 = 2 * 3 * 5".into())
}

fn addition() -> Outcome {
    let r = law("addition");
    for (name, whole, q, h) in
        [("hamiltonian-q8-factor", 3, 3, 1), ("sum-z6-two-part", 6, 3, 2), ("two-sided-shift-whole", 2, 1, 2)]
    {
        let d = fixture(&r, name);
        let b = |k: &str| d[k]["beta"].as_u64().unwrap();
        ensure!(d["mode"] == "equality", "{name}: mode {}", d["mode"]);
        ensure!(
            (b("beta"), b("beta_quotient"), b("beta_restriction")) == (whole, q, h),
            "{name}: {} {} {}",
            b("beta"),
            b("beta_quotient"),
            b("beta_restriction")
        );
    }
    let m = law("monotonicity");
    let mut per_base = 0;
    for rep in [&r, &m] {
        for f in &rep.fixtures {
            ensure!(f.verdict != Verdict::Violation, "{}/{}: violation", rep.law, f.fixture);
            per_base += f.detail["bases"].as_array().map_or(0, Vec::len);
        }
    }
    Ok(format!("3 = 3 * 1, 6 = 3 * 2, 2 = 1 * 2 exactly; inequality holds on {per_base} per-base splits"))
}

fn structure_oracle() -> Outcome {
    let mut groups: Vec<(String, Value)> = vec![
        ("Q8".into(), json!("q8")),
        ("Q8 x Z2 x Z3".into(), json!({"product": ["q8", {"cyclic": 2}, {"cyclic": 3}]})),
        ("Q8 x Z4".into(), json!({"product": ["q8", {"cyclic": 4}]})),
        ("S3".into(), json!({"semidirect": {"base": {"cyclic": 3}, "order": 2, "action": {"table": [[1, 2]]}}})),
    ];
    for (id, f) in FixtureBundle::bundled().all_fixtures() {
        groups.push((format!("{id}/{}", f.name), f.group.clone()));
    }
    let mut checked = 0;
    for (name, desc) in &groups {
        let g = group(desc);
        if g.size().map_or(true, |s| s > SUBGROUP_ENUMERATION_CAP as u128) {
            continue;
        }
        let r = dedekind_baer_decompose(&g, SUBGROUP_ENUMERATION_CAP).unwrap();
        ensure!(r.agrees == Some(true), "{name}: decomposition {:?} vs exhaustive {:?}", r.decomposition, r.exhaustive_hamiltonian);
        checked += 1;
    }
    let hamiltonian = |v: &Value| {
        matches!(dedekind_baer_decompose(&group(v), 128).unwrap().decomposition, DedekindBaer::Hamiltonian { .. })
    };
    ensure!(hamiltonian(&groups[0].1) && hamiltonian(&groups[1].1), "positives");
    ensure!(!hamiltonian(&groups[2].1) && !hamiltonian(&groups[3].1), "negatives");
    Ok(format!("decomposition agrees with exhaustive normality on {checked} finite fixtures"))
}

fn iwasawa() -> Outcome {
    let mut instances = 0;
    for p in [2u64, 3, 5, 7] {
        for (params, r) in iwasawa_instances(p, 243) {
            let rep = iwasawa_derived(params, r).unwrap();
            ensure!(rep.equal, "{rep:?}");
            instances += 1;
        }
    }
    for (p, n) in [(3u64, 2u32), (2, 3)] {
        for k in 1..=2 {
            let t = example_non_fc_truncation(p, n, k).unwrap();
            ensure!(classify(&t, 4096).unwrap().quasihamiltonian.value, "truncation p={p} n={n} k={k}");
        }
        ensure!(!fc_by_commutator(&example_non_fc(p, n).unwrap()).unwrap(), "p={p}: reported FC");
    }
    Ok(format!("G' = A^(p^s) on all {instances} instances with |G| <= 243; truncations quasihamiltonian, limit not FC"))
}

fn p_decomposition() -> Outcome {
    let groups: Vec<Group> = [
        json!({"cyclic": 360}),
        json!({"sum": {"component": {"cyclic": 30}, "index": "N"}}),
        json!({"sum": {"component": {"cyclic": 12}, "index": "Z"}}),
        json!({"product": ["q8", {"cyclic": 15}]}),
        json!({"product": ["q8", {"sum": {"component": {"cyclic": 3}, "index": "N"}}]}),
        json!({"hamiltonian": {"b": {"cyclic": 2}, "d": {"product": [{"cyclic": 3}, {"cyclic": 5}]}}}),
        json!({"iwasawa": {"p": 3, "n": 2, "m": 1, "s": 1, "base": {"cyclic": 9}}}),
        json!({"product": [{"iwasawa": {"p": 3, "n": 2, "m": 1, "s": 1, "base": {"cyclic": 9}}}, {"cyclic": 10}]}),
    ]
    .iter()
    .map(group)
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let total = 1000;
    for i in 0..total {
        let g = &groups[i % groups.len()];
        let x = g.sample(&mut rng, 4);
        let d = p_decompose_element(g, &x).unwrap();
        let mut acc = g.identity();
        for part in &d.parts {
            let y = g.parse_element(&json!(part.part)).unwrap();
            let o = g.order_of(&y).unwrap();
            ensure!(o == part.prime.pow(part.exponent), "{g}: part of order {o}, expected {}^{}", part.prime, part.exponent);
            acc = g.mul(&acc, &y);
        }
        ensure!(acc == x, "{g}: parts of {} do not multiply back", g.format(&x));
        ensure!(d.order == 1 || d.bezout_sum() == 1, "{g}: Bezout sum {}", d.bezout_sum());
    }
    Ok(format!("{total} seeded elements over {} groups", groups.len()))
}

fn determinism() -> Outcome {
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_algent")).args(["verify", "--format", "json"]).output().unwrap();
        let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let timing = v.as_object_mut().unwrap().remove("timing");
        (out.status.code(), serde_json::to_vec(&v).unwrap(), timing.is_some())
    };
    let (c1, a, t1) = run();
    let (c2, b, t2) = run();
    ensure!(c1 == Some(0) && c2 == Some(0), "exit statuses {c1:?} {c2:?}");
    ensure!(t1 && t2, "timing section missing");
    ensure!(a == b, "reports differ");
    Ok(format!("two full verify runs, {} identical bytes outside timing", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("identity law", identity_law),
        ("shift entropy", shift_entropy),
        ("weak decrease", weak_decrease),
        ("oracle equivalence", oracle_equivalence),
        ("inverse and modulus", inverse_modulus),
        ("logarithmic law", log_law),
        ("prime sum", prime_sum),
        ("addition", addition),
        ("structure oracle", structure_oracle),
        ("iwasawa derived law", iwasawa),
        ("p-decomposition round trip", p_decomposition),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
