//! JSON documents: endomorphism and subgroup descriptors, base families,
//! job specifications, and schema validation with JSON-pointer locations.
//!
//! Endomorphism grammar (relative to an ambient group):
//!
//! ```json
//! "identity"
//! "trivial"
//! {"shift": 1}
//! {"power": 4}
//! {"table": [["i", "j"], ["j", "i"]]}
//! {"generator_images": [["i", "j"], ["j", "i"]]}
//! {"diagonal": ["identity", {"shift": 1}]}
//! {"compose": [{"shift": 1}, {"power": 2}]}
//! {"automorphism": {"forward": {"shift": 1}, "inverse": {"shift": -1}}}
//! {"conjugation": [0, 1]}
//! {"permute": [[0, 1], [1, 0]]}
//! {"restrict": {"map": {"shift": 1}, "to": {"coordinates": {"from": 1}}}}
//! {"induced": {"map": "identity", "modulo": {"generators": ["-1"]}}}
//! {"iterate": {"map": {"shift": 1}, "times": 2}}
//! ```
//!
//! Subgroup witnesses: `"whole"`, `"trivial"`, `"base"`, `{"generators": [..]}`,
//! `{"multiples": k}`, `{"torsion": k}`, `{"coordinates": {"from": i}}`,
//! `{"factors": [..]}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::builders::{build, check_iwasawa_params, GroupDescriptor};
use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::group::{Group, IwasawaParams};
use crate::morphism::Endomorphism;
use crate::subgroup::{closure, FiniteSubgroup};
use crate::witness::Witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessDescriptor {
    Whole,
    Trivial,
    Base,
    Generators(Vec<Value>),
    Multiples(u64),
    Torsion(u64),
    Coordinates { from: i64 },
    Factors(Vec<WitnessDescriptor>),
}

impl WitnessDescriptor {
    pub fn build(&self, g: &Group) -> Result<Witness> {
        let w = match self {
            WitnessDescriptor::Whole => Witness::Whole,
            WitnessDescriptor::Trivial => Witness::Trivial,
            WitnessDescriptor::Base => Witness::Base,
            WitnessDescriptor::Generators(vs) => {
                let gens = vs.iter().map(|v| g.parse_element(v)).collect::<Result<Vec<Elem>>>()?;
                Witness::Finite(closure(g, &gens, crate::subgroup::DEFAULT_BUDGET)?)
            }
            WitnessDescriptor::Multiples(k) => Witness::Multiples(*k),
            WitnessDescriptor::Torsion(k) => Witness::Torsion(*k),
            WitnessDescriptor::Coordinates { from } => Witness::Coordinates { from: *from },
            WitnessDescriptor::Factors(ws) => {
                let fs = g.factors().ok_or_else(|| Error::param(format!("{g} is not a direct product")))?;
                if fs.len() != ws.len() {
                    return Err(Error::param(format!("expected {} factor witnesses, got {}", fs.len(), ws.len())));
                }
                Witness::Factors(fs.iter().zip(ws).map(|(f, w)| w.build(f)).collect::<Result<_>>()?)
            }
        };
        w.check_applicable(g)?;
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndoDescriptor {
    Identity,
    Trivial,
    Shift(i64),
    Power(u64),
    Table(Vec<(Value, Value)>),
    GeneratorImages(Vec<(Value, Value)>),
    Diagonal(Vec<EndoDescriptor>),
    Compose(Box<EndoDescriptor>, Box<EndoDescriptor>),
    Automorphism { forward: Box<EndoDescriptor>, inverse: Box<EndoDescriptor> },
    Conjugation(Value),
    Permute(Vec<(i64, i64)>),
    Restrict { map: Box<EndoDescriptor>, to: WitnessDescriptor },
    Induced { map: Box<EndoDescriptor>, modulo: WitnessDescriptor },
    Iterate { map: Box<EndoDescriptor>, times: u32 },
}

impl EndoDescriptor {
    pub fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::param(format!("bad endomorphism descriptor: {e}")))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("descriptors serialize")
    }

    /// Builds the endomorphism on `g` (restrictions and induced maps change the domain).
    pub fn build(&self, g: &Group) -> Result<Endomorphism> {
        let pairs = |ps: &[(Value, Value)]| -> Result<Vec<(Elem, Elem)>> {
            ps.iter().map(|(x, y)| Ok((g.parse_element(x)?, g.parse_element(y)?))).collect()
        };
        match self {
            EndoDescriptor::Identity => Ok(Endomorphism::identity(g)),
            EndoDescriptor::Trivial => Ok(Endomorphism::trivial(g)),
            EndoDescriptor::Shift(k) => Endomorphism::shift(g, *k),
            EndoDescriptor::Power(u) => Endomorphism::power(g, *u),
            EndoDescriptor::Table(ps) => Endomorphism::table(g, pairs(ps)?),
            EndoDescriptor::GeneratorImages(ps) => Endomorphism::from_generator_images(g, &pairs(ps)?),
            EndoDescriptor::Diagonal(ds) => {
                let fs = g.factors().ok_or_else(|| Error::param(format!("{g} is not a direct product")))?;
                if fs.len() != ds.len() {
                    return Err(Error::param(format!("expected {} factor maps, got {}", fs.len(), ds.len())));
                }
                let maps = fs.iter().zip(ds).map(|(f, d)| d.build(f)).collect::<Result<Vec<_>>>()?;
                Endomorphism::diagonal(g, maps)
            }
            EndoDescriptor::Compose(outer, inner) => Endomorphism::compose(&outer.build(g)?, &inner.build(g)?),
            EndoDescriptor::Automorphism { forward, inverse } => {
                Endomorphism::automorphism(forward.build(g)?, inverse.build(g)?, 0)
            }
            EndoDescriptor::Conjugation(x) => Endomorphism::conjugation(g, g.parse_element(x)?),
            EndoDescriptor::Permute(ps) => Endomorphism::permutation(g, ps.clone()),
            EndoDescriptor::Restrict { map, to } => map.build(g)?.restrict(to.build(g)?),
            EndoDescriptor::Induced { map, modulo } => map.build(g)?.induced_quotient_map(modulo.build(g)?),
            EndoDescriptor::Iterate { map, times } => Ok(map.build(g)?.power_iterate(*times)),
        }
    }
}

/// Family of finite base subgroups.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseSpec {
    /// Coordinate blocks `0..j` for `j = 1..=k`.
    Blocks(usize),
    /// Every cyclic subgroup of a finite group.
    AllCyclic,
    /// The whole (finite) group.
    Whole,
    /// Explicit generator lists, one per base.
    Explicit(Vec<Vec<Value>>),
}

impl Default for BaseSpec {
    fn default() -> Self {
        BaseSpec::Blocks(1)
    }
}

impl FromStr for BaseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("blocks:") {
            let k: usize = k.parse().map_err(|_| Error::param(format!("bad block count in {s:?}")))?;
            if k == 0 {
                return Err(Error::param("block count must be positive"));
            }
            return Ok(BaseSpec::Blocks(k));
        }
        match s {
            "all-cyclic" => Ok(BaseSpec::AllCyclic),
            "whole" => Ok(BaseSpec::Whole),
            _ if s.starts_with('[') => {
                let lists: Vec<Vec<Value>> = serde_json::from_str(s)
                    .map_err(|e| Error::param(format!("explicit bases must be a JSON list of generator lists: {e}")))?;
                Ok(BaseSpec::Explicit(lists))
            }
            _ => Err(Error::param(format!(
                "unknown base family {s:?}; expected blocks:K, all-cyclic, whole or a JSON list"
            ))),
        }
    }
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseSpec::Blocks(k) => write!(f, "blocks:{k}"),
            BaseSpec::AllCyclic => f.write_str("all-cyclic"),
            BaseSpec::Whole => f.write_str("whole"),
            BaseSpec::Explicit(v) => f.write_str(&serde_json::to_string(v).expect("values serialize")),
        }
    }
}

impl Serialize for BaseSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BaseSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            v @ Value::Array(_) => v.to_string().parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!("bad base family {other}"))),
        }
    }
}

impl BaseSpec {
    pub fn build(&self, g: &Group, budget: usize) -> Result<Vec<FiniteSubgroup>> {
        match self {
            BaseSpec::Blocks(k) => (1..=*k).map(|j| closure(g, &g.block_generators(j), budget)).collect(),
            BaseSpec::Whole => {
                if !g.is_finite() {
                    return Err(Error::param(format!("{g} is infinite; the whole group is not a finite base")));
                }
                Ok(vec![closure(g, &g.block_generators(1), budget)?])
            }
            BaseSpec::AllCyclic => all_cyclic_subgroups(g, budget),
            BaseSpec::Explicit(lists) => lists
                .iter()
                .map(|gens| {
                    let gens = gens.iter().map(|v| g.parse_element(v)).collect::<Result<Vec<_>>>()?;
                    closure(g, &gens, budget)
                })
                .collect(),
        }
    }
}

/// The distinct cyclic subgroups of a finite group, in order of their least generator.
pub fn all_cyclic_subgroups(g: &Group, budget: usize) -> Result<Vec<FiniteSubgroup>> {
    if !g.is_finite() {
        return Err(Error::param(format!("{g} is infinite; all-cyclic needs a finite group")));
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for x in g.elements(budget)? {
        let c = closure(g, std::slice::from_ref(&x), budget)?;
        if seen.insert(c.elements().to_vec()) {
            out.push(c);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Entropy,
    LimitFree,
    Structure,
    Decompose,
    Verify,
}

impl Command {
    pub fn needs_endomorphism(self) -> bool {
        matches!(self, Command::Entropy | Command::LimitFree)
    }

    pub fn needs_group(self) -> bool {
        !matches!(self, Command::Verify)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct JobConfig {
    pub n_max: usize,
    pub window: usize,
    pub size_budget: usize,
    pub level_max: usize,
    pub seed: u64,
}

impl Default for JobConfig {
    fn default() -> Self {
        let e = crate::entropy::EntropyConfig::default();
        JobConfig { n_max: e.n_max, window: e.window, size_budget: e.size_budget, level_max: e.level_max, seed: 0 }
    }
}

impl JobConfig {
    pub fn entropy(&self) -> crate::entropy::EntropyConfig {
        crate::entropy::EntropyConfig {
            n_max: self.n_max,
            window: self.window,
            size_budget: self.size_budget,
            level_max: self.level_max,
        }
    }
}

/// A complete job, as echoed in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endomorphism: Option<Value>,
    #[serde(default)]
    pub bases: BaseSpec,
    #[serde(default)]
    pub config: JobConfig,
    /// Entropy strategy name; the command decides when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// Element to split into primary parts (decompose only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Value>,
}

/// One schema or semantic problem, located by a JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{p}: {}", self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, pointer: &str, message: impl Into<String>) {
        self.0.push(Violation { pointer: pointer.to_string(), message: message.into() });
    }
}

fn child(ptr: &str, key: impl fmt::Display) -> String {
    let k = key.to_string().replace('~', "~0").replace('/', "~1");
    format!("{ptr}/{k}")
}

/// Validates a job document, a bare group descriptor, or a bare endomorphism
/// descriptor. Every violation is reported; nothing is executed.
pub fn validate(doc: &Value) -> Vec<Violation> {
    let mut c = Collector(Vec::new());
    match doc {
        Value::Object(map) if map.contains_key("command") || looks_like_job(map) => validate_job(map, &mut c),
        Value::Object(map) if map.is_empty() => validate_job(map, &mut c),
        _ => {
            let mut as_group = Collector(Vec::new());
            validate_group(doc, "", &mut as_group);
            if as_group.0.is_empty() {
                return Vec::new();
            }
            let mut as_endo = Collector(Vec::new());
            validate_endo_shape(doc, "", &mut as_endo);
            if as_endo.0.is_empty() {
                return Vec::new();
            }
            c = as_group;
        }
    }
    c.0
}

fn looks_like_job(map: &Map<String, Value>) -> bool {
    ["group", "endomorphism", "bases", "config"].iter().any(|k| map.contains_key(*k))
}

fn validate_job(map: &Map<String, Value>, c: &mut Collector) {
    for key in map.keys() {
        if !["command", "group", "endomorphism", "bases", "config", "strategy", "element"].contains(&key.as_str()) {
            c.push(&child("", key), "unknown field");
        }
    }
    let command = match map.get("command") {
        None => {
            c.push("/command", "missing required field");
            None
        }
        Some(v) => match serde_json::from_value::<Command>(v.clone()) {
            Ok(cmd) => Some(cmd),
            Err(_) => {
                c.push("/command", "expected one of entropy, limit-free, structure, decompose, verify");
                None
            }
        },
    };
    let needs_group = command.map_or(true, Command::needs_group);
    let needs_endo = command.map_or(false, Command::needs_endomorphism);
    let mut group = None;
    match map.get("group") {
        None if needs_group => c.push("/group", "missing required field"),
        None => {}
        Some(v) => {
            let before = c.0.len();
            validate_group(v, "/group", c);
            if c.0.len() == before {
                group = GroupDescriptor::from_json(v).ok().and_then(|d| build(&d).ok());
            }
        }
    }
    match map.get("endomorphism") {
        None if needs_endo => c.push("/endomorphism", "missing required field"),
        None => {}
        Some(v) => {
            let before = c.0.len();
            validate_endo_shape(v, "/endomorphism", c);
            if c.0.len() == before {
                if let Some(g) = &group {
                    if let Err(e) = EndoDescriptor::from_json(v).and_then(|d| d.build(g)) {
                        c.push("/endomorphism", e.to_string());
                    }
                }
            }
        }
    }
    if let Some(v) = map.get("strategy") {
        let known = crate::entropy::StrategyRegistry::builtin().names();
        if !v.as_str().is_some_and(|s| known.contains(&s)) {
            c.push("/strategy", format!("expected one of {}", known.join(", ")));
        }
    }
    if let (Some(v), Some(g)) = (map.get("element"), &group) {
        if let Err(e) = g.parse_element(v) {
            c.push("/element", e.to_string());
        }
    }
    if let Some(v) = map.get("bases") {
        if let Err(e) = serde_json::from_value::<BaseSpec>(v.clone()) {
            c.push("/bases", e.to_string());
        }
    }
    if let Some(v) = map.get("config") {
        match v.as_object() {
            None => c.push("/config", "expected an object"),
            Some(cfg) => {
                for (k, x) in cfg {
                    let p = child("/config", k);
                    if !["n_max", "window", "size_budget", "level_max", "seed"].contains(&k.as_str()) {
                        c.push(&p, "unknown field");
                    } else if x.as_u64().is_none() {
                        c.push(&p, "expected a non-negative integer");
                    } else if k != "seed" && x.as_u64() == Some(0) {
                        c.push(&p, "must be positive");
                    }
                }
            }
        }
    }
}

fn single_key<'a>(v: &'a Value, ptr: &str, c: &mut Collector, what: &str) -> Option<(&'a str, &'a Value)> {
    match v.as_object() {
        Some(m) if m.len() == 1 => m.iter().next().map(|(k, x)| (k.as_str(), x)),
        _ => {
            c.push(ptr, format!("expected a {what} constructor (a string or a single-key object)"));
            None
        }
    }
}

fn positive(v: Option<&Value>, ptr: &str, c: &mut Collector) -> Option<u64> {
    match v.and_then(Value::as_u64) {
        Some(n) if n >= 1 => Some(n),
        Some(_) => {
            c.push(ptr, "must be positive");
            None
        }
        None if v.is_none() => {
            c.push(ptr, "missing required field");
            None
        }
        None => {
            c.push(ptr, "expected a positive integer");
            None
        }
    }
}

fn field<'a>(m: &'a Value, key: &str, ptr: &str, c: &mut Collector) -> Option<&'a Value> {
    let x = m.get(key);
    if x.is_none() {
        c.push(&child(ptr, key), "missing required field");
    }
    x
}

fn validate_group(v: &Value, ptr: &str, c: &mut Collector) {
    if let Some(s) = v.as_str() {
        if s != "q8" {
            c.push(ptr, format!("unknown group constructor {s:?}"));
        }
        return;
    }
    let Some((key, body)) = single_key(v, ptr, c, "group") else { return };
    let here = child(ptr, key);
    let before = c.0.len();
    match key {
        "cyclic" => {
            positive(Some(body), &here, c);
        }
        "product" => match body.as_array() {
            Some(fs) if !fs.is_empty() => {
                for (i, f) in fs.iter().enumerate() {
                    validate_group(f, &child(&here, i), c);
                }
            }
            _ => c.push(&here, "expected a non-empty list of factors"),
        },
        "sum" => {
            if let Some(x) = field(body, "component", &here, c) {
                validate_group(x, &child(&here, "component"), c);
            }
            if let Some(x) = field(body, "index", &here, c) {
                if x != "N" && x != "Z" {
                    c.push(&child(&here, "index"), "expected \"N\" or \"Z\"");
                }
            }
        }
        "semidirect" => {
            if let Some(x) = field(body, "base", &here, c) {
                validate_group(x, &child(&here, "base"), c);
            }
            positive(body.get("order"), &child(&here, "order"), c);
            if let Some(a) = field(body, "action", &here, c) {
                let ap = child(&here, "action");
                match a.as_object().filter(|m| m.len() == 1).and_then(|m| m.iter().next()) {
                    Some((k, x)) if k == "power" => {
                        positive(Some(x), &child(&ap, "power"), c);
                    }
                    Some((k, x)) if k == "table" => {
                        if !x.as_array().is_some_and(|ps| ps.iter().all(|p| p.as_array().is_some_and(|q| q.len() == 2))) {
                            c.push(&child(&ap, "table"), "expected a list of [generator, image] pairs");
                        }
                    }
                    _ => c.push(&ap, "expected {\"power\": u} or {\"table\": [[g, image], ..]}"),
                }
            }
        }
        "hamiltonian" => {
            for k in ["b", "d"] {
                if let Some(x) = field(body, k, &here, c) {
                    validate_group(x, &child(&here, k), c);
                }
            }
        }
        "iwasawa" => {
            let p = positive(body.get("p"), &child(&here, "p"), c);
            let mut exps = [0u32; 3];
            let mut ok = p.is_some();
            for (slot, k) in exps.iter_mut().zip(["n", "m", "s"]) {
                match positive(body.get(k), &child(&here, k), c) {
                    Some(x) if x <= 64 => *slot = x as u32,
                    Some(_) => {
                        c.push(&child(&here, k), "exponent too large");
                        ok = false;
                    }
                    None => ok = false,
                }
            }
            if let Some(x) = field(body, "base", &here, c) {
                validate_group(x, &child(&here, "base"), c);
            }
            if ok {
                let params = IwasawaParams { p: p.unwrap(), n: exps[0], m: exps[1], s: exps[2] };
                if let Err(e) = check_iwasawa_params(params) {
                    c.push(&here, e.to_string());
                }
            }
        }
        "quotient" => {
            if let Some(x) = field(body, "base", &here, c) {
                validate_group(x, &child(&here, "base"), c);
            }
            positive(body.get("power"), &child(&here, "power"), c);
        }
        _ => c.push(ptr, format!("unknown group constructor {key:?}")),
    }
    if c.0.len() == before && ptr.is_empty() || c.0.len() == before && ptr == "/group" {
        // shape is fine: surface semantic errors from the constructors
        if let Err(e) = GroupDescriptor::from_json(v).and_then(|d| build(&d)) {
            c.push(ptr, e.to_string());
        }
    }
}

fn validate_endo_shape(v: &Value, ptr: &str, c: &mut Collector) {
    if let Some(s) = v.as_str() {
        if s != "identity" && s != "trivial" {
            c.push(ptr, format!("unknown endomorphism constructor {s:?}"));
        }
        return;
    }
    let Some((key, body)) = single_key(v, ptr, c, "endomorphism") else { return };
    let here = child(ptr, key);
    let pairs_ok = |x: &Value| x.as_array().is_some_and(|ps| ps.iter().all(|p| p.as_array().is_some_and(|q| q.len() == 2)));
    match key {
        "shift" => {
            if body.as_i64().is_none() {
                c.push(&here, "expected an integer offset");
            }
        }
        "power" => {
            positive(Some(body), &here, c);
        }
        "table" | "generator_images" | "permute" => {
            if !pairs_ok(body) {
                c.push(&here, "expected a list of pairs");
            }
        }
        "diagonal" => match body.as_array() {
            Some(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    validate_endo_shape(d, &child(&here, i), c);
                }
            }
            None => c.push(&here, "expected a list of factor maps"),
        },
        "compose" => match body.as_array() {
            Some(ds) if ds.len() == 2 => {
                for (i, d) in ds.iter().enumerate() {
                    validate_endo_shape(d, &child(&here, i), c);
                }
            }
            _ => c.push(&here, "expected [outer, inner]"),
        },
        "automorphism" => {
            for k in ["forward", "inverse"] {
                if let Some(x) = field(body, k, &here, c) {
                    validate_endo_shape(x, &child(&here, k), c);
                }
            }
        }
        "conjugation" => {}
        "restrict" | "induced" | "iterate" => {
            if let Some(x) = field(body, "map", &here, c) {
                validate_endo_shape(x, &child(&here, "map"), c);
            }
            let other = match key {
                "restrict" => "to",
                "induced" => "modulo",
                _ => "times",
            };
            if let Some(x) = field(body, other, &here, c) {
                if other == "times" {
                    if x.as_u64().is_none() {
                        c.push(&child(&here, "times"), "expected a non-negative integer");
                    }
                } else if serde_json::from_value::<WitnessDescriptor>(x.clone()).is_err() {
                    c.push(&child(&here, other), "bad subgroup witness");
                }
            }
        }
        _ => c.push(ptr, format!("unknown endomorphism constructor {key:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_document_lists_missing_fields() {
        let v = validate(&json!({}));
        let ptrs: Vec<&str> = v.iter().map(|x| x.pointer.as_str()).collect();
        assert_eq!(ptrs, vec!["/command", "/group"]);
    }

    #[test]
    fn iwasawa_constraint_is_named() {
        let doc = json!({"command": "structure", "group": {"iwasawa": {"p": 2, "n": 2, "m": 1, "s": 1, "base": {"cyclic": 4}}}});
        let v = validate(&doc);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].pointer, "/group/iwasawa");
        assert!(v[0].message.contains("if p = 2 then s >= 2"), "{}", v[0].message);
    }

    #[test]
    fn valid_job_has_no_violations() {
        let doc = json!({"command": "entropy", "group": {"sum": {"component": {"cyclic": 2}, "index": "N"}},
                         "endomorphism": {"shift": 1}, "bases": "blocks:2", "config": {"n_max": 8}});
        assert!(validate(&doc).is_empty());
        let job: JobSpec = serde_json::from_value(doc).unwrap();
        assert_eq!(job.bases, BaseSpec::Blocks(2));
        assert_eq!(job.config.n_max, 8);
        assert_eq!(job.config.window, 3);
    }

    #[test]
    fn nested_pointers() {
        let doc = json!({"command": "entropy", "group": {"product": ["q8", {"cyclic": 0}]}, "endomorphism": {"compose": ["identity", "bogus"]}});
        let v = validate(&doc);
        let ptrs: Vec<&str> = v.iter().map(|x| x.pointer.as_str()).collect();
        assert_eq!(ptrs, vec!["/group/product/1/cyclic", "/endomorphism/compose/1"]);
    }

    #[test]
    fn endomorphism_documents_build() {
        let g = build(&GroupDescriptor::sum(GroupDescriptor::cyclic(2), crate::group::IndexSet::Z)).unwrap();
        let d = EndoDescriptor::from_json(&json!({"automorphism": {"forward": {"shift": 1}, "inverse": {"shift": -1}}})).unwrap();
        assert!(d.build(&g).is_ok());
        let d = EndoDescriptor::from_json(&json!({"iterate": {"map": {"shift": 1}, "times": 2}})).unwrap();
        let phi = d.build(&g).unwrap();
        let e0 = Elem::sparse(vec![(0, Elem::Res(1))]);
        assert_eq!(phi.apply(&e0), Elem::sparse(vec![(2, Elem::Res(1))]));
        let d = EndoDescriptor::from_json(&json!({"restrict": {"map": {"shift": 1}, "to": {"coordinates": {"from": 1}}}}));
        assert!(d.unwrap().build(&g).is_ok());
        let d = EndoDescriptor::from_json(&json!({"restrict": {"map": {"shift": -1}, "to": {"coordinates": {"from": 1}}}}));
        assert!(d.unwrap().build(&g).is_err());
    }

    #[test]
    fn base_specs_parse() {
        assert_eq!("blocks:3".parse::<BaseSpec>().unwrap(), BaseSpec::Blocks(3));
        assert_eq!("all-cyclic".parse::<BaseSpec>().unwrap(), BaseSpec::AllCyclic);
        let e: BaseSpec = "[[\"i\"], [\"j\", \"-1\"]]".parse().unwrap();
        assert_eq!(e.to_string(), "[[\"i\"],[\"j\",\"-1\"]]");
        assert!("blocks:0".parse::<BaseSpec>().is_err());
        let q = Group::quaternion();
        assert_eq!(BaseSpec::AllCyclic.build(&q, 100).unwrap().len(), 5);
    }
}
