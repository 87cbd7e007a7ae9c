//! Job execution and report rendering behind the `algent` binary.

use std::fmt::Write as _;
use std::time::Duration;

use algent_core::builders::{build, GroupDescriptor};
use algent_core::documents::{validate, Command, EndoDescriptor, JobSpec, Violation};
use algent_core::entropy::{EstimateStatus, StrategyRegistry, SupEstimate};
use algent_core::laws::{FixtureBundle, HarnessReport, LawRegistry, Verdict};
use algent_core::structure::{
    classify, classify_structural, dedekind_baer_decompose, fc_by_commutator, p_decompose_element,
    ClassificationReport, DecompositionReport, PrimaryDecomposition,
};
use algent_core::subgroup::{closure, commutator_subgroup};
use algent_core::{Error, Group, IwasawaParams};
use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL_NAME: &str = "algent";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest finite group classified exhaustively.
const CLASSIFY_CAP: usize = 1 << 12;
/// Largest finite group handed to the Dedekind-Baer decomposition.
const DECOMPOSE_CAP: usize = 1 << 12;
/// Random cyclic pairs sampled when classifying an infinite group.
const STRUCTURE_SAMPLES: usize = 64;

pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const VIOLATION: u8 = 2;
    pub const BUDGET: u8 = 3;
}

/// Why a job did not produce a report.
#[derive(Debug)]
pub enum RunError {
    /// The document failed validation; every violation is listed.
    Invalid(Vec<Violation>),
    /// The job was well formed but could not be carried out.
    Failed(Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Invalid(vs) => {
                write!(f, "invalid job document ({} problem{})", vs.len(), if vs.len() == 1 { "" } else { "s" })?;
                for v in vs {
                    write!(f, "\n  {v}")?;
                }
                Ok(())
            }
            RunError::Failed(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Failed(e)
    }
}

/// Validates a job document and decodes it.
pub fn load_job(doc: &Value) -> Result<JobSpec, RunError> {
    let violations = validate(doc);
    if !violations.is_empty() {
        return Err(RunError::Invalid(violations));
    }
    serde_json::from_value(doc.clone())
        .map_err(|e| RunError::Invalid(vec![Violation { pointer: String::new(), message: e.to_string() }]))
}

/// Where `verify` takes its fixtures from.
#[derive(Clone, Debug)]
pub struct VerifySource {
    /// `"bundled"` or the path the bundle was read from.
    pub name: String,
    pub bundle: FixtureBundle,
    /// Law ids to run; all when empty.
    pub laws: Vec<String>,
}

impl Default for VerifySource {
    fn default() -> Self {
        VerifySource { name: "bundled".into(), bundle: FixtureBundle::bundled(), laws: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyResults {
    pub group: String,
    pub endomorphism: String,
    pub strategy: String,
    pub bases: String,
    pub family_size: usize,
    pub sup: SupEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct IwasawaSummary {
    pub params: IwasawaParams,
    pub fc_by_commutator: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureResults {
    pub group: String,
    pub finite: bool,
    pub classification: ClassificationReport,
    /// Order of the commutator subgroup, for finite groups.
    pub derived_order: Option<usize>,
    pub iwasawa: Option<IwasawaSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecomposeResults {
    pub group: String,
    pub dedekind_baer: Option<DecompositionReport>,
    pub primary: Option<PrimaryDecomposition>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyResults {
    pub bundle: String,
    pub laws_selected: Vec<String>,
    pub harness: HarnessReport,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Results {
    Entropy(EntropyResults),
    Structure(StructureResults),
    Decompose(DecomposeResults),
    Verify(VerifyResults),
}

/// Outcome of one job; deterministic for a fixed job.
#[derive(Clone, Debug)]
pub struct Report {
    pub job: JobSpec,
    pub results: Results,
}

fn build_group(job: &JobSpec) -> Result<Group, RunError> {
    let v = job.group.as_ref().ok_or_else(|| {
        RunError::Invalid(vec![Violation { pointer: "/group".into(), message: "missing required field".into() }])
    })?;
    Ok(build(&GroupDescriptor::from_json(v)?)?)
}

/// Executes a decoded job.
pub fn run(job: &JobSpec, verify: &VerifySource) -> Result<Report, RunError> {
    let config = job.config.entropy();
    let results = match job.command {
        Command::Entropy | Command::LimitFree => {
            let g = build_group(job)?;
            let endo = job.endomorphism.as_ref().ok_or_else(|| {
                RunError::Invalid(vec![Violation {
                    pointer: "/endomorphism".into(),
                    message: "missing required field".into(),
                }])
            })?;
            let phi = EndoDescriptor::from_json(endo)?.build(&g)?;
            let strategy = match (&job.strategy, job.command) {
                (Some(s), _) => s.clone(),
                (None, Command::LimitFree) => "limit-free".to_string(),
                (None, _) => "trajectory".to_string(),
            };
            let family = job.bases.build(&g, config.size_budget)?;
            let sup = StrategyRegistry::builtin().sup(&strategy, &phi, &family, &config)?;
            Results::Entropy(EntropyResults {
                group: g.to_string(),
                endomorphism: phi.label(),
                strategy,
                bases: job.bases.to_string(),
                family_size: family.len(),
                sup,
            })
        }
        Command::Structure => {
            let g = build_group(job)?;
            let finite = g.is_finite();
            let classification = if finite {
                classify(&g, CLASSIFY_CAP)?
            } else {
                classify_structural(&g, 2, STRUCTURE_SAMPLES, job.config.seed)?
            };
            let derived_order = if finite {
                let all = closure(&g, &g.block_generators(1), CLASSIFY_CAP)?;
                Some(commutator_subgroup(&all, CLASSIFY_CAP)?.order())
            } else {
                None
            };
            let iwasawa = match g.iwasawa_params() {
                Some(params) => Some(IwasawaSummary { params, fc_by_commutator: fc_by_commutator(&g)? }),
                None => None,
            };
            Results::Structure(StructureResults { group: g.to_string(), finite, classification, derived_order, iwasawa })
        }
        Command::Decompose => {
            let g = build_group(job)?;
            let primary = match &job.element {
                Some(v) => Some(p_decompose_element(&g, &g.parse_element(v)?)?),
                None => None,
            };
            let dedekind_baer = if g.is_finite() {
                Some(dedekind_baer_decompose(&g, DECOMPOSE_CAP)?)
            } else if primary.is_none() {
                return Err(Error::unsupported(format!(
                    "the Dedekind-Baer decomposition needs a finite group; {g} is infinite (pass an element for its primary parts)"
                ))
                .into());
            } else {
                None
            };
            Results::Decompose(DecomposeResults { group: g.to_string(), dedekind_baer, primary })
        }
        Command::Verify => {
            let registry = LawRegistry::builtin();
            let mut bundle = verify.bundle.clone();
            if !verify.laws.is_empty() {
                for id in &verify.laws {
                    registry.get(id)?;
                    if !bundle.laws.contains_key(id) {
                        return Err(Error::param(format!("the bundle has no fixtures for law {id:?}")).into());
                    }
                }
                bundle.laws.retain(|k, _| verify.laws.contains(k));
            }
            let harness = registry.run_bundle(&bundle, &config)?;
            Results::Verify(VerifyResults {
                bundle: verify.name.clone(),
                laws_selected: bundle.laws.keys().cloned().collect(),
                harness,
            })
        }
    };
    Ok(Report { job: job.clone(), results })
}

impl Report {
    /// Exit status for this report.
    pub fn exit_code(&self, strict: bool) -> u8 {
        match &self.results {
            Results::Verify(v) if v.harness.violations > 0 => exit::VIOLATION,
            Results::Entropy(e) if strict && e.sup.rows.iter().any(|r| r.estimate.status == EstimateStatus::BudgetExhausted) => {
                exit::BUDGET
            }
            _ => exit::OK,
        }
    }

    /// Structured report. Everything except the `timing` key depends only on
    /// the job.
    pub fn document(&self, elapsed: Option<Duration>) -> Value {
        let mut doc = json!({
            "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
            "job": self.job,
            "results": self.results,
        });
        if let Some(d) = elapsed {
            doc["timing"] = json!({ "elapsed_ms": d.as_millis() as u64 });
        }
        doc
    }

    pub fn render_json(&self, elapsed: Option<Duration>) -> String {
        let mut s = serde_json::to_string_pretty(&self.document(elapsed)).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        match &self.results {
            Results::Entropy(e) => render_entropy(&mut out, e),
            Results::Structure(s) => render_structure(&mut out, s),
            Results::Decompose(d) => render_decompose(&mut out, d),
            Results::Verify(v) => render_verify(&mut out, v),
        }
        out
    }
}

fn render_entropy(out: &mut String, e: &EntropyResults) {
    let _ = writeln!(out, "group         {}", e.group);
    let _ = writeln!(out, "endomorphism  {}", e.endomorphism);
    let _ = writeln!(out, "strategy      {}", e.strategy);
    let noun = if e.family_size == 1 { "subgroup" } else { "subgroups" };
    let _ = writeln!(out, "bases         {} ({} {noun})", e.bases, e.family_size);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:>4}  {:>8}  {:>8}  {:<18}  {:>10}  base", "#", "order", "beta", "status", "reached_at");
    for (i, row) in e.sup.rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:>8}  {:>8}  {:<18}  {:>10}  {}",
            i,
            row.order,
            row.estimate.beta,
            row.estimate.status.as_str(),
            row.estimate.reached_at,
            row.base
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "beta          {}", e.sup.beta);
    let _ = writeln!(out, "log beta      {:.6} (display only)", (e.sup.beta as f64).ln());
    let _ = writeln!(out, "status        {}", e.sup.status.as_str());
    let _ = writeln!(out, "attained at   base {}", e.sup.witness);
    let _ = writeln!(out, "note          maximum over the listed bases; a lower bound for the entropy");
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "unknown".to_string(), |x| x.to_string())
}

fn render_structure(out: &mut String, s: &StructureResults) {
    let c = &s.classification;
    let _ = writeln!(out, "group             {}", s.group);
    let _ = writeln!(out, "order             {}", if s.finite { opt(&c.order) } else { "infinite".into() });
    let _ = writeln!(out, "abelian           {}", c.abelian);
    let _ = writeln!(out, "hamiltonian       {}", opt(&c.hamiltonian));
    let _ = writeln!(out, "quasihamiltonian  {} ({})", c.quasihamiltonian.value, c.quasihamiltonian.mode);
    if let Some((x, y)) = &c.quasihamiltonian.witness {
        let _ = writeln!(out, "  <x><y> != <y><x> for x = {x}, y = {y}");
    }
    let _ = writeln!(out, "fc                {}", opt(&c.fc));
    if let Some(d) = s.derived_order {
        let _ = writeln!(out, "derived order     {d}");
    }
    if let Some((x, y)) = &c.noncommuting {
        let _ = writeln!(out, "noncommuting      {x}, {y}");
    }
    if let Some(h) = &c.non_normal_subgroup {
        let _ = writeln!(out, "non-normal        <{}>", h.join(", "));
    }
    if let Some(i) = &s.iwasawa {
        let p = i.params;
        let _ = writeln!(out, "iwasawa           p={} n={} m={} s={}", p.p, p.n, p.m, p.s);
        let _ = writeln!(out, "fc by commutator  {}", i.fc_by_commutator);
    }
}

fn render_decompose(out: &mut String, d: &DecomposeResults) {
    let _ = writeln!(out, "group  {}", d.group);
    if let Some(r) = &d.dedekind_baer {
        let v = serde_json::to_value(&r.decomposition).expect("reports serialize");
        let _ = writeln!(out, "dedekind-baer  {}", v["verdict"].as_str().unwrap_or("?"));
        if let Some(obj) = v.as_object() {
            for (k, x) in obj.iter().filter(|(k, _)| k.as_str() != "verdict") {
                let _ = writeln!(out, "  {k}: {x}");
            }
        }
        let _ = writeln!(out, "exhaustive all-subgroups-normal  {}", opt(&r.exhaustive_hamiltonian));
        let _ = writeln!(out, "agrees  {}", opt(&r.agrees));
    }
    if let Some(p) = &d.primary {
        let _ = writeln!(out, "element {} of order {}", p.element, p.order);
        for part in &p.parts {
            let _ = writeln!(
                out,
                "  p={} r={} part={} (order {}, coefficient {})",
                part.prime, part.exponent, part.part, part.part_order, part.coefficient
            );
        }
    }
}

fn render_verify(out: &mut String, v: &VerifyResults) {
    let h = &v.harness;
    let _ = writeln!(out, "bundle      {} (version {})", v.bundle, h.bundle_version);
    for law in &h.laws {
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<20} {}", law.law, law.verdict.as_str());
        let _ = writeln!(out, "  {}", law.description);
        for f in &law.fixtures {
            let mark = if f.verdict == Verdict::Violation { "!!" } else { "  " };
            let _ = writeln!(out, "{mark}  {:<34} {}", f.fixture, f.verdict.as_str());
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "scope       sup comparisons are over the matched base family");
    let _ = writeln!(out, "violations  {}", h.violations);
}
