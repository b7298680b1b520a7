//! The bundled example suite: cases are data in `data/examples.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rccs_core::characteristics::{
    chi_fair, chi_may, classical_observable, classical_strongly_observable, classical_test, mass, outcome_bounds,
    seq_transform, ClassicalMode, Predicate,
};
use rccs_core::distribution::{Dist, Partition};
use rccs_core::equivalence::{
    context_value, strong_bisim, testing_equiv, weak_bisim_verify, weak_combined_feasible, ContextClass,
    ContextWitness, Kind, TestingOptions, TestingVerdict,
};
use rccs_core::plts::{explore, run_witness, step, ExploreConfig, Witness, WitnessStep};
use rccs_core::rational::parse_rational;
use rccs_core::syntax::{channel_set, parse, Action, Channel, Mode, Term};
use rccs_core::{Error as CoreError, Rational};

use crate::commands::sandwich;
use crate::error::exit;
use crate::output::{fraction, Report};
use crate::OracleMode;

const MANIFEST: &str = include_str!("../data/examples.json");

#[derive(Debug, Deserialize)]
struct Manifest {
    cases: Vec<ExampleCase>,
}

#[derive(Debug, Deserialize)]
pub struct ExampleCase {
    pub id: String,
    #[serde(flatten)]
    op: CaseOp,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CharMode {
    May,
    Fair,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TestKind {
    Diamond,
    Box,
}

impl From<TestKind> for Kind {
    fn from(k: TestKind) -> Kind {
        match k {
            TestKind::Diamond => Kind::Diamond,
            TestKind::Box => Kind::Box,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Refutation {
    Distinguished,
    NotDistinguished,
}

type Weighted = Vec<(String, String)>;

#[derive(Debug, Deserialize)]
struct StepSpec {
    action: String,
    target: Weighted,
}

#[derive(Debug, Deserialize)]
struct ActivationSpec {
    process: String,
    action: String,
    activation: String,
    /// Which of the process's steps with this action; in derivation order.
    #[serde(default)]
    index: usize,
}

#[derive(Debug, Deserialize)]
struct ClassicalVerdicts {
    may: bool,
    must: bool,
    fair: bool,
}

#[derive(Debug, Deserialize)]
struct FailingCheck {
    state: String,
    matcher: String,
    action: String,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
enum CaseOp {
    /// All single steps of a process.
    Steps { term: String, expected: Vec<StepSpec> },
    /// Number of reachable states.
    Explore { term: String, states: usize },
    /// A sequence of activations from a distribution, in observer syntax.
    Run {
        dist: Weighted,
        activations: Vec<ActivationSpec>,
        expected: Weighted,
        #[serde(default)]
        expected_mass: Option<(String, String)>,
    },
    Mass { term: String, predicate: String, expected: String },
    Chi {
        term: String,
        predicate: String,
        mode: CharMode,
        expected: String,
    },
    Bounds { term: String, predicate: String, expected: (String, String) },
    /// The characteristic after composing with the sequencing partner over `channels` and `fresh`.
    Transformed {
        term: String,
        channels: Vec<String>,
        fresh: String,
        predicate: String,
        mode: CharMode,
        expected: String,
    },
    Observability { term: String, may: bool, strong: bool },
    Classical { term: String, observer: String, expected: ClassicalVerdicts },
    Oracle {
        term: String,
        predicate: String,
        depth: usize,
        rows: Vec<String>,
        bellman: String,
    },
    Strong { left: String, right: String, related: bool },
    WeakPartition {
        blocks: Vec<Vec<String>>,
        valid: bool,
        #[serde(default)]
        failing: Option<FailingCheck>,
    },
    /// Weak combined transition to class masses named by a block representative.
    WeakTransition {
        source: String,
        action: String,
        blocks: Vec<Vec<String>>,
        target: Weighted,
        feasible: bool,
    },
    ContextValues {
        left: String,
        right: String,
        restricted: Vec<String>,
        observer: String,
        kind: TestKind,
        expected: (String, String),
    },
    Testing {
        left: String,
        right: String,
        kind: TestKind,
        context: String,
        budget: usize,
        expected: Refutation,
        #[serde(default)]
        values: Option<(String, String)>,
        #[serde(default)]
        empty_context: bool,
    },
}

impl CaseOp {
    fn name(&self) -> &'static str {
        match self {
            CaseOp::Steps { .. } => "steps",
            CaseOp::Explore { .. } => "explore",
            CaseOp::Run { .. } => "run",
            CaseOp::Mass { .. } => "mass",
            CaseOp::Chi { .. } => "chi",
            CaseOp::Bounds { .. } => "bounds",
            CaseOp::Transformed { .. } => "transformed",
            CaseOp::Observability { .. } => "observability",
            CaseOp::Classical { .. } => "classical",
            CaseOp::Oracle { .. } => "oracle",
            CaseOp::Strong { .. } => "strong",
            CaseOp::WeakPartition { .. } => "weak-partition",
            CaseOp::WeakTransition { .. } => "weak-transition",
            CaseOp::ContextValues { .. } => "context-values",
            CaseOp::Testing { .. } => "testing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A resource cap was hit before the case could be decided.
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub id: String,
    pub op: &'static str,
    pub status: Status,
    pub expected: Value,
    pub computed: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Expected and computed values as JSON.
struct Checked {
    expected: Value,
    computed: Value,
}

impl Checked {
    fn new(expected: Value, computed: Value) -> Checked {
        Checked { expected, computed }
    }

    fn passes(&self) -> bool {
        self.expected == self.computed
    }
}

fn rational(text: &str) -> Result<Rational, CoreError> {
    parse_rational(text)
}

/// Re-encodes a manifest rational as `num/den` for comparison.
fn normalized(text: &str) -> Result<String, CoreError> {
    Ok(fraction(&rational(text)?))
}

fn process(text: &str) -> Result<Term, CoreError> {
    parse(text, Mode::Process)
}

fn dirac(text: &str) -> Result<Dist, CoreError> {
    Dist::dirac(process(text)?)
}

fn weighted(pairs: &Weighted) -> Result<Dist, CoreError> {
    let parsed = pairs
        .iter()
        .map(|(t, p)| Ok((parse(t, Mode::Observer)?, rational(p)?)))
        .collect::<Result<Vec<_>, CoreError>>()?;
    Dist::from_pairs(parsed)
}

fn dist_value(mu: &Dist) -> Value {
    serde_json::to_value(mu.to_json()).expect("distribution serializes")
}

fn partition(blocks: &[Vec<String>]) -> Result<Partition, CoreError> {
    let parsed = blocks
        .iter()
        .map(|b| b.iter().map(|t| process(t)).collect::<Result<Vec<_>, CoreError>>())
        .collect::<Result<Vec<_>, CoreError>>()?;
    Partition::new(parsed)
}

fn characteristic(mu: &Dist, phi: &Predicate, mode: CharMode, cfg: &ExploreConfig) -> Result<Rational, CoreError> {
    Ok(match mode {
        CharMode::May => chi_may(mu, phi, cfg)?.value,
        CharMode::Fair => chi_fair(mu, phi, cfg)?.value,
    })
}

fn evaluate(op: &CaseOp, cfg: &ExploreConfig) -> Result<Checked, CoreError> {
    match op {
        CaseOp::Steps { term, expected } => {
            let canonical = |pairs: Vec<(String, Value)>| -> Value {
                let set: BTreeSet<String> = pairs.into_iter().map(|(a, d)| format!("{a} {d}")).collect();
                set.into_iter().collect::<Vec<_>>().into()
            };
            let mut want = Vec::new();
            for s in expected {
                want.push((Action::parse(&s.action)?.to_string(), dist_value(&weighted(&s.target)?)));
            }
            let got = step(&process(term)?, cfg)?
                .into_iter()
                .map(|s| (s.action.to_string(), dist_value(&s.target)))
                .collect();
            Ok(Checked::new(canonical(want), canonical(got)))
        }
        CaseOp::Explore { term, states } => {
            let g = explore(&process(term)?, cfg)?;
            g.ensure_complete()?;
            Ok(Checked::new(json!(states), json!(g.len())))
        }
        CaseOp::Run { dist, activations, expected, expected_mass } => {
            let mu = weighted(dist)?;
            let mut steps = Vec::new();
            for a in activations {
                let p = parse(&a.process, Mode::Observer)?;
                let action = Action::parse(&a.action)?;
                let chosen = step(&p, cfg)?
                    .into_iter()
                    .filter(|s| s.action == action)
                    .nth(a.index)
                    .ok_or_else(|| CoreError::InvalidActivation(format!("`{p}` has no {action} step {}", a.index)))?;
                steps.push(WitnessStep::new(&chosen, rational(&a.activation)?));
            }
            let nu = run_witness(&mu, &Witness { steps }, cfg)?;
            let mut want = json!({"dist": dist_value(&weighted(expected)?)});
            let mut got = json!({"dist": dist_value(&nu)});
            if let Some((predicate, value)) = expected_mass {
                want["mass"] = normalized(value)?.into();
                got["mass"] = fraction(&mass(&nu, &Predicate::parse(predicate)?, cfg)?).into();
            }
            Ok(Checked::new(want, got))
        }
        CaseOp::Mass { term, predicate, expected } => {
            let got = mass(&dirac(term)?, &Predicate::parse(predicate)?, cfg)?;
            Ok(Checked::new(normalized(expected)?.into(), fraction(&got).into()))
        }
        CaseOp::Chi { term, predicate, mode, expected } => {
            let got = characteristic(&dirac(term)?, &Predicate::parse(predicate)?, *mode, cfg)?;
            Ok(Checked::new(normalized(expected)?.into(), fraction(&got).into()))
        }
        CaseOp::Bounds { term, predicate, expected } => {
            let b = outcome_bounds(&dirac(term)?, &Predicate::parse(predicate)?, cfg)?;
            Ok(Checked::new(
                json!([normalized(&expected.0)?, normalized(&expected.1)?]),
                json!([fraction(&b.inf), fraction(&b.sup)]),
            ))
        }
        CaseOp::Transformed { term, channels, fresh, predicate, mode, expected } => {
            let names = channel_set(channels.iter().map(String::as_str))?;
            let transformed = seq_transform(&dirac(term)?, &names, &Channel::new(fresh)?)?;
            let got = characteristic(&transformed, &Predicate::parse(predicate)?, *mode, cfg)?;
            Ok(Checked::new(normalized(expected)?.into(), fraction(&got).into()))
        }
        CaseOp::Observability { term, may, strong } => {
            let p = process(term)?;
            let got = json!({
                "may": classical_observable(&p, cfg)?,
                "strong": classical_strongly_observable(&p, cfg)?,
            });
            Ok(Checked::new(json!({"may": may, "strong": strong}), got))
        }
        CaseOp::Classical { term, observer, expected } => {
            let (p, o) = (process(term)?, parse(observer, Mode::Observer)?);
            let got = json!({
                "may": classical_test(&p, &o, ClassicalMode::May, cfg)?,
                "must": classical_test(&p, &o, ClassicalMode::Must, cfg)?,
                "fair": classical_test(&p, &o, ClassicalMode::Fair, cfg)?,
            });
            let want = json!({"may": expected.may, "must": expected.must, "fair": expected.fair});
            Ok(Checked::new(want, got))
        }
        CaseOp::Oracle { term, predicate, depth, rows, bellman } => {
            let s = sandwich(&dirac(term)?, &Predicate::parse(predicate)?, OracleMode::May, *depth, cfg)
                .map_err(|e| CoreError::Format(e.to_string()))?;
            let want_rows = rows.iter().map(|r| normalized(r)).collect::<Result<Vec<_>, _>>()?;
            Ok(Checked::new(
                json!({"rows": want_rows, "bellman": normalized(bellman)?, "holds": true}),
                json!({"rows": s.rows, "bellman": s.bellman, "holds": s.holds}),
            ))
        }
        CaseOp::Strong { left, right, related } => {
            let r = strong_bisim(&process(left)?, &process(right)?, cfg)?;
            Ok(Checked::new(json!(related), json!(r.related)))
        }
        CaseOp::WeakPartition { blocks, valid, failing } => {
            let cert = weak_bisim_verify(&partition(blocks)?, cfg)?;
            let mut want = json!({"valid": valid});
            let mut got = json!({"valid": cert.valid});
            if let Some(f) = failing {
                want["failing"] = json!({
                    "state": process(&f.state)?.to_string(),
                    "matcher": process(&f.matcher)?.to_string(),
                    "action": Action::parse(&f.action)?.to_string(),
                });
                got["failing"] = match cert.failures().next() {
                    Some(c) => json!({"state": c.state, "matcher": c.matcher, "action": c.action}),
                    None => Value::Null,
                };
            }
            Ok(Checked::new(want, got))
        }
        CaseOp::WeakTransition { source, action, blocks, target, feasible } => {
            let part = partition(blocks)?;
            let mut by_class: BTreeMap<usize, Rational> = BTreeMap::new();
            for (rep, p) in target {
                let t = process(rep)?;
                let block = part.block_of(&t).ok_or_else(|| CoreError::UnknownState(t.to_string()))?;
                *by_class.entry(block).or_insert_with(|| rational("0").expect("zero")) += rational(p)?;
            }
            let got = weak_combined_feasible(&process(source)?, &Action::parse(action)?, &by_class, &part, cfg)?;
            Ok(Checked::new(json!(feasible), json!(got)))
        }
        CaseOp::ContextValues { left, right, restricted, observer, kind, expected } => {
            let context = ContextWitness {
                restricted: restricted.clone(),
                observer: Some(observer.clone()),
                origin: "manifest".into(),
            };
            let l = context_value(&process(left)?, &context, (*kind).into(), cfg)?;
            let r = context_value(&process(right)?, &context, (*kind).into(), cfg)?;
            Ok(Checked::new(
                json!([normalized(&expected.0)?, normalized(&expected.1)?]),
                json!([fraction(&l), fraction(&r)]),
            ))
        }
        CaseOp::Testing { left, right, kind, context, budget, expected, values, empty_context } => {
            let class = match context.as_str() {
                "classical" => ContextClass::Classical,
                "probabilistic" => ContextClass::Probabilistic,
                other => return Err(CoreError::Format(format!("unknown context class `{other}`"))),
            };
            let opts = TestingOptions {
                budget: *budget,
                explore: ExploreConfig {
                    max_states: cfg.max_states.min(TestingOptions::default().explore.max_states),
                    ..cfg.clone()
                },
                ..TestingOptions::default()
            };
            let verdict = testing_equiv(&process(left)?, &process(right)?, (*kind).into(), class, &opts)?;
            let refutation = if verdict.is_distinguished() {
                Refutation::Distinguished
            } else {
                Refutation::NotDistinguished
            };
            let mut want = json!({"refutation": expected});
            let mut got = json!({"refutation": refutation});
            if let TestingVerdict::Distinguished { context, left, right } = &verdict {
                if let Some((l, r)) = values {
                    want["values"] = json!([normalized(l)?, normalized(r)?]);
                    got["values"] = json!([fraction(left), fraction(right)]);
                }
                if *empty_context {
                    want["empty_context"] = json!(true);
                    got["empty_context"] = json!(context.observer.is_none());
                }
            }
            got["verdict"] = serde_json::to_value(&verdict).expect("verdict serializes");
            want["verdict"] = got["verdict"].clone();
            Ok(Checked::new(want, got))
        }
    }
}

fn run_case(case: &ExampleCase, cfg: &ExploreConfig) -> CaseResult {
    let base = |status, expected, computed, error| CaseResult {
        id: case.id.clone(),
        op: case.op.name(),
        status,
        expected,
        computed,
        error,
    };
    match evaluate(&case.op, cfg) {
        Ok(checked) => {
            let status = if checked.passes() { Status::Pass } else { Status::Fail };
            base(status, checked.expected, checked.computed, None)
        }
        Err(e @ (CoreError::Explosion(_) | CoreError::UnguardedRecursion(_))) => {
            base(Status::Skipped, Value::Null, Value::Null, Some(e.to_string()))
        }
        Err(e) => base(Status::Fail, Value::Null, Value::Null, Some(e.to_string())),
    }
}

/// Every case of the bundled manifest.
pub fn cases() -> Vec<ExampleCase> {
    let manifest: Manifest = serde_json::from_str(MANIFEST).expect("bundled manifest is valid");
    manifest.cases
}

fn selected(id: &str, filter: Option<&str>) -> bool {
    match filter {
        None => true,
        Some(f) => f.split(',').map(str::trim).filter(|s| !s.is_empty()).any(|s| id.contains(s)),
    }
}

/// Runs the selected cases in parallel; results keep manifest order.
pub fn run_example_suite(filter: Option<&str>, cfg: &ExploreConfig) -> Report {
    let cases: Vec<ExampleCase> = cases().into_iter().filter(|c| selected(&c.id, filter)).collect();
    let results: Vec<CaseResult> = cases.par_iter().map(|c| run_case(c, cfg)).collect();
    let count = |s: Status| results.iter().filter(|r| r.status == s).count();
    let (passed, failed, skipped) = (count(Status::Pass), count(Status::Fail), count(Status::Skipped));
    let mut text = String::new();
    for r in &results {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let _ = writeln!(text, "{status} {}", r.id);
        if r.status != Status::Pass {
            if let Some(e) = &r.error {
                let _ = writeln!(text, "  error: {e}");
            } else {
                let _ = writeln!(text, "  expected: {}\n  computed: {}", r.expected, r.computed);
            }
        }
    }
    let _ = writeln!(text, "{passed} passed, {failed} failed, {skipped} skipped");
    let json = json!({
        "cases": results,
        "total": results.len(),
        "passed": passed,
        "failed": failed,
        "skipped": skipped,
    });
    let status = if passed == results.len() { exit::SUCCESS } else { exit::VERDICT };
    Report::new(json, text).with_status(status)
}
