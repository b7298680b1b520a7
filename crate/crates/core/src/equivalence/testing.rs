//! Semi-decision of diamond (may) and box (fair) testing equivalence.
//!
//! Equivalence is only ever claimed from a bisimulation; refutation searches
//! contexts `restrict{L}(- | O)` and compares the characteristics of both
//! compositions under the external-action predicate.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::strong::strong_bisim;
use super::weak::{greedy_weak_certificate, weak_bisim_verify};
use crate::characteristics::{chi_fair, chi_may, Predicate};
use crate::distribution::{Dist, Partition};
use crate::error::{Error, Result};
use crate::plts::ExploreConfig;
use crate::rational::{ratio, serde_fraction, Rational};
use crate::syntax::{parse, Action, Channel, Mode, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Compared by the may characteristic.
    Diamond,
    /// Compared by the fair characteristic.
    Box,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextClass {
    /// Observers without probabilistic choice.
    Classical,
    Probabilistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Justification {
    StrongBisim,
    WeakBisimCertificate,
    UserSupplied,
}

/// A context `restrict{restricted}(- | observer)`; no observer means the
/// empty context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContextWitness {
    pub restricted: Vec<String>,
    pub observer: Option<String>,
    /// Where the observer came from: `empty`, `corpus:<name>` or `generated`.
    pub origin: String,
}

impl ContextWitness {
    fn empty() -> ContextWitness {
        ContextWitness {
            restricted: Vec::new(),
            observer: None,
            origin: "empty".into(),
        }
    }

    /// The composition of `p` with this context.
    pub fn apply(&self, p: &Term) -> Result<Term> {
        let Some(observer) = &self.observer else {
            return Ok(p.clone());
        };
        let observer = parse(observer, Mode::Process)?;
        let channels = self
            .restricted
            .iter()
            .map(|c| Channel::new(c))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Term::restrict(channels, Term::par(p.clone(), observer)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum TestingVerdict {
    Equivalent {
        reason: Justification,
    },
    Distinguished {
        context: ContextWitness,
        #[serde(with = "serde_fraction")]
        left: Rational,
        #[serde(with = "serde_fraction")]
        right: Rational,
    },
    Unknown {
        budget: usize,
        tried: usize,
        skipped: usize,
    },
}

impl TestingVerdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, TestingVerdict::Distinguished { .. })
    }

    pub fn is_equivalent(&self) -> bool {
        matches!(self, TestingVerdict::Equivalent { .. })
    }
}

#[derive(Clone, Debug)]
pub struct TestingOptions {
    /// Maximal prefix nesting of generated observers.
    pub budget: usize,
    /// Maximal number of generated observers.
    pub max_observers: usize,
    /// A partition to try as a weak bisimulation before searching.
    pub partition: Option<Partition>,
    /// Block merges tried by the greedy certificate search; 0 disables it.
    pub weak_search_attempts: usize,
    pub explore: ExploreConfig,
}

impl Default for TestingOptions {
    fn default() -> Self {
        TestingOptions {
            budget: 4,
            max_observers: 2000,
            partition: None,
            weak_search_attempts: 64,
            explore: ExploreConfig {
                max_states: 2000,
                ..ExploreConfig::default()
            },
        }
    }
}

/// Outcome of the refutation search alone.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub distinguishing: Option<(ContextWitness, Rational, Rational)>,
    pub tried: usize,
    /// Compositions skipped because exploration failed or hit a cap.
    pub skipped: usize,
}

/// Characteristic of `p` inside `context`.
pub fn context_value(p: &Term, context: &ContextWitness, kind: Kind, cfg: &ExploreConfig) -> Result<Rational> {
    let composed = Dist::dirac(context.apply(p)?)?;
    let result = match kind {
        Kind::Diamond => chi_may(&composed, &Predicate::External, cfg)?,
        Kind::Box => chi_fair(&composed, &Predicate::External, cfg)?,
    };
    Ok(result.value)
}

/// Re-runs a stored context on both sides.
pub fn replay(p: &Term, q: &Term, context: &ContextWitness, kind: Kind, cfg: &ExploreConfig) -> Result<(Rational, Rational)> {
    Ok((context_value(p, context, kind, cfg)?, context_value(q, context, kind, cfg)?))
}

/// The first `count` channel names not in `taken`, trying `d`, `e`, ... first.
pub fn fresh_channels(taken: &BTreeSet<Channel>, count: usize) -> Vec<Channel> {
    let names = ["d", "e", "f", "g", "h"]
        .into_iter()
        .map(String::from)
        .chain((0..).map(|i| format!("fresh{i}")));
    names
        .filter_map(|n| Channel::new(&n).ok())
        .filter(|c| !taken.contains(c))
        .take(count)
        .collect()
}

fn both_polarities(channels: &BTreeSet<Channel>) -> Vec<Action> {
    channels
        .iter()
        .flat_map(|c| [Action::Input(c.clone()), Action::Output(c.clone())])
        .collect()
}

fn signal(fresh: &Channel) -> Term {
    Term::prefix(Action::Input(fresh.clone()), Term::nil())
}

/// Hand-picked observers: the absorber, the sequencing partner and the
/// branching-after-commit family.
fn corpus_observers(channels: &BTreeSet<Channel>, fresh: &Channel, class: ContextClass) -> Vec<(String, Term)> {
    let mut out = Vec::new();
    let acts = both_polarities(channels);
    if acts.is_empty() {
        return out;
    }
    let done = signal(fresh);
    let absorber = Term::sum(acts.iter().map(|a| (a.clone(), done.clone())).collect()).expect("nonempty");
    out.push(("absorber".to_string(), absorber));
    let mut partner: Vec<(Action, Term)> = acts.iter().map(|a| (a.clone(), Term::nil())).collect();
    partner.push((Action::Input(fresh.clone()), Term::nil()));
    out.push(("sequencing-partner".to_string(), Term::sum(partner).expect("nonempty")));
    for x in &acts {
        for (i, y) in acts.iter().enumerate() {
            for z in &acts[i + 1..] {
                let left = Term::prefix(y.clone(), done.clone());
                let right = Term::prefix(z.clone(), done.clone());
                let branch = match class {
                    ContextClass::Probabilistic => {
                        Term::psum(vec![(ratio(1, 2), left), (ratio(1, 2), right)]).expect("weights sum to one")
                    }
                    ContextClass::Classical => Term::sum(vec![(Action::Tau, left), (Action::Tau, right)]).expect("nonempty"),
                };
                out.push(("commit-then-branch".to_string(), Term::prefix(x.clone(), branch)));
            }
        }
    }
    out
}

#[derive(Clone)]
struct Candidate {
    term: Term,
    depth: usize,
}

/// Observers by increasing size: `0`, prefixes, binary sums of prefixes and
/// (when allowed) binary probabilistic choices, with prefix nesting at most
/// `max_depth`. Duplicates are removed structurally.
pub fn generate_observers(actions: &[Action], class: ContextClass, max_depth: usize, cap: usize) -> Vec<Term> {
    let weights = [ratio(1, 2), ratio(1, 3), ratio(2, 3)];
    // by_size[s] holds all terms of size s; prefixes[s] the prefix-headed ones
    let mut by_size: Vec<Vec<Candidate>> = vec![Vec::new()];
    let mut prefixes: Vec<Vec<(Action, Candidate)>> = vec![Vec::new()];
    let mut seen: HashSet<Term> = HashSet::new();
    let mut out = Vec::new();
    let mut size = 0;
    while out.len() < cap {
        size += 1;
        let mut level: Vec<Candidate> = Vec::new();
        let mut level_prefixes = Vec::new();
        if size == 1 {
            level.push(Candidate { term: Term::nil(), depth: 0 });
        }
        for inner in &by_size[size - 1] {
            if inner.depth >= max_depth {
                continue;
            }
            for a in actions {
                let t = Candidate {
                    term: Term::prefix(a.clone(), inner.term.clone()),
                    depth: inner.depth + 1,
                };
                level_prefixes.push((a.clone(), t.clone()));
                level.push(t);
            }
        }
        for i in 2..size {
            let j = size - i;
            if j < i {
                break;
            }
            for (x, left) in prefixes[i].iter().enumerate() {
                let start = if i == j { x + 1 } else { 0 };
                for right in &prefixes[j][start.min(prefixes[j].len())..] {
                    let summands = vec![
                        (left.0.clone(), cont(&left.1.term)),
                        (right.0.clone(), cont(&right.1.term)),
                    ];
                    level.push(Candidate {
                        term: Term::sum(summands).expect("two summands"),
                        depth: left.1.depth.max(right.1.depth),
                    });
                }
            }
        }
        if class == ContextClass::Probabilistic && size >= 3 {
            for i in 1..size - 1 {
                let j = size - 1 - i;
                if j < i {
                    break;
                }
                for (x, left) in by_size[i].iter().enumerate() {
                    let start = if i == j { x + 1 } else { 0 };
                    for right in &by_size[j][start.min(by_size[j].len())..] {
                        for w in &weights {
                            let branches = vec![(w.clone(), left.term.clone()), (crate::rational::one() - w, right.term.clone())];
                            if let Ok(term) = Term::psum(branches) {
                                level.push(Candidate {
                                    term,
                                    depth: left.depth.max(right.depth),
                                });
                            }
                        }
                    }
                }
            }
        }
        if level.is_empty() {
            break;
        }
        for t in &level {
            if seen.insert(t.term.clone()) {
                out.push(t.term.clone());
                if out.len() >= cap {
                    break;
                }
            }
        }
        by_size.push(level);
        prefixes.push(level_prefixes);
    }
    out
}

fn cont(prefix: &Term) -> Term {
    match prefix.kind() {
        crate::syntax::TermKind::Sum(items) if items.len() == 1 => items[0].1.clone(),
        _ => unreachable!("prefix-headed term"),
    }
}

/// All contexts tried for `p` and `q`, in search order.
pub fn enumerate_contexts(p: &Term, q: &Term, class: ContextClass, budget: usize, max_observers: usize) -> Vec<ContextWitness> {
    let channels: BTreeSet<Channel> = p.channels().union(&q.channels()).cloned().collect();
    let fresh = fresh_channels(&channels, 2);
    let restricted: Vec<String> = channels.iter().map(|c| c.to_string()).collect();
    let make = |origin: String, o: &Term| ContextWitness {
        restricted: restricted.clone(),
        observer: Some(o.to_string()),
        origin,
    };
    let mut out = vec![ContextWitness::empty()];
    let mut seen: HashSet<Term> = HashSet::new();
    for (name, o) in corpus_observers(&channels, &fresh[0], class) {
        if seen.insert(o.clone()) {
            out.push(make(format!("corpus:{name}"), &o));
        }
    }
    let mut actions: Vec<Action> = fresh.iter().map(|c| Action::Input(c.clone())).collect();
    actions.push(Action::Tau);
    actions.extend(both_polarities(&channels));
    for o in generate_observers(&actions, class, budget, max_observers) {
        if seen.insert(o.clone()) {
            out.push(make("generated".into(), &o));
        }
    }
    out
}

/// Refutation only: the first context, in enumeration order, on which the
/// characteristics of `p` and `q` differ.
pub fn search_contexts(p: &Term, q: &Term, kind: Kind, class: ContextClass, opts: &TestingOptions) -> Result<SearchReport> {
    if class == ContextClass::Classical && (p.contains_psum() || q.contains_psum()) {
        return Err(Error::NotClassical(if p.contains_psum() { p } else { q }.to_string()));
    }
    let contexts = enumerate_contexts(p, q, class, opts.budget, opts.max_observers);
    let mut tried = 0;
    let mut skipped = 0;
    for chunk in contexts.chunks(128) {
        let results: Vec<Result<(Rational, Rational)>> =
            chunk.par_iter().map(|c| replay(p, q, c, kind, &opts.explore)).collect();
        for (context, result) in chunk.iter().zip(results) {
            tried += 1;
            match result {
                Ok((left, right)) if left != right => {
                    return Ok(SearchReport {
                        distinguishing: Some((context.clone(), left, right)),
                        tried,
                        skipped,
                    });
                }
                Ok(_) => {}
                Err(_) => skipped += 1,
            }
        }
    }
    Ok(SearchReport {
        distinguishing: None,
        tried,
        skipped,
    })
}

/// Three stages: bisimulation certificates, context search, then `Unknown`.
pub fn testing_equiv(p: &Term, q: &Term, kind: Kind, class: ContextClass, opts: &TestingOptions) -> Result<TestingVerdict> {
    p.ensure_process()?;
    q.ensure_process()?;
    if let Ok(strong) = strong_bisim(p, q, &opts.explore) {
        if strong.related {
            return Ok(TestingVerdict::Equivalent {
                reason: Justification::StrongBisim,
            });
        }
    }
    if let Some(partition) = &opts.partition {
        if let Ok(cert) = weak_bisim_verify(partition, &opts.explore) {
            if cert.valid && cert.relates(p, q) {
                return Ok(TestingVerdict::Equivalent {
                    reason: Justification::UserSupplied,
                });
            }
        }
    }
    if opts.weak_search_attempts > 0 {
        if let Ok(Some(cert)) = greedy_weak_certificate(p, q, opts.weak_search_attempts, &opts.explore) {
            if cert.valid {
                return Ok(TestingVerdict::Equivalent {
                    reason: Justification::WeakBisimCertificate,
                });
            }
        }
    }
    let report = search_contexts(p, q, kind, class, opts)?;
    Ok(match report.distinguishing {
        Some((context, left, right)) => TestingVerdict::Distinguished { context, left, right },
        None => TestingVerdict::Unknown {
            budget: opts.budget,
            tried: report.tried,
            skipped: report.skipped,
        },
    })
}
