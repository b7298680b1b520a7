//! Weak combined transitions as exact flow feasibility, and verification of
//! candidate probabilistic weak bisimulations.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use super::strong::{bisimulation_labels, labels_to_partition, partition_labels};
use crate::distribution::{Dist, Partition, SignedMeasure};
use crate::error::{Error, Result};
use crate::linalg::{feasible_point, Equation};
use crate::plts::{class_masses, enumerate_descendants, explore_all, ExploreConfig, ProcessGraph};
use crate::rational::{to_fraction_string, Rational};
use crate::syntax::{Action, Term};

/// States reachable from `from` by `tau`-steps.
fn tau_closure(g: &ProcessGraph, from: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in from {
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(i) = queue.pop_front() {
        for st in g.tau_steps(i) {
            for (j, _) in &st.target {
                if seen.insert(*j) {
                    queue.push_back(*j);
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// A feasible flow: the stopped mass per state and the expected number of
/// steps taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowWitness {
    pub stopped: Vec<(usize, Rational)>,
    pub expected_steps: Rational,
}

struct Vars {
    count: usize,
}

impl Vars {
    fn fresh(&mut self) -> usize {
        self.count += 1;
        self.count - 1
    }
}

/// Decides whether `src` has a weak combined `action`-transition whose
/// class masses under `labels` equal `target`.
///
/// Variables are expected step counts per (phase, state, step) and stopped
/// masses per state of the last phase; flow is conserved at every
/// (phase, state). For `tau` there is one phase and stopping at once is
/// allowed; otherwise the phases lie before and after the visible step.
pub fn weak_feasible_in(
    g: &ProcessGraph,
    labels: &[usize],
    src: usize,
    action: &Action,
    target: &BTreeMap<usize, Rational>,
) -> Result<Option<FlowWitness>> {
    let total: Rational = target.values().sum();
    if !total.is_one() {
        return Err(Error::Weight(format!("target masses sum to {total}")));
    }
    let known: BTreeSet<usize> = labels.iter().copied().collect();
    if let Some(c) = target.keys().find(|c| !known.contains(c)) {
        return Err(Error::InfeasibleStructure(format!("block {c}")));
    }
    let internal = *action == Action::Tau;
    let first = tau_closure(g, [src]);
    let last = if internal {
        first.clone()
    } else {
        let after: Vec<usize> = first
            .iter()
            .flat_map(|&s| g.steps(s).iter().filter(|st| st.action == *action))
            .flat_map(|st| st.target.iter().map(|(j, _)| *j))
            .collect();
        tau_closure(g, after)
    };
    let mut vars = Vars { count: 0 };
    // per phase: (state, step index in g.steps, var)
    let mut moves: Vec<Vec<(usize, usize, usize)>> = Vec::new();
    let phases: Vec<&[usize]> = if internal { vec![&first] } else { vec![&first, &last] };
    for (ph, states) in phases.iter().enumerate() {
        let mut list = Vec::new();
        for &s in states.iter() {
            for (k, st) in g.steps(s).iter().enumerate() {
                let visible_step = !internal && ph == 0 && st.action == *action;
                if st.action == Action::Tau || visible_step {
                    list.push((s, k, vars.fresh()));
                }
            }
        }
        moves.push(list);
    }
    let stops: Vec<(usize, usize)> = last.iter().map(|&s| (s, vars.fresh())).collect();

    // conservation: outflow - inflow = injected
    let last_phase = phases.len() - 1;
    let mut balance: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
    for (ph, list) in moves.iter().enumerate() {
        for &(s, k, v) in list {
            balance.entry((ph, s)).or_default().push((v, Rational::one()));
            let st = &g.steps(s)[k];
            let dest = if st.action == Action::Tau { ph } else { ph + 1 };
            for (j, w) in &st.target {
                balance.entry((dest, *j)).or_default().push((v, -w.clone()));
            }
        }
    }
    for &(s, v) in &stops {
        balance.entry((last_phase, s)).or_default().push((v, Rational::one()));
    }
    balance.entry((0, src)).or_default();
    let mut equations = Vec::new();
    for ((ph, s), terms) in balance {
        let rhs = if ph == 0 && s == src { Rational::one() } else { Rational::zero() };
        equations.push(Equation { terms, rhs });
    }
    let mut per_class: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for &(s, v) in &stops {
        per_class.entry(labels[s]).or_default().push((v, Rational::one()));
    }
    for c in target.keys() {
        per_class.entry(*c).or_default();
    }
    for (c, terms) in per_class {
        let rhs = target.get(&c).cloned().unwrap_or_else(Rational::zero);
        equations.push(Equation { terms, rhs });
    }
    let Some(x) = feasible_point(vars.count, &equations) else {
        return Ok(None);
    };
    let stopped = stops
        .iter()
        .filter(|(_, v)| !x[*v].is_zero())
        .map(|(s, v)| (*s, x[*v].clone()))
        .collect();
    let expected_steps = moves.iter().flatten().map(|(_, _, v)| x[*v].clone()).sum();
    Ok(Some(FlowWitness { stopped, expected_steps }))
}

/// Graph over the partition's universe and `extra`, with its state labelling.
fn universe_graph(partition: &Partition, extra: &[Term], cfg: &ExploreConfig) -> Result<(ProcessGraph, Vec<usize>)> {
    let mut roots: Vec<Term> = partition.blocks().iter().flatten().cloned().collect();
    roots.extend(extra.iter().cloned());
    let g = explore_all(&roots, cfg)?;
    g.ensure_complete()?;
    let labels = partition_labels(&g, partition);
    Ok((g, labels))
}

/// Term-level entry point; classes are the partition's block indices.
pub fn weak_combined_feasible(
    src: &Term,
    action: &Action,
    target_by_class: &BTreeMap<usize, Rational>,
    partition: &Partition,
    cfg: &ExploreConfig,
) -> Result<bool> {
    if let Some(c) = target_by_class.keys().find(|c| **c >= partition.blocks().len()) {
        return Err(Error::InfeasibleStructure(format!("block {c}")));
    }
    let (g, labels) = universe_graph(partition, std::slice::from_ref(src), cfg)?;
    let s = g.require(src)?;
    Ok(weak_feasible_in(&g, &labels, s, action, target_by_class)?.is_some())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeakCheck {
    /// The state whose step must be matched.
    pub state: String,
    pub action: String,
    pub target: String,
    /// The state that has to match it.
    pub matcher: String,
    pub matched: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct WeakBisimCertificate {
    pub partition: Partition,
    pub checks: Vec<WeakCheck>,
    pub valid: bool,
}

impl WeakBisimCertificate {
    pub fn failures(&self) -> impl Iterator<Item = &WeakCheck> {
        self.checks.iter().filter(|c| !c.matched)
    }

    pub fn relates(&self, p: &Term, q: &Term) -> bool {
        matches!((self.partition.block_of(p), self.partition.block_of(q)), (Some(a), Some(b)) if a == b)
    }
}

fn describe_witness(g: &ProcessGraph, w: &FlowWitness) -> String {
    let parts: Vec<String> = w
        .stopped
        .iter()
        .map(|(s, m)| format!("{} : {}", g.state(*s), to_fraction_string(m)))
        .collect();
    format!(
        "stops {{{}}} after {} expected steps",
        parts.join(", "),
        to_fraction_string(&w.expected_steps)
    )
}

/// A matcher state, the action and the class masses it must reach.
type MatchKey = (usize, Action, Vec<(usize, Rational)>);

fn verify_labels(g: &ProcessGraph, labels: &[usize], stop_at_first_failure: bool) -> Result<(Vec<WeakCheck>, bool)> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let mut memo: HashMap<MatchKey, Option<String>> = HashMap::new();
    let mut checks = Vec::new();
    let mut valid = true;
    for block in members.values().filter(|b| b.len() > 1) {
        for &a in block {
            for st in g.steps(a) {
                let target = class_masses(&st.target, labels);
                let key_target: Vec<(usize, Rational)> = target.clone().into_iter().collect();
                for &b in block {
                    if b == a {
                        continue;
                    }
                    let key = (b, st.action.clone(), key_target.clone());
                    let witness = match memo.get(&key) {
                        Some(w) => w.clone(),
                        None => {
                            let w = weak_feasible_in(g, labels, b, &st.action, &target)?
                                .map(|w| describe_witness(g, &w));
                            memo.insert(key, w.clone());
                            w
                        }
                    };
                    let matched = witness.is_some();
                    valid &= matched;
                    checks.push(WeakCheck {
                        state: g.state(a).to_string(),
                        action: st.action.to_string(),
                        target: g.target_dist(st).to_string(),
                        matcher: g.state(b).to_string(),
                        matched,
                        witness,
                    });
                    if !matched && stop_at_first_failure {
                        return Ok((checks, false));
                    }
                }
            }
        }
    }
    Ok((checks, valid))
}

/// Checks every step of every state against every other member of its block.
pub fn weak_bisim_verify(partition: &Partition, cfg: &ExploreConfig) -> Result<WeakBisimCertificate> {
    let (g, labels) = universe_graph(partition, &[], cfg)?;
    let (checks, valid) = verify_labels(&g, &labels, false)?;
    Ok(WeakBisimCertificate {
        partition: labels_to_partition(&g, &labels),
        checks,
        valid,
    })
}

/// Heuristic certificate search: start from strong bisimilarity and merge
/// blocks greedily while the partition stays a weak bisimulation. The blocks
/// of `p` and `q` are tried first. At most `max_attempts` merges are tried.
pub fn greedy_weak_certificate(
    p: &Term,
    q: &Term,
    max_attempts: usize,
    cfg: &ExploreConfig,
) -> Result<Option<WeakBisimCertificate>> {
    let g = explore_all(&[p.clone(), q.clone()], cfg)?;
    let mut labels = bisimulation_labels(&g)?;
    let (ip, iq) = (g.require(p)?, g.require(q)?);
    let merge = |labels: &[usize], from: usize, into: usize| -> Vec<usize> {
        labels.iter().map(|&l| if l == from { into } else { l }).collect()
    };
    let mut attempts = 0;
    let mut candidates: Vec<(usize, usize)> = vec![(labels[iq], labels[ip])];
    let blocks: BTreeSet<usize> = labels.iter().copied().collect();
    for &a in &blocks {
        for &b in &blocks {
            if a > b {
                candidates.push((a, b));
            }
        }
    }
    for (from, into) in candidates {
        if attempts >= max_attempts || labels[ip] == labels[iq] {
            break;
        }
        let present: BTreeSet<usize> = labels.iter().copied().collect();
        if from == into || !present.contains(&from) || !present.contains(&into) {
            continue;
        }
        attempts += 1;
        let trial = merge(&labels, from, into);
        if verify_labels(&g, &trial, true)?.1 {
            labels = trial;
        }
    }
    if labels[ip] != labels[iq] {
        return Ok(None);
    }
    let (checks, valid) = verify_labels(&g, &labels, false)?;
    Ok(Some(WeakBisimCertificate {
        partition: labels_to_partition(&g, &labels),
        checks,
        valid,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlmostSimRow {
    pub source: String,
    pub epsilon: String,
    pub found: bool,
    pub best_distance: String,
}

/// For every degenerate descendant of `p`, the closest degenerate descendant
/// of `q` in the partition's norm. Rows only report; a miss may just mean the
/// depth bound is too small.
pub fn almost_simulation_report(
    p: &Term,
    q: &Term,
    partition: &Partition,
    left_depth: usize,
    right_depth: usize,
    epsilons: &[Rational],
    cfg: &ExploreConfig,
) -> Result<Vec<AlmostSimRow>> {
    let (g, labels) = universe_graph(partition, &[p.clone(), q.clone()], cfg)?;
    let extended = labels_to_partition(&g, &labels);
    let cap = crate::characteristics::DEFAULT_DESCENDANT_CAP;
    let left = enumerate_descendants(&Dist::dirac(p.clone())?, left_depth, true, cap, cfg)?;
    let right = enumerate_descendants(&Dist::dirac(q.clone())?, right_depth, true, cap, cfg)?;
    let mut rows = Vec::new();
    for nu1 in &left {
        let mut best: Option<Rational> = None;
        for nu2 in &right {
            let d = extended.e_norm(&SignedMeasure::difference(nu2, nu1))?;
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
        let best = best.expect("descendants include the source");
        for eps in epsilons {
            rows.push(AlmostSimRow {
                source: nu1.to_string(),
                epsilon: to_fraction_string(eps),
                found: best <= *eps,
                best_distance: to_fraction_string(&best),
            });
        }
    }
    Ok(rows)
}
