//! Operational semantics: process steps, distribution steps, transition
//! sequences and reachable-graph exploration.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::{convex_combine, Dist};
use crate::error::{Error, Result};
use crate::rational::{to_fraction_string, Rational};
use crate::syntax::{Action, Term, TermKind};

pub const DEFAULT_MAX_STATES: usize = 10_000;
pub const DEFAULT_UNFOLD_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionFilter {
    All,
    /// Follow only `tau` steps; enabled external actions are still recorded.
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreConfig {
    pub max_states: usize,
    /// Fixpoint-rule applications allowed along one step derivation.
    pub max_unfold_depth: usize,
    pub action_filter: ActionFilter,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            max_states: DEFAULT_MAX_STATES,
            max_unfold_depth: DEFAULT_UNFOLD_DEPTH,
            action_filter: ActionFilter::All,
        }
    }
}

impl ExploreConfig {
    pub fn internal(&self) -> ExploreConfig {
        ExploreConfig {
            action_filter: ActionFilter::Internal,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcStep {
    pub source: Term,
    pub action: Action,
    pub target: Dist,
}

/// Result of deriving the steps of one process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Steps {
    pub steps: Vec<(Action, Dist)>,
    /// False when some derivation branch ran out of unfolding budget.
    pub complete: bool,
}

fn dirac(t: &Term) -> Dist {
    Dist::from_pairs([(t.clone(), Rational::one())]).expect("continuations of closed terms are closed")
}

fn derive(t: &Term, budget: usize, out: &mut Vec<(Action, Dist)>) -> bool {
    match t.kind() {
        TermKind::Nil | TermKind::Var(_) => true,
        TermKind::Sum(items) => {
            for (a, cont) in items {
                out.push((a.clone(), dirac(cont)));
            }
            true
        }
        TermKind::PSum(items) => {
            let target = Dist::from_pairs(items.iter().map(|(w, b)| (b.clone(), w.clone())))
                .expect("weights were checked on construction");
            out.push((Action::Tau, target));
            true
        }
        TermKind::Par(l, r) => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let ok_l = derive(l, budget, &mut left);
            let ok_r = derive(r, budget, &mut right);
            let dl = dirac(l);
            let dr = dirac(r);
            for (a, rho) in &left {
                out.push((a.clone(), rho.compose(&dr)));
            }
            for (a, rho) in &right {
                out.push((a.clone(), dl.compose(rho)));
            }
            for (a, rho1) in &left {
                let Some(co) = a.complement() else { continue };
                for (b, rho2) in &right {
                    if *b == co {
                        out.push((Action::Tau, rho1.compose(rho2)));
                    }
                }
            }
            ok_l && ok_r
        }
        TermKind::Restrict(ls, body) => {
            let mut inner = Vec::new();
            let ok = derive(body, budget, &mut inner);
            for (a, rho) in inner {
                if a.channel().is_some_and(|c| ls.contains(c)) {
                    continue;
                }
                out.push((a, rho.localize(ls)));
            }
            ok
        }
        TermKind::Fix(..) => {
            if budget == 0 {
                return false;
            }
            let unfolded = t.unfold().expect("fix term");
            derive(&unfolded, budget - 1, out)
        }
    }
}

fn dedupe(steps: Vec<(Action, Dist)>) -> Vec<(Action, Dist)> {
    let mut seen = HashSet::new();
    steps
        .into_iter()
        .filter(|s| seen.insert(s.clone()))
        .collect()
}

/// All steps derivable for `p`, deduplicated by `(action, target)`.
///
/// Fails only when the unfolding budget is exhausted before any step was found.
pub fn derive_steps(p: &Term, max_unfold_depth: usize) -> Result<Steps> {
    p.ensure_process()?;
    let mut raw = Vec::new();
    let complete = derive(p, max_unfold_depth, &mut raw);
    if !complete && raw.is_empty() {
        return Err(Error::UnguardedRecursion(max_unfold_depth));
    }
    Ok(Steps {
        steps: dedupe(raw),
        complete,
    })
}

pub fn step(p: &Term, cfg: &ExploreConfig) -> Result<Vec<ProcStep>> {
    let derived = derive_steps(p, cfg.max_unfold_depth)?;
    Ok(derived
        .steps
        .into_iter()
        .map(|(action, target)| ProcStep {
            source: p.clone(),
            action,
            target,
        })
        .collect())
}

/// One Part II step: activate `process --action--> target` with probability `activation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub action: Action,
    pub activation: Rational,
    pub process: Term,
    pub target: Dist,
}

impl WitnessStep {
    pub fn new(step: &ProcStep, activation: Rational) -> WitnessStep {
        WitnessStep {
            action: step.action.clone(),
            activation,
            process: step.source.clone(),
            target: step.target.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
}

impl Witness {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.steps.iter().all(|s| s.activation.is_one())
    }

    pub fn is_internal(&self) -> bool {
        self.steps.iter().all(|s| s.action == Action::Tau)
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }
}

/// `mu + mu(P) * p * (rho - delta_P)` without re-deriving the step.
pub(crate) fn apply_activation(mu: &Dist, w: &WitnessStep) -> Result<Dist> {
    let mass = mu.prob(&w.process);
    if mass.is_zero() {
        return Err(Error::InvalidActivation(format!("`{}` is not in the support", w.process)));
    }
    if w.activation <= Rational::zero() || w.activation > Rational::one() {
        return Err(Error::InvalidActivation(format!("activation {} outside (0,1]", w.activation)));
    }
    let scale = &mass * &w.activation;
    let mut nu = mu.to_signed();
    nu.add_scaled(&w.target, &scale);
    nu.add(&w.process, &-scale);
    nu.into_dist()
}

/// Checked Part II step; the chosen process step must be derivable.
pub fn dist_step(mu: &Dist, w: &WitnessStep, cfg: &ExploreConfig) -> Result<Dist> {
    if !mu.contains(&w.process) {
        return Err(Error::InvalidActivation(format!("`{}` is not in the support", w.process)));
    }
    let derived = derive_steps(&w.process, cfg.max_unfold_depth)?;
    if !derived
        .steps
        .iter()
        .any(|(a, rho)| *a == w.action && *rho == w.target)
    {
        return Err(Error::InvalidActivation(format!(
            "`{}` has no {} step to {}",
            w.process, w.action, w.target
        )));
    }
    apply_activation(mu, w)
}

pub fn run_witness(mu: &Dist, pi: &Witness, cfg: &ExploreConfig) -> Result<Dist> {
    let mut cur = mu.clone();
    for w in &pi.steps {
        cur = dist_step(&cur, w, cfg)?;
    }
    Ok(cur)
}

fn run_unchecked(mu: &Dist, pi: &Witness) -> Result<Dist> {
    let mut cur = mu.clone();
    for (i, w) in pi.steps.iter().enumerate() {
        cur = apply_activation(&cur, w)
            .map_err(|e| Error::InvalidSequence(format!("step {i}: {e}")))?;
    }
    Ok(cur)
}

/// A transition sequence `source --pi--> end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    pub source: Dist,
    pub witness: Witness,
    pub end: Dist,
}

impl Sequence {
    pub fn new(source: Dist, witness: Witness) -> Result<Sequence> {
        let end = run_unchecked(&source, &witness)?;
        Ok(Sequence { source, witness, end })
    }

    fn check(&self) -> Result<()> {
        let end = run_unchecked(&self.source, &self.witness)?;
        if end != self.end {
            return Err(Error::InvalidSequence(format!(
                "witness ends at {end}, not at {}",
                self.end
            )));
        }
        Ok(())
    }
}

fn check_weight(p: &Rational) -> Result<()> {
    if *p < Rational::zero() || *p > Rational::one() {
        return Err(Error::InvalidSequence(format!("{p} is not a probability")));
    }
    Ok(())
}

/// Sequence from `p*mu1 + (1-p)*mu2` to `p*nu1 + (1-p)*nu2`, of length at most `|pi1| + |pi2|`.
pub fn combine_sequences(p: &Rational, first: &Sequence, second: &Sequence) -> Result<Sequence> {
    check_weight(p)?;
    first.check()?;
    second.check()?;
    let q = Rational::one() - p;
    let source = convex_combine(&[(p.clone(), first.source.clone()), (q.clone(), second.source.clone())])?;
    if p.is_one() {
        return Ok(Sequence {
            source,
            witness: first.witness.clone(),
            end: first.end.clone(),
        });
    }
    if p.is_zero() {
        return Ok(Sequence {
            source,
            witness: second.witness.clone(),
            end: second.end.clone(),
        });
    }
    let mut steps = Vec::new();
    let mut cur = source.clone();
    // The first component moves while the second is held at its source,
    // then the second moves while the first is held at its end.
    let phases = [
        (p, &first.source, &first.witness, &second.source),
        (&q, &second.source, &second.witness, &first.end),
    ];
    for (weight, start, witness, held) in phases {
        let held_weight = Rational::one() - weight;
        let mut mover = start.clone();
        for w in &witness.steps {
            let mover_mass = mover.prob(&w.process);
            let total = weight * &mover_mass + &held_weight * held.prob(&w.process);
            let combined = WitnessStep {
                activation: weight * &mover_mass * &w.activation / &total,
                ..w.clone()
            };
            cur = apply_activation(&cur, &combined)?;
            mover = apply_activation(&mover, w)?;
            steps.push(combined);
        }
    }
    let end = convex_combine(&[(p.clone(), first.end.clone()), (q, second.end.clone())])?;
    if cur != end {
        return Err(Error::InvalidSequence("combined witness missed the target".into()));
    }
    Ok(Sequence {
        source,
        witness: Witness { steps },
        end,
    })
}

/// Splits a sequence from `p*mu1 + (1-p)*mu2` into sequences from `mu1` and `mu2`
/// whose endpoints combine back to the original endpoint.
pub fn split_sequence(
    p: &Rational,
    mu1: &Dist,
    mu2: &Dist,
    seq: &Sequence,
) -> Result<(Sequence, Sequence)> {
    check_weight(p)?;
    seq.check()?;
    let q = Rational::one() - p;
    let source = convex_combine(&[(p.clone(), mu1.clone()), (q.clone(), mu2.clone())])?;
    if source != seq.source {
        return Err(Error::InvalidSequence(format!(
            "source {} is not the stated combination",
            seq.source
        )));
    }
    let mut parts = [(mu1.clone(), Vec::new()), (mu2.clone(), Vec::new())];
    for w in &seq.witness.steps {
        for (cur, steps) in parts.iter_mut() {
            if cur.contains(&w.process) {
                *cur = apply_activation(cur, w)?;
                steps.push(w.clone());
            }
        }
    }
    let [(end1, steps1), (end2, steps2)] = parts;
    let recombined = convex_combine(&[(p.clone(), end1.clone()), (q, end2.clone())])?;
    if recombined != seq.end {
        return Err(Error::InvalidSequence("split endpoints do not recombine".into()));
    }
    Ok((
        Sequence {
            source: mu1.clone(),
            witness: Witness { steps: steps1 },
            end: end1,
        },
        Sequence {
            source: mu2.clone(),
            witness: Witness { steps: steps2 },
            end: end2,
        },
    ))
}

/// Memoized `tau`-step lookup used by enumerators.
#[derive(Default)]
pub struct StepCache {
    depth: usize,
    map: HashMap<Term, Vec<ProcStep>>,
}

impl StepCache {
    pub fn new(max_unfold_depth: usize) -> StepCache {
        StepCache {
            depth: max_unfold_depth,
            map: HashMap::new(),
        }
    }

    pub fn steps(&mut self, p: &Term) -> Result<&[ProcStep]> {
        if !self.map.contains_key(p) {
            let derived = derive_steps(p, self.depth)?;
            if !derived.complete {
                return Err(Error::UnguardedRecursion(self.depth));
            }
            let steps = derived
                .steps
                .into_iter()
                .map(|(action, target)| ProcStep {
                    source: p.clone(),
                    action,
                    target,
                })
                .collect();
            self.map.insert(p.clone(), steps);
        }
        Ok(&self.map[p])
    }

    pub fn tau_steps(&mut self, p: &Term) -> Result<Vec<ProcStep>> {
        Ok(self
            .steps(p)?
            .iter()
            .filter(|s| s.action == Action::Tau)
            .cloned()
            .collect())
    }
}

/// Every endpoint of an internal sequence of length at most `depth`, in discovery order.
///
/// `activations` lists the activation probabilities tried at each step; the
/// degenerate enumeration uses `[1]`.
pub fn enumerate_descendants_with(
    mu: &Dist,
    depth: usize,
    activations: &[Rational],
    cap: usize,
    cache: &mut StepCache,
) -> Result<Vec<Dist>> {
    let mut seen: HashSet<Dist> = HashSet::new();
    let mut out = vec![mu.clone()];
    seen.insert(mu.clone());
    let mut frontier = vec![mu.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for nu in &frontier {
            let support: Vec<Term> = nu.support().cloned().collect();
            for p in support {
                for s in cache.tau_steps(&p)? {
                    for r in activations {
                        let w = WitnessStep::new(&s, r.clone());
                        let succ = apply_activation(nu, &w)?;
                        if seen.insert(succ.clone()) {
                            if seen.len() > cap {
                                return Err(Error::Explosion(cap));
                            }
                            out.push(succ.clone());
                            next.push(succ);
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(out)
}

pub fn enumerate_descendants(
    mu: &Dist,
    depth: usize,
    degenerate_only: bool,
    cap: usize,
    cfg: &ExploreConfig,
) -> Result<Vec<Dist>> {
    let activations = if degenerate_only {
        vec![Rational::one()]
    } else {
        vec![
            Rational::new(1.into(), 2.into()),
            Rational::one(),
        ]
    };
    let mut cache = StepCache::new(cfg.max_unfold_depth);
    enumerate_descendants_with(mu, depth, &activations, cap, &mut cache)
}

/// A step of an explored graph with target given over state indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphStep {
    pub action: Action,
    pub target: Vec<(usize, Rational)>,
}

/// Materialized reachable fragment of the pLTS, numbered in discovery order.
#[derive(Clone, Debug)]
pub struct ProcessGraph {
    states: Vec<Term>,
    index: HashMap<Term, usize>,
    steps: Vec<Vec<GraphStep>>,
    enabled: Vec<BTreeSet<Action>>,
    expanded: Vec<bool>,
    truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub states: usize,
    pub transitions: usize,
    pub truncated: bool,
}

#[derive(Serialize)]
struct JsonTarget {
    state: usize,
    p: String,
}

#[derive(Serialize)]
struct JsonStep {
    src: usize,
    act: String,
    target: Vec<JsonTarget>,
}

#[derive(Serialize)]
struct JsonGraph {
    states: Vec<String>,
    steps: Vec<JsonStep>,
    truncated: bool,
}

impl ProcessGraph {
    /// Assembles a graph from parts; used by quotienting.
    pub(crate) fn from_parts(
        states: Vec<Term>,
        steps: Vec<Vec<GraphStep>>,
        enabled: Vec<BTreeSet<Action>>,
    ) -> ProcessGraph {
        let index = states.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let n = states.len();
        ProcessGraph {
            states,
            index,
            steps,
            enabled,
            expanded: vec![true; n],
            truncated: false,
        }
    }

    pub fn states(&self) -> &[Term] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Term {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn require(&self, t: &Term) -> Result<usize> {
        self.index_of(t).ok_or_else(|| Error::UnknownState(t.to_string()))
    }

    pub fn steps(&self, i: usize) -> &[GraphStep] {
        &self.steps[i]
    }

    pub fn tau_steps(&self, i: usize) -> impl Iterator<Item = &GraphStep> {
        self.steps[i].iter().filter(|s| s.action == Action::Tau)
    }

    /// Every action for which the state has a step, recorded even when not followed.
    pub fn enabled(&self, i: usize) -> &BTreeSet<Action> {
        &self.enabled[i]
    }

    pub fn is_expanded(&self, i: usize) -> bool {
        self.expanded[i]
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn ensure_complete(&self) -> Result<()> {
        if self.truncated {
            Err(Error::Explosion(self.states.len()))
        } else {
            Ok(())
        }
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            states: self.states.len(),
            transitions: self.steps.iter().map(Vec::len).sum(),
            truncated: self.truncated,
        }
    }

    /// `mu` as a sparse vector over state indices.
    pub fn dist_indices(&self, mu: &Dist) -> Result<Vec<(usize, Rational)>> {
        mu.iter().map(|(t, w)| Ok((self.require(t)?, w.clone()))).collect()
    }

    pub fn target_dist(&self, step: &GraphStep) -> Dist {
        Dist::from_pairs(step.target.iter().map(|(j, w)| (self.states[*j].clone(), w.clone())))
            .expect("graph targets are distributions")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut steps = Vec::new();
        for (src, list) in self.steps.iter().enumerate() {
            for s in list {
                steps.push(JsonStep {
                    src,
                    act: s.action.to_string(),
                    target: s
                        .target
                        .iter()
                        .map(|(j, w)| JsonTarget {
                            state: *j,
                            p: to_fraction_string(w),
                        })
                        .collect(),
                });
            }
        }
        serde_json::to_value(JsonGraph {
            states: self.states.iter().map(|t| t.to_string()).collect(),
            steps,
            truncated: self.truncated,
        })
        .expect("graph serializes")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph plts {\n  rankdir=LR;\n");
        for (i, t) in self.states.iter().enumerate() {
            let label = t.to_string().replace('\\', "\\\\").replace('"', "\\\"");
            let _ = writeln!(out, "  s{i} [shape=box, label=\"{label}\"];");
        }
        for (i, list) in self.steps.iter().enumerate() {
            for (k, s) in list.iter().enumerate() {
                let _ = writeln!(out, "  h{i}_{k} [shape=point];");
                let _ = writeln!(out, "  s{i} -> h{i}_{k} [arrowhead=none, label=\"{}\"];", s.action);
                for (j, w) in &s.target {
                    let _ = writeln!(out, "  h{i}_{k} -> s{j} [label=\"{}\"];", to_fraction_string(w));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Breadth-first exploration from every root.
pub fn explore_all(roots: &[Term], cfg: &ExploreConfig) -> Result<ProcessGraph> {
    let mut g = ProcessGraph {
        states: Vec::new(),
        index: HashMap::new(),
        steps: Vec::new(),
        enabled: Vec::new(),
        expanded: Vec::new(),
        truncated: false,
    };
    let mut queue = VecDeque::new();
    for r in roots {
        r.ensure_process()?;
        if !g.index.contains_key(r) {
            if g.states.len() >= cfg.max_states {
                g.truncated = true;
                break;
            }
            add_state(&mut g, r.clone());
            queue.push_back(g.states.len() - 1);
        }
    }
    'bfs: while let Some(i) = queue.pop_front() {
        let derived = derive_steps(&g.states[i], cfg.max_unfold_depth)?;
        if !derived.complete {
            g.truncated = true;
        }
        let mut enabled = BTreeSet::new();
        let mut list = Vec::new();
        for (a, rho) in derived.steps {
            enabled.insert(a.clone());
            if cfg.action_filter == ActionFilter::Internal && a != Action::Tau {
                continue;
            }
            let mut support: Vec<(&Term, &Rational)> = rho.iter().collect();
            support.sort_by_cached_key(|(t, _)| t.to_string());
            let mut target = Vec::with_capacity(support.len());
            for (t, w) in support {
                let j = match g.index.get(t) {
                    Some(&j) => j,
                    None => {
                        if g.states.len() >= cfg.max_states {
                            g.truncated = true;
                            break 'bfs;
                        }
                        add_state(&mut g, t.clone());
                        queue.push_back(g.states.len() - 1);
                        g.states.len() - 1
                    }
                };
                target.push((j, w.clone()));
            }
            target.sort_by_key(|(j, _)| *j);
            list.push(GraphStep { action: a, target });
        }
        g.steps[i] = list;
        g.enabled[i] = enabled;
        g.expanded[i] = true;
    }
    Ok(g)
}

fn add_state(g: &mut ProcessGraph, t: Term) {
    g.index.insert(t.clone(), g.states.len());
    g.states.push(t);
    g.steps.push(Vec::new());
    g.enabled.push(BTreeSet::new());
    g.expanded.push(false);
}

pub fn explore(p: &Term, cfg: &ExploreConfig) -> Result<ProcessGraph> {
    explore_all(std::slice::from_ref(p), cfg)
}

/// Explores from the support of `mu`.
pub fn explore_dist(mu: &Dist, cfg: &ExploreConfig) -> Result<ProcessGraph> {
    let roots: Vec<Term> = mu.support().cloned().collect();
    explore_all(&roots, cfg)
}

/// Groups the target of a step by a state labelling, summing masses.
pub(crate) fn class_masses(target: &[(usize, Rational)], label: &[usize]) -> BTreeMap<usize, Rational> {
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    for (j, w) in target {
        *out.entry(label[*j]).or_insert_with(Rational::zero) += w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::syntax::parse_process;

    fn t(s: &str) -> Term {
        parse_process(s).unwrap()
    }

    fn d(pairs: &[(&str, Rational)]) -> Dist {
        Dist::from_pairs(pairs.iter().map(|(s, w)| (t(s), w.clone()))).unwrap()
    }

    const Q1: &str = "1/2*tau.a (+) 1/2*tau.b";
    const Q2: &str = "mu X.(1/3*tau.a (+) 1/3*tau.b (+) 1/3*tau.X)";

    fn cfg() -> ExploreConfig {
        ExploreConfig::default()
    }

    fn only_step(p: &Term) -> ProcStep {
        let mut s = step(p, &cfg()).unwrap();
        assert_eq!(s.len(), 1);
        s.remove(0)
    }

    #[test]
    fn part_one_examples() {
        let s = only_step(&t(Q1));
        assert_eq!(s.action, Action::Tau);
        assert_eq!(s.target, d(&[("a", ratio(1, 2)), ("b", ratio(1, 2))]));

        let q3 = step(&t("tau.a + tau.b.a"), &cfg()).unwrap();
        let targets: Vec<_> = q3.iter().map(|s| s.target.clone()).collect();
        assert_eq!(targets, vec![Dist::dirac(t("a")).unwrap(), Dist::dirac(t("b.a")).unwrap()]);

        assert_eq!(step(&t("mu X.X"), &cfg()), Err(Error::UnguardedRecursion(64)));
    }

    #[test]
    fn parallel_and_restriction() {
        let steps = step(&t("a | ~a"), &cfg()).unwrap();
        let actions: Vec<String> = steps.iter().map(|s| s.action.to_string()).collect();
        assert_eq!(actions, ["a", "~a", "tau"]);
        assert_eq!(steps[2].target, Dist::dirac(t("0 | 0")).unwrap());

        let r = step(&t("restrict{a}(a | ~a.b)"), &cfg()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].target, Dist::dirac(t("restrict{a}(0 | b)")).unwrap());

        // duplicate derivations collapse
        assert_eq!(step(&t("a + a"), &cfg()).unwrap().len(), 1);
    }

    #[test]
    fn part_two_examples() {
        let q1 = t(Q1);
        let q2 = t(Q2);
        let mu = d(&[(Q1, ratio(1, 2)), (Q2, ratio(1, 2))]);
        let w1 = WitnessStep::new(&only_step(&q1), ratio(1, 2));
        let nu1 = dist_step(&mu, &w1, &cfg()).unwrap();
        assert_eq!(
            nu1,
            d(&[(Q1, ratio(1, 4)), (Q2, ratio(1, 2)), ("a", ratio(1, 8)), ("b", ratio(1, 8))])
        );
        let w2 = WitnessStep::new(&only_step(&q2), ratio(1, 2));
        let nu2 = dist_step(&mu, &w2, &cfg()).unwrap();
        assert_eq!(
            nu2,
            d(&[(Q1, ratio(1, 2)), (Q2, ratio(1, 3)), ("a", ratio(1, 12)), ("b", ratio(1, 12))])
        );

        let loop_step = only_step(&t("mu X.tau.X"));
        let w = WitnessStep::new(&loop_step, Rational::one());
        let start = Dist::dirac(t("mu X.tau.X")).unwrap();
        assert_eq!(dist_step(&start, &w, &cfg()).unwrap(), start);

        let bad = WitnessStep::new(&only_step(&t("tau.c")), Rational::one());
        assert!(matches!(dist_step(&mu, &bad, &cfg()), Err(Error::InvalidActivation(_))));
    }

    #[test]
    fn q2_degenerate_runs() {
        let q2 = t(Q2);
        let s = only_step(&q2);
        let start = Dist::dirac(q2.clone()).unwrap();
        assert_eq!(run_witness(&start, &Witness::default(), &cfg()).unwrap(), start);
        for k in 0..6u32 {
            let pi = Witness {
                steps: vec![WitnessStep::new(&s, Rational::one()); k as usize],
            };
            let nu = run_witness(&start, &pi, &cfg()).unwrap();
            let p3k = int(3i64.pow(k));
            let side = (&p3k - int(1)) / (int(2) * &p3k);
            assert_eq!(nu.prob(&q2), Rational::one() / &p3k);
            assert_eq!(nu.prob(&t("a")), side);
            assert_eq!(nu.prob(&t("b")), side);
        }

        let q1 = t(Q1);
        let w = WitnessStep::new(&only_step(&q1), ratio(2, 3));
        let nu = dist_step(&Dist::dirac(q1.clone()).unwrap(), &w, &cfg()).unwrap();
        assert_eq!(nu, d(&[(Q1, ratio(1, 3)), ("a", ratio(1, 3)), ("b", ratio(1, 3))]));
    }

    #[test]
    fn exploration() {
        let g = explore(&t("tau.a"), &cfg()).unwrap();
        assert_eq!(g.len(), 3);
        let g = explore(&t(Q2), &cfg()).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.state(0), &t(Q2));
        assert_eq!(g.steps(0).len(), 1);
        assert_eq!(g.target_dist(&g.steps(0)[0]), d(&[("a", ratio(1, 3)), ("b", ratio(1, 3)), (Q2, ratio(1, 3))]));

        let small = ExploreConfig {
            max_states: 50,
            ..cfg()
        };
        let g = explore(&t("mu X.(a.0 | X)"), &small).unwrap();
        assert!(g.truncated());
        let g = explore(&t("mu X.a.(b | X)"), &small).unwrap();
        assert!(g.truncated());
        assert_eq!(g.len(), 50);

        let again = explore(&t(Q2), &cfg()).unwrap();
        assert_eq!(again.to_json(), explore(&t(Q2), &cfg()).unwrap().to_json());
        assert!(again.to_dot().contains("shape=point"));
    }

    #[test]
    fn descendants() {
        let p1 = Dist::dirac(t("tau.a")).unwrap();
        assert_eq!(enumerate_descendants(&p1, 0, true, 100, &cfg()).unwrap(), vec![p1.clone()]);
        let one = enumerate_descendants(&p1, 1, true, 100, &cfg()).unwrap();
        assert_eq!(one, vec![p1, Dist::dirac(t("a")).unwrap()]);

        let q2 = Dist::dirac(t(Q2)).unwrap();
        let desc = enumerate_descendants(&q2, 3, true, 100, &cfg()).unwrap();
        let nu3 = d(&[(Q2, ratio(1, 27)), ("a", ratio(13, 27)), ("b", ratio(13, 27))]);
        assert!(desc.contains(&nu3));
        assert!(matches!(enumerate_descendants(&q2, 10, false, 5, &cfg()), Err(Error::Explosion(5))));
    }

    #[test]
    fn convexity_on_q_examples() {
        let q1 = t(Q1);
        let q2 = t(Q2);
        let s1 = only_step(&q1);
        let s2 = only_step(&q2);
        let first = Sequence::new(
            Dist::dirac(q1.clone()).unwrap(),
            Witness {
                steps: vec![WitnessStep::new(&s1, ratio(1, 2))],
            },
        )
        .unwrap();
        let second = Sequence::new(
            Dist::dirac(q2.clone()).unwrap(),
            Witness {
                steps: vec![WitnessStep::new(&s2, Rational::one()), WitnessStep::new(&s2, ratio(1, 3))],
            },
        )
        .unwrap();
        let p = ratio(1, 3);
        let combined = combine_sequences(&p, &first, &second).unwrap();
        assert!(combined.witness.len() <= 3);
        let (a, b) = split_sequence(&p, &first.source, &second.source, &combined).unwrap();
        let back = convex_combine(&[(p.clone(), a.end), (ratio(2, 3), b.end)]).unwrap();
        assert_eq!(back, combined.end);
        let same = combine_sequences(&Rational::one(), &first, &second).unwrap();
        assert_eq!(same.witness, first.witness);
        assert_eq!(same.end, first.end);
    }
}
