//! Strong probabilistic bisimilarity by signature refinement.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::distribution::{Dist, Partition};
use crate::error::{Error, Result};
use crate::plts::{class_masses, explore_all, ExploreConfig, ProcessGraph};
use crate::rational::Rational;
use crate::syntax::{Action, Term};

type Signature = BTreeSet<(Action, Vec<(usize, Rational)>)>;

fn signature(g: &ProcessGraph, i: usize, labels: &[usize]) -> Signature {
    g.steps(i)
        .iter()
        .map(|s| (s.action.clone(), class_masses(&s.target, labels).into_iter().collect()))
        .collect()
}

/// One refinement round; block numbers follow first occurrence.
pub(crate) fn refine(g: &ProcessGraph, labels: &[usize]) -> Vec<usize> {
    let mut ids: HashMap<(usize, Signature), usize> = HashMap::new();
    (0..g.len())
        .map(|i| {
            let key = (labels[i], signature(g, i, labels));
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect()
}

fn count(labels: &[usize]) -> usize {
    labels.iter().collect::<BTreeSet<_>>().len()
}

/// Coarsest stable labelling of the states of a complete graph.
pub fn bisimulation_labels(g: &ProcessGraph) -> Result<Vec<usize>> {
    g.ensure_complete()?;
    let mut labels = vec![0; g.len()];
    loop {
        let next = refine(g, &labels);
        if count(&next) == count(&labels) {
            return Ok(next);
        }
        labels = next;
    }
}

/// True iff one more refinement round splits no block.
pub fn is_stable(g: &ProcessGraph, labels: &[usize]) -> bool {
    count(&refine(g, labels)) == count(labels)
}

pub fn labels_to_partition(g: &ProcessGraph, labels: &[usize]) -> Partition {
    let mut blocks: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        blocks.entry(l).or_default().push(g.state(i).clone());
    }
    Partition::new(blocks.into_values().collect()).expect("labels induce a partition")
}

/// State labelling induced by a partition; states it does not mention get
/// singleton blocks numbered after the partition's own.
pub fn partition_labels(g: &ProcessGraph, partition: &Partition) -> Vec<usize> {
    let mut next = partition.blocks().len();
    (0..g.len())
        .map(|i| match partition.block_of(g.state(i)) {
            Some(b) => b,
            None => {
                next += 1;
                next - 1
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct StrongBisimResult {
    pub partition: Partition,
    pub related: bool,
    pub graph: ProcessGraph,
}

pub fn strong_bisim(p: &Term, q: &Term, cfg: &ExploreConfig) -> Result<StrongBisimResult> {
    let g = explore_all(&[p.clone(), q.clone()], cfg)?;
    let labels = bisimulation_labels(&g)?;
    let related = labels[g.require(p)?] == labels[g.require(q)?];
    Ok(StrongBisimResult {
        partition: labels_to_partition(&g, &labels),
        related,
        graph: g,
    })
}

/// `mu1` and `mu2` give equal mass to every strong bisimilarity class.
pub fn lifted_strong_equal(mu1: &Dist, mu2: &Dist, cfg: &ExploreConfig) -> Result<bool> {
    let roots: Vec<Term> = mu1.support().chain(mu2.support()).cloned().collect();
    let g = explore_all(&roots, cfg)?;
    let labels = bisimulation_labels(&g)?;
    let masses = |mu: &Dist| -> Result<BTreeMap<usize, Rational>> {
        Ok(class_masses(&g.dist_indices(mu)?, &labels))
    };
    Ok(masses(mu1)? == masses(mu2)?)
}

/// Block-level graph of a partition stable under refinement; each block is
/// represented by its first explored member.
pub fn quotient_graph(g: &ProcessGraph, partition: &Partition) -> Result<ProcessGraph> {
    g.ensure_complete()?;
    let labels = partition_labels(g, partition);
    if !is_stable(g, &labels) {
        return Err(Error::UnstablePartition);
    }
    let mut offered: HashMap<usize, &BTreeSet<Action>> = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if *offered.entry(*l).or_insert(g.enabled(i)) != g.enabled(i) {
            return Err(Error::UnstablePartition);
        }
    }
    // renumber blocks densely by first occurrence
    let mut dense: HashMap<usize, usize> = HashMap::new();
    let mut reps = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if let std::collections::hash_map::Entry::Vacant(slot) = dense.entry(l) {
            slot.insert(reps.len());
            reps.push(i);
        }
    }
    let block: Vec<usize> = labels.iter().map(|l| dense[l]).collect();
    let mut states = Vec::with_capacity(reps.len());
    let mut steps = Vec::with_capacity(reps.len());
    let mut enabled = Vec::with_capacity(reps.len());
    for &r in &reps {
        states.push(g.state(r).clone());
        enabled.push(g.enabled(r).clone());
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for s in g.steps(r) {
            let target: Vec<(usize, Rational)> = class_masses(&s.target, &block).into_iter().collect();
            if seen.insert((s.action.clone(), target.clone())) {
                list.push(crate::plts::GraphStep {
                    action: s.action.clone(),
                    target,
                });
            }
        }
        steps.push(list);
    }
    Ok(ProcessGraph::from_parts(states, steps, enabled))
}
