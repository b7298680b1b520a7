//! Classical (non-probabilistic) observability and testing, by graph reachability.

use std::collections::VecDeque;

use super::tarjan;
use crate::error::{Error, Result};
use crate::plts::{explore, ExploreConfig, ProcessGraph};
use crate::syntax::{Action, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalMode {
    May,
    Must,
    Fair,
}

fn require_classical(t: &Term) -> Result<()> {
    if t.contains_psum() {
        return Err(Error::NotClassical(t.to_string()));
    }
    Ok(())
}

fn tau_succ(g: &ProcessGraph) -> Vec<Vec<usize>> {
    (0..g.len())
        .map(|i| {
            let mut s: Vec<usize> = g
                .tau_steps(i)
                .flat_map(|st| st.target.iter().map(|(j, _)| *j))
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect()
}

fn reachable(succ: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(i) = queue.pop_front() {
        for &j in &succ[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

/// States from which a `good` state is reachable by `tau`-moves.
fn can_reach(succ: &[Vec<usize>], good: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let mut pred = vec![Vec::new(); n];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            pred[j].push(i);
        }
    }
    let mut out = good.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| good[i]).collect();
    while let Some(j) = queue.pop_front() {
        for &i in &pred[j] {
            if !out[i] {
                out[i] = true;
                queue.push_back(i);
            }
        }
    }
    out
}

fn internal_graph_of(p: &Term, cfg: &ExploreConfig) -> Result<ProcessGraph> {
    let g = explore(p, &cfg.internal())?;
    g.ensure_complete()?;
    Ok(g)
}

fn external(g: &ProcessGraph) -> Vec<bool> {
    (0..g.len()).map(|i| g.enabled(i).iter().any(Action::is_external)).collect()
}

/// `P` can reach, by internal moves, a state offering an external action.
pub fn classical_observable(p: &Term, cfg: &ExploreConfig) -> Result<bool> {
    require_classical(p)?;
    let g = internal_graph_of(p, cfg)?;
    Ok(can_reach(&tau_succ(&g), &external(&g))[0])
}

/// Every state reachable by internal moves is observable.
pub fn classical_strongly_observable(p: &Term, cfg: &ExploreConfig) -> Result<bool> {
    require_classical(p)?;
    let g = internal_graph_of(p, cfg)?;
    let succ = tau_succ(&g);
    let ok = can_reach(&succ, &external(&g));
    let from_root = reachable(&succ, 0);
    Ok((0..g.len()).all(|i| !from_root[i] || ok[i]))
}

/// Runs `P | O` against the success action of the observer `O`.
pub fn classical_test(p: &Term, observer: &Term, mode: ClassicalMode, cfg: &ExploreConfig) -> Result<bool> {
    require_classical(p)?;
    require_classical(observer)?;
    let g = internal_graph_of(&Term::par(p.clone(), observer.clone()), cfg)?;
    let succ = tau_succ(&g);
    let success: Vec<bool> = (0..g.len()).map(|i| g.enabled(i).contains(&Action::Omega)).collect();
    Ok(match mode {
        ClassicalMode::May => can_reach(&succ, &success)[0],
        ClassicalMode::Fair => {
            let ok = can_reach(&succ, &success);
            let from_root = reachable(&succ, 0);
            (0..g.len()).all(|i| !from_root[i] || ok[i])
        }
        ClassicalMode::Must => {
            if success[0] {
                return Ok(true);
            }
            // Runs are cut at the first successful state; a failing run is a
            // deadlock or an infinite path among unsuccessful states.
            let pruned: Vec<Vec<usize>> = (0..g.len())
                .map(|i| if success[i] { Vec::new() } else { succ[i].clone() })
                .collect();
            let from_root = reachable(&pruned, 0);
            let deadlock = (0..g.len()).any(|i| from_root[i] && !success[i] && succ[i].is_empty());
            let looping = tarjan(&pruned).iter().any(|comp| {
                from_root[comp[0]]
                    && !success[comp[0]]
                    && (comp.len() > 1 || pruned[comp[0]].contains(&comp[0]))
            });
            !(deadlock || looping)
        }
    })
}
