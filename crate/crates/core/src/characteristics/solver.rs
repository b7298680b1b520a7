//! Exact optimal stopping over the `tau`-steps of an explored graph.
//!
//! Every state may stop and collect its reward, or activate one of its
//! `tau`-steps. Mass that never stops collects nothing. Strongly connected
//! components are solved sinks first; inside a component, policy iteration
//! runs over policies under which all mass leaves or stops almost surely.
//! Starting from "stop everywhere" and switching only on strict improvement
//! keeps every visited policy in that class.

use num_traits::Zero;

use crate::error::Result;
use crate::linalg::solve;
use crate::plts::ProcessGraph;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    fn better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }
}

type Targets<'g> = Vec<Vec<&'g [(usize, Rational)]>>;

fn tau_targets(g: &ProcessGraph) -> Targets<'_> {
    (0..g.len())
        .map(|i| g.tau_steps(i).map(|s| s.target.as_slice()).collect())
        .collect()
}

/// Strongly connected components of the `tau`-graph, sinks first.
pub(crate) fn tau_sccs(g: &ProcessGraph) -> Vec<Vec<usize>> {
    let succ: Vec<Vec<usize>> = (0..g.len())
        .map(|i| {
            let mut s: Vec<usize> = g.tau_steps(i).flat_map(|st| st.target.iter().map(|(j, _)| *j)).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    tarjan(&succ)
}

/// Iterative Tarjan; components come out in reverse topological order.
pub(crate) fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

fn expectation(target: &[(usize, Rational)], values: &[Rational]) -> Rational {
    target.iter().map(|(j, w)| w * &values[*j]).sum()
}

// Values of the component's states under `policy`; everything else is fixed.
fn evaluate(comp: &[usize], targets: &Targets, values: &mut [Rational], reward: &[Rational], policy: &[Option<usize>]) -> Result<()> {
    let mut slot = std::collections::HashMap::new();
    let mut moving = Vec::new();
    for (c, &i) in comp.iter().enumerate() {
        match policy[c] {
            Some(_) => {
                slot.insert(i, moving.len());
                moving.push((i, c));
            }
            None => values[i] = reward[i].clone(),
        }
    }
    let m = moving.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (k, &(i, c)) in moving.iter().enumerate() {
        a[k][k] += Rational::from_integer(1.into());
        let step = policy[c].expect("moving state");
        for (j, w) in targets[i][step] {
            match slot.get(j) {
                Some(&col) => a[k][col] -= w,
                None => b[k] += w * &values[*j],
            }
        }
    }
    let x = solve(&a, &b)?;
    for (k, &(i, _)) in moving.iter().enumerate() {
        values[i] = x[k].clone();
    }
    Ok(())
}

/// Optimal value per state of the stopping problem with the given rewards.
///
/// Ties are broken towards the current choice, then the lowest step index.
pub fn optimal_stopping(g: &ProcessGraph, reward: &[Rational], sense: Sense) -> Result<Vec<Rational>> {
    let n = g.len();
    assert_eq!(reward.len(), n, "one reward per state");
    let targets = tau_targets(g);
    let mut values = reward.to_vec();
    for comp in tau_sccs(g) {
        let trivial = comp.len() == 1 && !targets[comp[0]].iter().any(|t| t.iter().any(|(j, _)| *j == comp[0]));
        if trivial {
            let i = comp[0];
            let mut best = reward[i].clone();
            for t in &targets[i] {
                let v = expectation(t, &values);
                if sense.better(&v, &best) {
                    best = v;
                }
            }
            values[i] = best;
            continue;
        }
        let mut policy: Vec<Option<usize>> = vec![None; comp.len()];
        loop {
            let mut changed = false;
            for (c, &i) in comp.iter().enumerate() {
                let mut best = values[i].clone();
                let mut choice = policy[c];
                if sense.better(&reward[i], &best) {
                    best = reward[i].clone();
                    choice = None;
                }
                for (k, t) in targets[i].iter().enumerate() {
                    let v = expectation(t, &values);
                    if sense.better(&v, &best) {
                        best = v;
                        choice = Some(k);
                    }
                }
                if choice != policy[c] {
                    policy[c] = choice;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            evaluate(&comp, &targets, &mut values, reward, &policy)?;
        }
    }
    Ok(values)
}
