//! Brute-force characteristics by enumerating degenerate internal sequences.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};

use super::{internal_graph, may_values, Predicate};
use crate::distribution::Dist;
use crate::error::{Error, Result};
use crate::plts::{enumerate_descendants_with, ExploreConfig, ProcessGraph, StepCache};
use crate::rational::Rational;
use crate::syntax::Term;

pub const DEFAULT_DESCENDANT_CAP: usize = 200_000;

/// Per-process may value used inside the fair oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerMay {
    /// From the exact solver.
    Exact,
    /// From the may oracle at the given depth; exact once the depth covers every sequence.
    BruteForce(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteMode {
    /// Largest satisfaction probability over descendants.
    May,
    /// Smallest satisfaction probability over descendants.
    Inf,
    /// Smallest value of `sum nu(Q) * may(Q)` over descendants.
    Fair(InnerMay),
}

struct Oracle<'a> {
    phi: &'a Predicate,
    cfg: &'a ExploreConfig,
    cache: StepCache,
    member: HashMap<Term, bool>,
    inner: HashMap<Term, Rational>,
}

impl Oracle<'_> {
    fn holds(&mut self, t: &Term) -> Result<bool> {
        if let Some(&b) = self.member.get(t) {
            return Ok(b);
        }
        let b = self.phi.holds(t, self.cfg)?;
        self.member.insert(t.clone(), b);
        Ok(b)
    }

    fn score(&mut self, nu: &Dist, mode: BruteMode) -> Result<Rational> {
        let mut total = Rational::zero();
        for (t, w) in nu.iter() {
            let v = match mode {
                BruteMode::May | BruteMode::Inf => {
                    if self.holds(t)? {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }
                BruteMode::Fair(inner) => self.inner_may(t, inner)?,
            };
            total += w * v;
        }
        Ok(total)
    }

    fn inner_may(&mut self, t: &Term, inner: InnerMay) -> Result<Rational> {
        if let Some(v) = self.inner.get(t) {
            return Ok(v.clone());
        }
        let v = match inner {
            InnerMay::Exact => {
                let g = internal_graph(&Dist::dirac(t.clone())?, self.cfg)?;
                let values = may_values(&g, self.phi)?;
                for (s, v) in g.states().iter().zip(values) {
                    self.inner.insert(s.clone(), v);
                }
                return Ok(self.inner[t].clone());
            }
            InnerMay::BruteForce(depth) => {
                let table = self.table(&Dist::dirac(t.clone())?, depth, BruteMode::May, DEFAULT_DESCENDANT_CAP)?;
                table.last().cloned().unwrap_or_else(Rational::zero)
            }
        };
        self.inner.insert(t.clone(), v.clone());
        Ok(v)
    }

    /// Best value over descendants of length at most `d`, for each `d` up to
    /// `depth`; stops early once no new descendant appears.
    fn table(&mut self, mu: &Dist, depth: usize, mode: BruteMode, cap: usize) -> Result<Vec<Rational>> {
        let better = |a: &Rational, b: &Rational| match mode {
            BruteMode::May => a > b,
            BruteMode::Inf | BruteMode::Fair(_) => a < b,
        };
        let mut seen: HashSet<Dist> = HashSet::new();
        seen.insert(mu.clone());
        let mut best = self.score(mu, mode)?;
        let mut rows = vec![best.clone()];
        let mut frontier = vec![mu.clone()];
        let one = [Rational::one()];
        while rows.len() <= depth {
            let mut next = Vec::new();
            for nu in &frontier {
                let level = enumerate_descendants_with(nu, 1, &one, usize::MAX, &mut self.cache)?;
                for succ in level.into_iter().skip(1) {
                    if seen.insert(succ.clone()) {
                        if seen.len() > cap {
                            return Err(Error::Explosion(cap));
                        }
                        let v = self.score(&succ, mode)?;
                        if better(&v, &best) {
                            best = v;
                        }
                        next.push(succ);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            rows.push(best.clone());
            frontier = next;
        }
        Ok(rows)
    }
}

fn oracle<'a>(phi: &'a Predicate, cfg: &'a ExploreConfig) -> Oracle<'a> {
    Oracle {
        phi,
        cfg,
        cache: StepCache::new(cfg.max_unfold_depth),
        member: HashMap::new(),
        inner: HashMap::new(),
    }
}

/// Oracle values per enumeration depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteTable {
    /// `rows[d]` is the value at depth `d`.
    pub rows: Vec<Rational>,
    /// True when no sequence longer than `rows.len() - 1` reaches a new distribution,
    /// so every deeper row repeats the last one.
    pub saturated: bool,
}

impl BruteTable {
    pub fn value(&self) -> &Rational {
        self.rows.last().expect("depth zero row")
    }

    /// Row `d`, extended past saturation.
    pub fn at(&self, d: usize) -> Option<&Rational> {
        match self.rows.get(d) {
            Some(v) => Some(v),
            None if self.saturated => self.rows.last(),
            None => None,
        }
    }
}

/// Oracle values for depths `0..=depth`, stopping early at saturation.
pub fn brute_force_table(
    mu: &Dist,
    phi: &Predicate,
    depth: usize,
    mode: BruteMode,
    cfg: &ExploreConfig,
) -> Result<BruteTable> {
    let rows = oracle(phi, cfg).table(mu, depth, mode, DEFAULT_DESCENDANT_CAP)?;
    let saturated = rows.len() <= depth;
    Ok(BruteTable { rows, saturated })
}

/// Oracle value at `depth`; `usize::MAX` enumerates until saturation.
pub fn brute_force_chi(mu: &Dist, phi: &Predicate, depth: usize, mode: BruteMode, cfg: &ExploreConfig) -> Result<Rational> {
    Ok(brute_force_table(mu, phi, depth, mode, cfg)?.value().clone())
}

/// Checks that every endpoint of a sequence with activations in `{1/2, 1}`
/// lies between degenerate endpoints of the same length bound.
/// Returns the number of endpoints checked and the violating ones.
pub fn mixed_endpoint_bounds(
    mu: &Dist,
    phi: &Predicate,
    depth: usize,
    cfg: &ExploreConfig,
) -> Result<(usize, Vec<Dist>)> {
    let mut o = oracle(phi, cfg);
    let half = Rational::new(1.into(), 2.into());
    let mixed = enumerate_descendants_with(mu, depth, &[half, Rational::one()], DEFAULT_DESCENDANT_CAP, &mut o.cache)?;
    let degenerate = enumerate_descendants_with(mu, depth, &[Rational::one()], DEFAULT_DESCENDANT_CAP, &mut o.cache)?;
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for nu in &degenerate {
        let v = o.score(nu, BruteMode::May)?;
        if lo.as_ref().is_none_or(|l| v < *l) {
            lo = Some(v.clone());
        }
        if hi.as_ref().is_none_or(|h| v > *h) {
            hi = Some(v);
        }
    }
    let (lo, hi) = (lo.expect("nonempty"), hi.expect("nonempty"));
    let mut bad = Vec::new();
    for nu in &mixed {
        let v = o.score(nu, BruteMode::May)?;
        if v < lo || v > hi {
            bad.push(nu.clone());
        }
    }
    Ok((mixed.len(), bad))
}

/// Longest `tau`-path of an acyclic graph; `None` when a `tau`-cycle exists.
pub fn tau_height(g: &ProcessGraph) -> Option<usize> {
    let mut height = vec![0usize; g.len()];
    for comp in super::solver::tau_sccs(g) {
        if comp.len() > 1 {
            return None;
        }
        let i = comp[0];
        let mut h = 0;
        for s in g.tau_steps(i) {
            for (j, _) in &s.target {
                if *j == i {
                    return None;
                }
                h = h.max(height[*j] + 1);
            }
        }
        height[i] = h;
    }
    Some(height.into_iter().max().unwrap_or(0))
}
