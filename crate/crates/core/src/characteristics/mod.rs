//! Predicates, testing outcomes and the may/fair characteristics.

mod classical;
mod oracle;
mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::distribution::Dist;
use crate::error::{Error, Result};
use crate::plts::{derive_steps, explore_dist, ExploreConfig, ProcessGraph};
use crate::rational::{serde_fraction, Rational};
use crate::syntax::{Action, Channel, Term};

pub use classical::{classical_observable, classical_strongly_observable, classical_test, ClassicalMode};
pub use oracle::{
    brute_force_chi, brute_force_table, mixed_endpoint_bounds, tau_height, BruteMode, BruteTable, InnerMay,
    DEFAULT_DESCENDANT_CAP,
};
pub use solver::{optimal_stopping, Sense};
pub(crate) use solver::tarjan;

/// A decidable set of processes.
#[derive(Clone)]
pub enum Predicate {
    /// Some input or output step is enabled.
    External,
    /// The given action is enabled.
    Enabled(Action),
    /// An `omega` step is enabled.
    Success,
    Custom {
        name: String,
        member: Arc<dyn Fn(&Term) -> bool + Send + Sync>,
    },
}

impl Predicate {
    pub fn input(c: Channel) -> Predicate {
        Predicate::Enabled(Action::Input(c))
    }

    /// Parses `psiL`, `psi:a`, `psi:~a` or `psiOmega`.
    pub fn parse(text: &str) -> Result<Predicate> {
        match text {
            "psiL" => Ok(Predicate::External),
            "psiOmega" => Ok(Predicate::Success),
            _ => match text.strip_prefix("psi:") {
                Some(act) => {
                    let a = Action::parse(act)?;
                    if !a.is_external() {
                        return Err(Error::Format(format!("`{act}` is not a channel action")));
                    }
                    Ok(Predicate::Enabled(a))
                }
                None => Err(Error::Format(format!("unknown predicate `{text}`"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Predicate::External => "psiL".into(),
            Predicate::Success => "psiOmega".into(),
            Predicate::Enabled(a) => format!("psi:{a}"),
            Predicate::Custom { name, .. } => name.clone(),
        }
    }

    fn holds_for_enabled(&self, enabled: &BTreeSet<Action>, term: &Term) -> bool {
        match self {
            Predicate::External => enabled.iter().any(Action::is_external),
            Predicate::Enabled(a) => enabled.contains(a),
            Predicate::Success => enabled.contains(&Action::Omega),
            Predicate::Custom { member, .. } => member(term),
        }
    }

    /// Membership of a single process, by deriving its steps.
    pub fn holds(&self, p: &Term, cfg: &ExploreConfig) -> Result<bool> {
        if let Predicate::Custom { member, .. } = self {
            return Ok(member(p));
        }
        let derived = derive_steps(p, cfg.max_unfold_depth)?;
        let enabled: BTreeSet<Action> = derived.steps.into_iter().map(|(a, _)| a).collect();
        Ok(self.holds_for_enabled(&enabled, p))
    }

    /// Membership of state `i`, using the actions recorded during exploration.
    pub fn holds_in(&self, g: &ProcessGraph, i: usize) -> bool {
        self.holds_for_enabled(g.enabled(i), g.state(i))
    }

    pub fn indicator(&self, g: &ProcessGraph) -> Vec<Rational> {
        (0..g.len())
            .map(|i| {
                if self.holds_in(g, i) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `mu(phi)`.
pub fn mass(mu: &Dist, phi: &Predicate, cfg: &ExploreConfig) -> Result<Rational> {
    mu.try_mass_where(|t| phi.holds(t, cfg))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Method {
    BellmanExact,
    BruteForce { depth: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharResult {
    pub value: Rational,
    pub method: Method,
    /// Value of every explored process.
    pub per_state: BTreeMap<Term, Rational>,
}

/// The convex set of outcomes is determined by its end points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeBounds {
    #[serde(with = "serde_fraction")]
    pub inf: Rational,
    #[serde(with = "serde_fraction")]
    pub sup: Rational,
}

/// The graph of `mu`'s support restricted to `tau`-moves, required to be complete.
pub fn internal_graph(mu: &Dist, cfg: &ExploreConfig) -> Result<ProcessGraph> {
    let g = explore_dist(mu, &cfg.internal())?;
    g.ensure_complete()?;
    Ok(g)
}

fn combine(g: &ProcessGraph, mu: &Dist, values: Vec<Rational>) -> Result<CharResult> {
    let mut value = Rational::zero();
    for (t, w) in mu.iter() {
        value += w * &values[g.require(t)?];
    }
    let per_state = g.states().iter().cloned().zip(values).collect();
    Ok(CharResult {
        value,
        method: Method::BellmanExact,
        per_state,
    })
}

/// Per-state may values on an already explored graph.
pub fn may_values(g: &ProcessGraph, phi: &Predicate) -> Result<Vec<Rational>> {
    optimal_stopping(g, &phi.indicator(g), Sense::Max)
}

/// Per-state fair values on an already explored graph.
pub fn fair_values(g: &ProcessGraph, phi: &Predicate) -> Result<Vec<Rational>> {
    let may = may_values(g, phi)?;
    optimal_stopping(g, &may, Sense::Min)
}

/// Per-state infimum of the outcomes.
pub fn inf_values(g: &ProcessGraph, phi: &Predicate) -> Result<Vec<Rational>> {
    optimal_stopping(g, &phi.indicator(g), Sense::Min)
}

/// Supremum of the outcomes reachable from `mu`.
pub fn chi_may(mu: &Dist, phi: &Predicate, cfg: &ExploreConfig) -> Result<CharResult> {
    let g = internal_graph(mu, cfg)?;
    let values = may_values(&g, phi)?;
    combine(&g, mu, values)
}

/// Worst case, over reachable distributions, of the may value.
pub fn chi_fair(mu: &Dist, phi: &Predicate, cfg: &ExploreConfig) -> Result<CharResult> {
    let g = internal_graph(mu, cfg)?;
    let values = fair_values(&g, phi)?;
    combine(&g, mu, values)
}

pub fn chi_inf(mu: &Dist, phi: &Predicate, cfg: &ExploreConfig) -> Result<CharResult> {
    let g = internal_graph(mu, cfg)?;
    let values = inf_values(&g, phi)?;
    combine(&g, mu, values)
}

pub fn outcome_bounds(mu: &Dist, phi: &Predicate, cfg: &ExploreConfig) -> Result<OutcomeBounds> {
    let g = internal_graph(mu, cfg)?;
    let sup = combine(&g, mu, may_values(&g, phi)?)?.value;
    let inf = combine(&g, mu, inf_values(&g, phi)?)?.value;
    Ok(OutcomeBounds { inf, sup })
}

/// Heuristic attainment of the end points: whether the degenerate
/// enumeration up to `depth` already reaches them. `false` may mean the
/// depth was too small.
pub fn attained_within(mu: &Dist, phi: &Predicate, depth: usize, cfg: &ExploreConfig) -> Result<(bool, bool)> {
    let bounds = outcome_bounds(mu, phi, cfg)?;
    let lo = brute_force_chi(mu, phi, depth, BruteMode::Inf, cfg)?;
    let hi = brute_force_chi(mu, phi, depth, BruteMode::May, cfg)?;
    Ok((lo == bounds.inf, hi == bounds.sup))
}

/// `sum_{a in L} a.omega + sum_{a in L} ~a.omega`.
pub fn build_o_l(channels: &BTreeSet<Channel>) -> Term {
    let omega = Term::prefix(Action::Omega, Term::nil());
    let mut summands: Vec<(Action, Term)> = channels
        .iter()
        .map(|c| (Action::Input(c.clone()), omega.clone()))
        .collect();
    summands.extend(channels.iter().map(|c| (Action::Output(c.clone()), omega.clone())));
    Term::sum(summands).unwrap_or_else(|_| Term::nil())
}

pub fn chi_may_omega(mu: &Dist, observer: &Dist, cfg: &ExploreConfig) -> Result<CharResult> {
    chi_may(&mu.compose(observer), &Predicate::Success, cfg)
}

pub fn chi_fair_omega(mu: &Dist, observer: &Dist, cfg: &ExploreConfig) -> Result<CharResult> {
    chi_fair(&mu.compose(observer), &Predicate::Success, cfg)
}

fn check_cover(mu: &Dist, channels: &BTreeSet<Channel>) -> Result<()> {
    if let Some(c) = mu.channels().difference(channels).next() {
        return Err(Error::Format(format!("channel `{c}` of the distribution is not in the given set")));
    }
    Ok(())
}

/// `(L)(mu | Q)` with `Q = sum_{a in L} a + sum_{a in L} ~a + b`.
pub fn seq_transform(mu: &Dist, channels: &BTreeSet<Channel>, fresh: &Channel) -> Result<Dist> {
    if channels.contains(fresh) {
        return Err(Error::Freshness(fresh.to_string()));
    }
    check_cover(mu, channels)?;
    let mut summands: Vec<(Action, Term)> = channels
        .iter()
        .map(|c| (Action::Input(c.clone()), Term::nil()))
        .collect();
    summands.extend(channels.iter().map(|c| (Action::Output(c.clone()), Term::nil())));
    summands.push((Action::Input(fresh.clone()), Term::nil()));
    let partner = Term::sum(summands)?;
    Ok(mu.compose(&Dist::dirac(partner)?).localize(channels))
}

/// `(L)(mu[omega -> a])`.
pub fn omega_eliminate(mu: &Dist, channels: &BTreeSet<Channel>, fresh: &Channel) -> Result<Dist> {
    if channels.contains(fresh) {
        return Err(Error::Freshness(fresh.to_string()));
    }
    check_cover(mu, channels)?;
    Ok(mu.rename_omega(fresh).localize(channels))
}
