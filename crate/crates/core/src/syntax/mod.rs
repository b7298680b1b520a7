//! Terms of RCCS and its observer extension.
//!
//! A [`Term`] is an immutable, reference-counted syntax tree. Equality and
//! ordering are structural; nothing is normalized except that restricting an
//! empty channel set yields the body unchanged.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub use parse::{parse, parse_process, Mode};

const RESERVED: [&str; 4] = ["tau", "omega", "mu", "restrict"];

fn valid_lower(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn valid_upper(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// A communication channel name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel(Arc<str>);

impl Channel {
    pub fn new(name: &str) -> Result<Self> {
        if RESERVED.contains(&name) {
            return Err(Error::ReservedName(name.to_string()));
        }
        if !valid_lower(name) {
            return Err(Error::Syntax {
                position: 0,
                expected: format!("lowercase channel name, found `{name}`"),
            });
        }
        Ok(Channel(name.into()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A process variable bound by `mu`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Result<Self> {
        if !valid_upper(name) {
            return Err(Error::Syntax {
                position: 0,
                expected: format!("uppercase variable name, found `{name}`"),
            });
        }
        Ok(Var(name.into()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Action {
    Input(Channel),
    Output(Channel),
    Tau,
    /// Success marker; only present in observer terms.
    Omega,
}

impl Action {
    pub fn complement(&self) -> Option<Action> {
        match self {
            Action::Input(c) => Some(Action::Output(c.clone())),
            Action::Output(c) => Some(Action::Input(c.clone())),
            Action::Tau | Action::Omega => None,
        }
    }

    pub fn channel(&self) -> Option<&Channel> {
        match self {
            Action::Input(c) | Action::Output(c) => Some(c),
            Action::Tau | Action::Omega => None,
        }
    }

    /// Input or output on a channel.
    pub fn is_external(&self) -> bool {
        self.channel().is_some()
    }

    /// Parses the printed form (`a`, `~a`, `tau`, `omega`).
    pub fn parse(text: &str) -> Result<Action> {
        match text {
            "tau" => Ok(Action::Tau),
            "omega" => Ok(Action::Omega),
            _ => match text.strip_prefix('~') {
                Some(name) => Ok(Action::Output(Channel::new(name)?)),
                None => Ok(Action::Input(Channel::new(text)?)),
            },
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Input(c) => write!(f, "{c}"),
            Action::Output(c) => write!(f, "~{c}"),
            Action::Tau => f.write_str("tau"),
            Action::Omega => f.write_str("omega"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TermKind {
    Nil,
    Var(Var),
    /// Nondeterministic choice over prefixed terms; never empty.
    Sum(Vec<(Action, Term)>),
    /// Probabilistic choice; every branch is implicitly `tau`-prefixed.
    PSum(Vec<(Rational, Term)>),
    Par(Term, Term),
    Restrict(BTreeSet<Channel>, Term),
    Fix(Var, Term),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term(Arc<TermKind>);

/// A finite partial map on channels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenamingFn {
    pub mapping: BTreeMap<Channel, Channel>,
}

impl RenamingFn {
    pub fn new(pairs: impl IntoIterator<Item = (Channel, Channel)>) -> Self {
        RenamingFn {
            mapping: pairs.into_iter().collect(),
        }
    }

    fn apply(&self, c: &Channel) -> Channel {
        self.mapping.get(c).cloned().unwrap_or_else(|| c.clone())
    }
}

impl Term {
    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    fn from_kind(kind: TermKind) -> Term {
        Term(Arc::new(kind))
    }

    pub fn nil() -> Term {
        Term::from_kind(TermKind::Nil)
    }

    pub fn var(v: Var) -> Term {
        Term::from_kind(TermKind::Var(v))
    }

    pub fn prefix(action: Action, cont: Term) -> Term {
        Term::from_kind(TermKind::Sum(vec![(action, cont)]))
    }

    pub fn sum(summands: Vec<(Action, Term)>) -> Result<Term> {
        if summands.is_empty() {
            return Err(Error::Format("a sum needs at least one summand".into()));
        }
        Ok(Term::from_kind(TermKind::Sum(summands)))
    }

    /// Checked constructor: weights in (0,1) summing to exactly one.
    pub fn psum(branches: Vec<(Rational, Term)>) -> Result<Term> {
        if branches.is_empty() {
            return Err(Error::Weight("probabilistic choice needs a branch".into()));
        }
        let mut total = Rational::zero();
        for (w, _) in &branches {
            if *w <= Rational::zero() || *w >= Rational::one() {
                return Err(Error::Weight(format!("weight {w} is not strictly between 0 and 1")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::Weight(format!("weights sum to {total}, not 1")));
        }
        Ok(Term::from_kind(TermKind::PSum(branches)))
    }

    pub fn par(left: Term, right: Term) -> Term {
        Term::from_kind(TermKind::Par(left, right))
    }

    /// `(L)t`; an empty `L` returns `t` itself.
    pub fn restrict(channels: BTreeSet<Channel>, body: Term) -> Term {
        if channels.is_empty() {
            return body;
        }
        Term::from_kind(TermKind::Restrict(channels, body))
    }

    pub fn fix(var: Var, body: Term) -> Term {
        Term::from_kind(TermKind::Fix(var, body))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self.kind() {
            TermKind::Nil => {}
            TermKind::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            TermKind::Sum(items) => items.iter().for_each(|(_, t)| t.collect_free(bound, out)),
            TermKind::PSum(items) => items.iter().for_each(|(_, t)| t.collect_free(bound, out)),
            TermKind::Par(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            TermKind::Restrict(_, t) => t.collect_free(bound, out),
            TermKind::Fix(v, t) => {
                bound.push(v.clone());
                t.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// A process is a term without free variables.
    pub fn is_process(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn ensure_process(&self) -> Result<()> {
        let free = self.free_vars();
        if free.is_empty() {
            Ok(())
        } else {
            let names: Vec<_> = free.iter().map(|v| v.to_string()).collect();
            Err(Error::OpenTerm(names.join(", ")))
        }
    }

    /// Every channel occurring in the term, global or local.
    pub fn channels(&self) -> BTreeSet<Channel> {
        let mut out = BTreeSet::new();
        self.collect_channels(&mut out);
        out
    }

    fn collect_channels(&self, out: &mut BTreeSet<Channel>) {
        match self.kind() {
            TermKind::Nil | TermKind::Var(_) => {}
            TermKind::Sum(items) => {
                for (a, t) in items {
                    if let Some(c) = a.channel() {
                        out.insert(c.clone());
                    }
                    t.collect_channels(out);
                }
            }
            TermKind::PSum(items) => items.iter().for_each(|(_, t)| t.collect_channels(out)),
            TermKind::Par(l, r) => {
                l.collect_channels(out);
                r.collect_channels(out);
            }
            TermKind::Restrict(ls, t) => {
                out.extend(ls.iter().cloned());
                t.collect_channels(out);
            }
            TermKind::Fix(_, t) => t.collect_channels(out),
        }
    }

    /// True iff every `mu`-bound variable occurs only under an action prefix.
    pub fn is_guarded(&self) -> bool {
        self.guarded_in(&mut Vec::new())
    }

    // `unguarded` holds the bound variables not yet under a prefix.
    fn guarded_in(&self, unguarded: &mut Vec<Var>) -> bool {
        match self.kind() {
            TermKind::Nil => true,
            TermKind::Var(v) => !unguarded.contains(v),
            TermKind::Sum(items) => {
                let saved = std::mem::take(unguarded);
                let ok = items.iter().all(|(_, t)| t.guarded_in(unguarded));
                *unguarded = saved;
                ok
            }
            TermKind::PSum(items) => {
                let saved = std::mem::take(unguarded);
                let ok = items.iter().all(|(_, t)| t.guarded_in(unguarded));
                *unguarded = saved;
                ok
            }
            TermKind::Par(l, r) => l.guarded_in(unguarded) && r.guarded_in(unguarded),
            TermKind::Restrict(_, t) => t.guarded_in(unguarded),
            TermKind::Fix(v, t) => {
                unguarded.push(v.clone());
                let ok = t.guarded_in(unguarded);
                unguarded.pop();
                ok
            }
        }
    }

    pub fn contains_psum(&self) -> bool {
        match self.kind() {
            TermKind::Nil | TermKind::Var(_) => false,
            TermKind::PSum(_) => true,
            TermKind::Sum(items) => items.iter().any(|(_, t)| t.contains_psum()),
            TermKind::Par(l, r) => l.contains_psum() || r.contains_psum(),
            TermKind::Restrict(_, t) | TermKind::Fix(_, t) => t.contains_psum(),
        }
    }

    pub fn contains_omega(&self) -> bool {
        match self.kind() {
            TermKind::Nil | TermKind::Var(_) => false,
            TermKind::Sum(items) => items
                .iter()
                .any(|(a, t)| *a == Action::Omega || t.contains_omega()),
            TermKind::PSum(items) => items.iter().any(|(_, t)| t.contains_omega()),
            TermKind::Par(l, r) => l.contains_omega() || r.contains_omega(),
            TermKind::Restrict(_, t) | TermKind::Fix(_, t) => t.contains_omega(),
        }
    }

    /// Capture-avoiding simultaneous substitution of closed terms.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Term>) -> Result<Term> {
        for (v, t) in bindings {
            if !t.is_process() {
                return Err(Error::OpenSubstituent(v.to_string()));
            }
        }
        Ok(self.subst_closed(bindings))
    }

    /// `self{value/var}` with `value` known to be closed.
    pub(crate) fn subst_one(&self, var: &Var, value: &Term) -> Term {
        match self.kind() {
            TermKind::Nil => self.clone(),
            TermKind::Var(v) => {
                if v == var {
                    value.clone()
                } else {
                    self.clone()
                }
            }
            TermKind::Sum(items) => Term::from_kind(TermKind::Sum(
                items
                    .iter()
                    .map(|(a, t)| (a.clone(), t.subst_one(var, value)))
                    .collect(),
            )),
            TermKind::PSum(items) => Term::from_kind(TermKind::PSum(
                items
                    .iter()
                    .map(|(w, t)| (w.clone(), t.subst_one(var, value)))
                    .collect(),
            )),
            TermKind::Par(l, r) => Term::par(l.subst_one(var, value), r.subst_one(var, value)),
            TermKind::Restrict(ls, t) => {
                Term::from_kind(TermKind::Restrict(ls.clone(), t.subst_one(var, value)))
            }
            TermKind::Fix(v, t) => {
                if v == var {
                    self.clone()
                } else {
                    Term::fix(v.clone(), t.subst_one(var, value))
                }
            }
        }
    }

    fn subst_closed(&self, bindings: &BTreeMap<Var, Term>) -> Term {
        if bindings.is_empty() {
            return self.clone();
        }
        match self.kind() {
            TermKind::Nil => self.clone(),
            TermKind::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            TermKind::Sum(items) => Term::from_kind(TermKind::Sum(
                items
                    .iter()
                    .map(|(a, t)| (a.clone(), t.subst_closed(bindings)))
                    .collect(),
            )),
            TermKind::PSum(items) => Term::from_kind(TermKind::PSum(
                items
                    .iter()
                    .map(|(w, t)| (w.clone(), t.subst_closed(bindings)))
                    .collect(),
            )),
            TermKind::Par(l, r) => Term::par(l.subst_closed(bindings), r.subst_closed(bindings)),
            TermKind::Restrict(ls, t) => {
                Term::from_kind(TermKind::Restrict(ls.clone(), t.subst_closed(bindings)))
            }
            TermKind::Fix(v, t) => {
                if bindings.contains_key(v) {
                    let mut inner = bindings.clone();
                    inner.remove(v);
                    Term::fix(v.clone(), t.subst_closed(&inner))
                } else {
                    Term::fix(v.clone(), t.subst_closed(bindings))
                }
            }
        }
    }

    /// One unfolding of a recursion: `T{mu X.T / X}`. Returns `None` for non-`Fix` terms.
    pub fn unfold(&self) -> Option<Term> {
        match self.kind() {
            TermKind::Fix(v, body) => Some(body.subst_one(v, self)),
            _ => None,
        }
    }

    /// Renames global occurrences of channels; restricted names are left alone.
    pub fn rename(&self, f: &RenamingFn) -> Term {
        self.map_actions(&mut |a, local| match a {
            Action::Input(c) if !local.contains(c) => Action::Input(f.apply(c)),
            Action::Output(c) if !local.contains(c) => Action::Output(f.apply(c)),
            other => other.clone(),
        })
    }

    /// `t[omega -> a]`: every success prefix becomes an input on `a`.
    pub fn rename_omega(&self, to: &Channel) -> Term {
        self.map_actions(&mut |a, _| match a {
            Action::Omega => Action::Input(to.clone()),
            other => other.clone(),
        })
    }

    fn map_actions(&self, f: &mut impl FnMut(&Action, &BTreeSet<Channel>) -> Action) -> Term {
        self.map_actions_in(f, &BTreeSet::new())
    }

    fn map_actions_in(
        &self,
        f: &mut impl FnMut(&Action, &BTreeSet<Channel>) -> Action,
        local: &BTreeSet<Channel>,
    ) -> Term {
        match self.kind() {
            TermKind::Nil | TermKind::Var(_) => self.clone(),
            TermKind::Sum(items) => Term::from_kind(TermKind::Sum(
                items
                    .iter()
                    .map(|(a, t)| (f(a, local), t.map_actions_in(f, local)))
                    .collect(),
            )),
            TermKind::PSum(items) => Term::from_kind(TermKind::PSum(
                items
                    .iter()
                    .map(|(w, t)| (w.clone(), t.map_actions_in(f, local)))
                    .collect(),
            )),
            TermKind::Par(l, r) => Term::par(l.map_actions_in(f, local), r.map_actions_in(f, local)),
            TermKind::Restrict(ls, t) => {
                let mut inner = local.clone();
                inner.extend(ls.iter().cloned());
                Term::from_kind(TermKind::Restrict(ls.clone(), t.map_actions_in(f, &inner)))
            }
            TermKind::Fix(v, t) => Term::fix(v.clone(), t.map_actions_in(f, local)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", print::print(self))
    }
}

/// Canonical concrete syntax of a term.
pub fn print(t: &Term) -> String {
    print::print(t)
}

/// Convenience for channel sets in tests and builders.
pub fn channel_set<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<BTreeSet<Channel>> {
    names.into_iter().map(Channel::new).collect()
}
