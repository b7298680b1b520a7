//! Seeded pseudo-random terms for property tests and benchmarks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::plts::{explore, ExploreConfig};
use crate::rational::{ratio, Rational};
use crate::syntax::{Action, Channel, Term, Var};

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    /// Upper bound on reachable states per term.
    pub max_states: usize,
    /// Syntactic nesting bound of the generator.
    pub max_depth: usize,
    /// Leave out probabilistic choice.
    pub classical: bool,
    /// Allow `omega` prefixes, producing observers.
    pub observers: bool,
    pub channels: Vec<String>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 7,
            count: 500,
            max_states: 40,
            max_depth: 5,
            classical: false,
            observers: false,
            channels: vec!["a".into(), "b".into(), "c".into()],
        }
    }
}

struct Generator {
    rng: ChaCha8Rng,
    channels: Vec<Channel>,
    classical: bool,
    observers: bool,
    var: Var,
}

impl Generator {
    fn action(&mut self) -> Action {
        let roll = self.rng.gen_range(0..10);
        if roll < 3 {
            return Action::Tau;
        }
        if self.observers && roll == 3 {
            return Action::Omega;
        }
        let c = self.channels.choose(&mut self.rng).expect("channels").clone();
        if self.rng.gen_bool(0.5) {
            Action::Input(c)
        } else {
            Action::Output(c)
        }
    }

    fn weight(&mut self) -> Rational {
        [ratio(1, 2), ratio(1, 3), ratio(2, 3), ratio(1, 4), ratio(3, 4)]
            .choose(&mut self.rng)
            .expect("weights")
            .clone()
    }

    // `bound`: a recursion variable is in scope; `guarded`: it may occur here.
    fn term(&mut self, depth: usize, bound: bool, guarded: bool) -> Term {
        if depth == 0 {
            return if bound && guarded && self.rng.gen_bool(0.7) {
                Term::var(self.var.clone())
            } else {
                Term::nil()
            };
        }
        let choices = if self.classical { 8 } else { 10 };
        match self.rng.gen_range(0..choices) {
            0 if bound && guarded => Term::var(self.var.clone()),
            0 => Term::nil(),
            1..=4 => {
                let a = self.action();
                Term::prefix(a, self.term(depth - 1, bound, true))
            }
            5 => {
                let first = (self.action(), self.term(depth - 1, bound, true));
                let second = (self.action(), self.term(depth - 1, bound, true));
                Term::sum(vec![first, second]).expect("two summands")
            }
            6 => {
                // recursion under parallel composition tends to explode
                Term::par(self.term(depth - 1, false, guarded), self.term(depth - 1, false, guarded))
            }
            7 => {
                if !bound {
                    Term::fix(self.var.clone(), self.term(depth - 1, true, false))
                } else {
                    let c = self.channels.choose(&mut self.rng).expect("channels").clone();
                    Term::restrict(BTreeSet::from([c]), self.term(depth - 1, bound, guarded))
                }
            }
            _ => {
                let w = self.weight();
                let left = self.term(depth - 1, bound, true);
                let right = self.term(depth - 1, bound, true);
                Term::psum(vec![(w.clone(), left), (crate::rational::one() - w, right)]).expect("weights sum to one")
            }
        }
    }
}

/// Distinct closed guarded terms with at most `max_states` reachable states,
/// in generation order. Stops after a bounded number of attempts.
pub fn generate_corpus(cfg: &CorpusConfig) -> Vec<Term> {
    let mut gen = Generator {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        channels: cfg.channels.iter().map(|c| Channel::new(c).expect("valid channel name")).collect(),
        classical: cfg.classical,
        observers: cfg.observers,
        var: Var::new("X").expect("valid variable"),
    };
    let explore_cfg = ExploreConfig {
        max_states: cfg.max_states,
        ..ExploreConfig::default()
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < cfg.count && attempts < cfg.count * 50 {
        attempts += 1;
        let depth = gen.rng.gen_range(2..=cfg.max_depth.max(2));
        let t = if gen.rng.gen_bool(0.4) {
            Term::fix(gen.var.clone(), gen.term(depth - 1, true, false))
        } else {
            gen.term(depth, false, false)
        };
        if !t.is_process() || !t.is_guarded() || seen.contains(&t) {
            continue;
        }
        let Ok(g) = explore(&t, &explore_cfg) else { continue };
        if g.truncated() || g.len() > cfg.max_states {
            continue;
        }
        // keep a few tiny terms, but mostly larger graphs
        if g.len() < 4 && !gen.rng.gen_bool(0.25) {
            continue;
        }
        seen.insert(t.clone());
        out.push(t);
    }
    out
}

/// The default property-test corpus: 500 terms.
pub fn default_corpus(seed: u64) -> Vec<Term> {
    generate_corpus(&CorpusConfig { seed, ..CorpusConfig::default() })
}

/// 200 terms without probabilistic choice.
pub fn classical_corpus(seed: u64) -> Vec<Term> {
    generate_corpus(&CorpusConfig {
        seed,
        count: 200,
        classical: true,
        ..CorpusConfig::default()
    })
}

/// 200 observers of nesting at most 4 that may use `omega`.
pub fn observer_corpus(seed: u64) -> Vec<Term> {
    generate_corpus(&CorpusConfig {
        seed,
        count: 200,
        max_depth: 4,
        observers: true,
        ..CorpusConfig::default()
    })
}
