#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rccs_core::distribution::Dist;
use rccs_core::plts::{StepCache, Witness, WitnessStep};
use rccs_core::rational::ratio;
use rccs_core::syntax::{parse_process, Term};
use rccs_core::Rational;

pub fn term(s: &str) -> Term {
    parse_process(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn dirac(t: &Term) -> Dist {
    Dist::dirac(t.clone()).expect("closed term")
}

pub fn dterm(s: &str) -> Dist {
    dirac(&term(s))
}

/// A random internal witness of length at most `len` from `mu`, with
/// activations drawn from `{1/3, 1/2, 1}`. Stops early when no `tau`-step
/// is available.
pub fn random_witness(mu: &Dist, len: usize, rng: &mut impl Rng, cache: &mut StepCache) -> Witness {
    let activations = [ratio(1, 3), ratio(1, 2), ratio(1, 1)];
    let mut cur = mu.clone();
    let mut steps = Vec::new();
    for _ in 0..len {
        let mut options = Vec::new();
        for p in cur.support() {
            for s in cache.tau_steps(p).expect("finite derivation") {
                options.push(s);
            }
        }
        let Some(choice) = options.choose(rng) else { break };
        let r: Rational = activations.choose(rng).expect("nonempty").clone();
        let w = WitnessStep::new(choice, r);
        cur = apply(&cur, &w);
        steps.push(w);
    }
    Witness { steps }
}

/// `mu + mu(P) * p * (rho - delta_P)` written out independently of the library.
pub fn apply(mu: &Dist, w: &WitnessStep) -> Dist {
    let scale = mu.prob(&w.process) * &w.activation;
    let mut weights: BTreeMap<Term, Rational> = mu.iter().map(|(t, p)| (t.clone(), p.clone())).collect();
    *weights.get_mut(&w.process).expect("process in support") -= &scale;
    for (t, p) in w.target.iter() {
        *weights.entry(t.clone()).or_insert_with(|| ratio(0, 1)) += p * &scale;
    }
    Dist::from_pairs(weights).expect("a step keeps total mass one")
}
