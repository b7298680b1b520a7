//! Finite-support distributions over processes and the lifted operations on them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, to_fraction_string, Rational};
use crate::syntax::{parse, Channel, Mode, RenamingFn, Term, Var};

/// Probability distribution with exact weights; every weight is positive and they sum to one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist {
    weights: BTreeMap<Term, Rational>,
}

impl Dist {
    pub fn dirac(p: Term) -> Result<Dist> {
        p.ensure_process()?;
        let mut weights = BTreeMap::new();
        weights.insert(p, Rational::one());
        Ok(Dist { weights })
    }

    /// Builds a distribution, merging repeated terms and dropping zero weights.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Term, Rational)>) -> Result<Dist> {
        let mut weights: BTreeMap<Term, Rational> = BTreeMap::new();
        for (t, w) in pairs {
            if w.is_negative() {
                return Err(Error::Weight(format!("negative weight {w}")));
            }
            if w.is_zero() {
                continue;
            }
            t.ensure_process()?;
            *weights.entry(t).or_insert_with(Rational::zero) += w;
        }
        let total: Rational = weights.values().sum();
        if !total.is_one() {
            return Err(Error::Weight(format!("distribution sums to {total}")));
        }
        Ok(Dist { weights })
    }

    pub fn prob(&self, t: &Term) -> Rational {
        self.weights.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.weights.contains_key(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.weights.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.weights.keys()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_dirac(&self) -> Option<&Term> {
        if self.weights.len() == 1 {
            self.weights.keys().next()
        } else {
            None
        }
    }

    /// Total weight of the support elements satisfying `member`.
    pub fn mass_where(&self, mut member: impl FnMut(&Term) -> bool) -> Rational {
        self.weights
            .iter()
            .filter(|(t, _)| member(t))
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// Fallible variant of [`Dist::mass_where`].
    pub fn try_mass_where(&self, mut member: impl FnMut(&Term) -> Result<bool>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (t, w) in &self.weights {
            if member(t)? {
                total += w;
            }
        }
        Ok(total)
    }

    fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Dist {
        let mut weights: BTreeMap<Term, Rational> = BTreeMap::new();
        for (t, w) in &self.weights {
            *weights.entry(f(t)).or_insert_with(Rational::zero) += w;
        }
        Dist { weights }
    }

    /// Product distribution over `A | B`.
    pub fn compose(&self, other: &Dist) -> Dist {
        let mut weights: BTreeMap<Term, Rational> = BTreeMap::new();
        for (a, wa) in &self.weights {
            for (b, wb) in &other.weights {
                *weights
                    .entry(Term::par(a.clone(), b.clone()))
                    .or_insert_with(Rational::zero) += wa * wb;
            }
        }
        Dist { weights }
    }

    pub fn localize(&self, channels: &BTreeSet<Channel>) -> Dist {
        self.map_terms(|t| Term::restrict(channels.clone(), t.clone()))
    }

    pub fn rename(&self, f: &RenamingFn) -> Dist {
        self.map_terms(|t| t.rename(f))
    }

    pub fn rename_omega(&self, to: &Channel) -> Dist {
        self.map_terms(|t| t.rename_omega(to))
    }

    pub fn channels(&self) -> BTreeSet<Channel> {
        self.weights.keys().flat_map(|t| t.channels()).collect()
    }

    pub fn to_signed(&self) -> SignedMeasure {
        SignedMeasure {
            weights: self.weights.clone(),
        }
    }

    pub fn to_json(&self) -> DistJson {
        DistJson {
            dist: self
                .weights
                .iter()
                .map(|(t, w)| DistEntry {
                    term: t.to_string(),
                    p: to_fraction_string(w),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &DistJson) -> Result<Dist> {
        let mut pairs = Vec::with_capacity(json.dist.len());
        for entry in &json.dist {
            pairs.push((parse(&entry.term, Mode::Observer)?, parse_rational(&entry.p)?));
        }
        Dist::from_pairs(pairs)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (t, w)) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t} : {}", to_fraction_string(w))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistEntry {
    pub term: String,
    pub p: String,
}

/// File encoding of a distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistJson {
    pub dist: Vec<DistEntry>,
}

/// Pointwise `sum p_i * mu_i`.
pub fn convex_combine(parts: &[(Rational, Dist)]) -> Result<Dist> {
    let mut total = Rational::zero();
    let mut weights: BTreeMap<Term, Rational> = BTreeMap::new();
    for (p, mu) in parts {
        if p.is_negative() || *p > Rational::one() {
            return Err(Error::Weight(format!("coefficient {p} is not a probability")));
        }
        total += p;
        if p.is_zero() {
            continue;
        }
        for (t, w) in &mu.weights {
            *weights.entry(t.clone()).or_insert_with(Rational::zero) += p * w;
        }
    }
    if !total.is_one() {
        return Err(Error::Weight(format!("coefficients sum to {total}")));
    }
    Ok(Dist { weights })
}

/// Substitutes `bindings` into every branch of a weighted family of open terms.
pub fn subst_dist(branches: &[(Rational, Term)], bindings: &BTreeMap<Var, Term>) -> Result<Dist> {
    let mut pairs = Vec::with_capacity(branches.len());
    for (w, t) in branches {
        pairs.push((t.substitute(bindings)?, w.clone()));
    }
    Dist::from_pairs(pairs)
}

/// Finite measure with arbitrary signs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignedMeasure {
    weights: BTreeMap<Term, Rational>,
}

impl SignedMeasure {
    pub fn add(&mut self, t: &Term, w: &Rational) {
        if w.is_zero() {
            return;
        }
        let entry = self.weights.entry(t.clone()).or_insert_with(Rational::zero);
        *entry += w;
        if entry.is_zero() {
            self.weights.remove(t);
        }
    }

    /// `self += scale * mu`.
    pub fn add_scaled(&mut self, mu: &Dist, scale: &Rational) {
        for (t, w) in &mu.weights {
            self.add(t, &(w * scale));
        }
    }

    pub fn difference(a: &Dist, b: &Dist) -> SignedMeasure {
        let mut g = a.to_signed();
        g.add_scaled(b, &-Rational::one());
        g
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.weights.iter()
    }

    /// Checks the distribution invariants.
    pub fn into_dist(self) -> Result<Dist> {
        Dist::from_pairs(self.weights)
    }
}

/// Equivalence classes over an explored universe of processes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<Term>>,
    index: HashMap<Term, usize>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<Term>>) -> Result<Partition> {
        let mut index = HashMap::new();
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Format(format!("block {i} is empty")));
            }
            for t in block {
                if index.insert(t.clone(), i).is_some() {
                    return Err(Error::Format(format!("`{t}` occurs in two blocks")));
                }
            }
        }
        Ok(Partition { blocks, index })
    }

    /// Each term in its own block.
    pub fn discrete(universe: impl IntoIterator<Item = Term>) -> Partition {
        let mut blocks: Vec<Vec<Term>> = Vec::new();
        let mut index = HashMap::new();
        for t in universe {
            if !index.contains_key(&t) {
                index.insert(t.clone(), blocks.len());
                blocks.push(vec![t]);
            }
        }
        Partition { blocks, index }
    }

    pub fn blocks(&self) -> &[Vec<Term>] {
        &self.blocks
    }

    pub fn block_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    fn require(&self, t: &Term) -> Result<usize> {
        self.block_of(t).ok_or_else(|| Error::UnknownState(t.to_string()))
    }

    pub fn same_block(&self, a: &Term, b: &Term) -> Result<bool> {
        Ok(self.require(a)? == self.require(b)?)
    }

    /// Mass of `mu` per block, as a sparse map.
    pub fn block_masses(&self, mu: &Dist) -> Result<BTreeMap<usize, Rational>> {
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        for (t, w) in mu.iter() {
            *out.entry(self.require(t)?).or_insert_with(Rational::zero) += w;
        }
        Ok(out)
    }

    /// `sum over blocks C of |g(C)|`.
    pub fn e_norm(&self, g: &SignedMeasure) -> Result<Rational> {
        let mut per_block: BTreeMap<usize, Rational> = BTreeMap::new();
        for (t, w) in g.iter() {
            *per_block.entry(self.require(t)?).or_insert_with(Rational::zero) += w;
        }
        Ok(per_block.values().map(|v| v.abs()).sum())
    }

    /// `mu1(C) = mu2(C)` for every block `C`.
    pub fn lifted_equal(&self, mu1: &Dist, mu2: &Dist) -> Result<bool> {
        Ok(self.block_masses(mu1)? == self.block_masses(mu2)?)
    }
}
