use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use rccs_core::characteristics::{
    brute_force_table, chi_fair, chi_inf, chi_may, outcome_bounds, BruteMode, CharResult, InnerMay, Predicate,
};
use rccs_core::corpus::{generate_corpus, CorpusConfig};
use rccs_core::distribution::{Dist, Partition};
use rccs_core::equivalence::{
    greedy_weak_certificate, replay, strong_bisim, testing_equiv, weak_bisim_verify, ContextClass, Kind,
    TestingOptions, TestingVerdict, WeakBisimCertificate,
};
use rccs_core::plts::{explore_dist, ExploreConfig};
use rccs_core::rational::parse_rational;
use rccs_core::syntax::{Mode, Term};
use rccs_core::{Error as CoreError, Rational};

use crate::error::{exit, CliError, Result};
use crate::input::{load, load_partition, load_term, Input};
use crate::output::{fraction, human, Report};
use crate::{ChiArgs, ChiMode, CompareArgs, CompareKind, ContextArg, OracleArgs, OracleMode, ParseArgs};

/// Weak-bisimulation block merges tried when no partition is given.
const WEAK_SEARCH_ATTEMPTS: usize = 64;

fn mode(allow_omega: bool) -> Mode {
    if allow_omega {
        Mode::Observer
    } else {
        Mode::Process
    }
}

fn term_summary(t: &Term) -> Value {
    json!({
        "term": t.to_string(),
        "closed": t.is_process(),
        "guarded": t.is_guarded(),
        "probabilistic": t.contains_psum(),
        "observer": t.contains_omega(),
        "channels": t.channels().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    })
}

pub fn parse(args: &ParseArgs) -> Result<Report> {
    match load(&args.term, mode(args.allow_omega))? {
        Input::Term(t) => {
            let mut text = format!("{t}\n");
            if !t.is_guarded() {
                text.push_str("warning: unguarded recursion\n");
            }
            Ok(Report::new(term_summary(&t), text))
        }
        Input::Dist(mu) => {
            let json = serde_json::to_value(mu.to_json()).expect("distribution serializes");
            Ok(Report::new(json, format!("{mu}\n")))
        }
    }
}

pub fn graph(args: &ParseArgs, cfg: &ExploreConfig) -> Result<Report> {
    let mu = load(&args.term, mode(args.allow_omega))?.into_dist()?;
    let g = explore_dist(&mu, cfg)?;
    let mut text = String::new();
    for i in 0..g.len() {
        let _ = writeln!(text, "s{i}: {}", g.state(i));
        for s in g.steps(i) {
            let target: Vec<String> = s.target.iter().map(|(j, p)| format!("s{j}:{}", fraction(p))).collect();
            let _ = writeln!(text, "  --{}--> {}", s.action, target.join(" "));
        }
    }
    let mut report = Report::new(g.to_json(), text);
    report.dot = Some(g.to_dot());
    if g.truncated() {
        report.text.push_str(&format!("truncated at {} states\n", g.len()));
        report.status = exit::RESOURCE;
    }
    Ok(report)
}

fn readable(fraction_text: &str) -> String {
    parse_rational(fraction_text).map_or_else(|_| fraction_text.to_string(), |r| human(&r))
}

/// Brute-force rows beside the exact value, with the monotone bound check.
#[derive(Clone, Debug, Serialize)]
pub struct Sandwich {
    pub mode: &'static str,
    /// Row `d` is the oracle value over sequences of length at most `d`.
    pub rows: Vec<String>,
    /// No longer sequence reaches anything new; the remaining rows repeat.
    pub saturated: bool,
    pub bellman: String,
    /// Rows are monotone towards `bellman` and never cross it.
    pub holds: bool,
    /// The last row equals `bellman`.
    pub exact: bool,
    /// Set when the enumeration hit its cap; `rows` is then a prefix.
    pub partial: Option<String>,
}

impl Sandwich {
    fn text(&self) -> String {
        let mut out = format!("oracle ({}):\n", self.mode);
        for (d, r) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "  d={d}: {}", readable(r));
        }
        let _ = writeln!(out, "  bellman: {}", readable(&self.bellman));
        let _ = writeln!(out, "  sandwich holds: {}, exact: {}", self.holds, self.exact);
        if let Some(reason) = &self.partial {
            let _ = writeln!(out, "  partial table: {reason}");
        }
        out
    }

    fn status(&self) -> u8 {
        if !self.holds {
            exit::VERDICT
        } else if self.partial.is_some() {
            exit::RESOURCE
        } else {
            exit::SUCCESS
        }
    }
}

/// Rows for `d = 0..=depth`; on an enumeration cap, the rows computed so far
/// and the error.
fn oracle_rows(
    mu: &Dist,
    phi: &Predicate,
    depth: usize,
    mode: BruteMode,
    cfg: &ExploreConfig,
) -> Result<(Vec<Rational>, bool, Option<String>)> {
    match brute_force_table(mu, phi, depth, mode, cfg) {
        Ok(table) => {
            let rows = (0..=depth).map_while(|d| table.at(d).cloned()).collect();
            Ok((rows, table.saturated, None))
        }
        Err(e @ CoreError::Explosion(_)) => {
            let mut rows = Vec::new();
            for d in 0..=depth {
                match brute_force_table(mu, phi, d, mode, cfg) {
                    Ok(table) => rows.push(table.value().clone()),
                    Err(CoreError::Explosion(_)) => break,
                    Err(other) => return Err(other.into()),
                }
            }
            Ok((rows, false, Some(e.to_string())))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn sandwich(mu: &Dist, phi: &Predicate, mode: OracleMode, depth: usize, cfg: &ExploreConfig) -> Result<Sandwich> {
    let (name, brute, bellman) = match mode {
        OracleMode::May => ("may", BruteMode::May, chi_may(mu, phi, cfg)?.value),
        OracleMode::Inf => ("inf", BruteMode::Inf, chi_inf(mu, phi, cfg)?.value),
        OracleMode::Fair => ("fair", BruteMode::Fair(InnerMay::Exact), chi_fair(mu, phi, cfg)?.value),
    };
    let (rows, saturated, partial) = oracle_rows(mu, phi, depth, brute, cfg)?;
    let increasing = mode == OracleMode::May;
    let ordered = rows.windows(2).all(|w| if increasing { w[0] <= w[1] } else { w[0] >= w[1] });
    let bounded = rows.iter().all(|r| if increasing { *r <= bellman } else { *r >= bellman });
    let exact = rows.last() == Some(&bellman);
    Ok(Sandwich {
        mode: name,
        rows: rows.iter().map(fraction).collect(),
        saturated,
        bellman: fraction(&bellman),
        holds: ordered && bounded && (!saturated || exact),
        exact,
        partial,
    })
}

fn char_json(result: &CharResult) -> Map<String, Value> {
    let per_state: Map<String, Value> = result
        .per_state
        .iter()
        .map(|(t, v)| (t.to_string(), Value::String(fraction(v))))
        .collect();
    let mut out = Map::new();
    out.insert("value".into(), fraction(&result.value).into());
    out.insert("method".into(), serde_json::to_value(&result.method).expect("method serializes"));
    out.insert("per_state".into(), Value::Object(per_state));
    out
}

pub fn chi(args: &ChiArgs, cfg: &ExploreConfig) -> Result<Report> {
    let mut mu = load(&args.term, Mode::Process)?.into_dist()?;
    if let Some(o) = &args.observer {
        mu = mu.compose(&load(o, Mode::Observer)?.into_dist()?);
    }
    let default = if args.observer.is_some() { "psiOmega" } else { "psiL" };
    let phi = Predicate::parse(args.predicate.as_deref().unwrap_or(default))?;

    let mut json = Map::new();
    json.insert("predicate".into(), phi.name().into());
    let mut text = format!("predicate: {}\n", phi.name());
    let mut status = exit::SUCCESS;
    let mut sandwiches = Vec::new();
    match args.mode {
        ChiMode::Bounds => {
            let b = outcome_bounds(&mu, &phi, cfg)?;
            json.insert("inf".into(), fraction(&b.inf).into());
            json.insert("sup".into(), fraction(&b.sup).into());
            let _ = writeln!(text, "inf: {}\nsup: {}", human(&b.inf), human(&b.sup));
            if let Some(depth) = args.oracle_depth {
                sandwiches.push(sandwich(&mu, &phi, OracleMode::Inf, depth, cfg)?);
                sandwiches.push(sandwich(&mu, &phi, OracleMode::May, depth, cfg)?);
            }
        }
        m => {
            let (result, oracle_mode) = match m {
                ChiMode::May => (chi_may(&mu, &phi, cfg)?, OracleMode::May),
                ChiMode::Fair => (chi_fair(&mu, &phi, cfg)?, OracleMode::Fair),
                _ => (chi_inf(&mu, &phi, cfg)?, OracleMode::Inf),
            };
            let _ = writeln!(text, "value: {}", human(&result.value));
            json.extend(char_json(&result));
            if let Some(depth) = args.oracle_depth {
                sandwiches.push(sandwich(&mu, &phi, oracle_mode, depth, cfg)?);
            }
        }
    }
    if !sandwiches.is_empty() {
        for s in &sandwiches {
            text.push_str(&s.text());
            status = status.max(s.status());
        }
        let value = if sandwiches.len() == 1 {
            serde_json::to_value(&sandwiches[0])
        } else {
            serde_json::to_value(&sandwiches)
        };
        json.insert("oracle".into(), value.expect("sandwich serializes"));
    }
    Ok(Report::new(Value::Object(json), text).with_status(status))
}

fn blocks_json(p: &Partition) -> Value {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|t| t.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into()
}

fn certificate_json(cert: &WeakBisimCertificate, p: &Term, q: &Term) -> Value {
    let failures: Vec<_> = cert.failures().collect();
    json!({
        "valid": cert.valid,
        "relates": cert.relates(p, q),
        "blocks": blocks_json(&cert.partition),
        "checked": cert.checks.len(),
        "failures": failures,
    })
}

pub fn compare(args: &CompareArgs, cfg: &ExploreConfig) -> Result<Report> {
    let p = load_term(&args.left, Mode::Process)?;
    let q = load_term(&args.right, Mode::Process)?;
    let partition = args.partition.as_deref().map(load_partition).transpose()?;
    let (json, text, equal) = match args.kind {
        CompareKind::Strong => {
            let r = strong_bisim(&p, &q, cfg)?;
            let json = json!({
                "kind": "strong",
                "related": r.related,
                "states": r.graph.len(),
                "blocks": blocks_json(&r.partition),
            });
            let text = format!("strongly bisimilar: {}\n", r.related);
            (json, text, r.related)
        }
        CompareKind::WeakVerify => {
            let (source, cert) = match &partition {
                Some(part) => ("partition", Some(weak_bisim_verify(part, cfg)?)),
                None => ("greedy", greedy_weak_certificate(&p, &q, WEAK_SEARCH_ATTEMPTS, cfg)?),
            };
            match cert {
                Some(cert) => {
                    let ok = cert.valid && cert.relates(&p, &q);
                    let mut json = certificate_json(&cert, &p, &q);
                    json["kind"] = "weak-verify".into();
                    json["source"] = source.into();
                    let mut text = format!("weak bisimulation ({source}): valid {}, relates {}\n", cert.valid, cert.relates(&p, &q));
                    for f in cert.failures() {
                        let _ = writeln!(text, "  {} --{}--> {} not matched by {}", f.state, f.action, f.target, f.matcher);
                    }
                    (json, text, ok)
                }
                None => {
                    let json = json!({"kind": "weak-verify", "source": source, "valid": false, "relates": false, "certificate": null});
                    (json, "no weak bisimulation found\n".to_string(), false)
                }
            }
        }
        CompareKind::Diamond | CompareKind::Box => {
            let kind = if args.kind == CompareKind::Diamond { Kind::Diamond } else { Kind::Box };
            let class = match args.context {
                ContextArg::Classical => ContextClass::Classical,
                ContextArg::Probabilistic => ContextClass::Probabilistic,
            };
            let opts = TestingOptions {
                budget: args.budget,
                max_observers: args.max_observers,
                partition,
                explore: cfg.clone(),
                ..TestingOptions::default()
            };
            let verdict = testing_equiv(&p, &q, kind, class, &opts)?;
            let mut json = json!({
                "kind": kind,
                "context": class,
                "budget": args.budget,
                "verdict": verdict,
            });
            let mut text = String::new();
            match &verdict {
                TestingVerdict::Distinguished { context, left, right } => {
                    let (l, r) = replay(&p, &q, context, kind, cfg)?;
                    let reproduced = l == *left && r == *right;
                    json["replay"] = json!({"left": fraction(&l), "right": fraction(&r), "reproduced": reproduced});
                    let observer = context.observer.as_deref().unwrap_or("(empty context)");
                    let _ = writeln!(text, "distinguished by {observer} over {{{}}}", context.restricted.join(","));
                    let _ = writeln!(text, "  left:  {}\n  right: {}", human(left), human(right));
                    let _ = writeln!(text, "  replay reproduced: {reproduced}");
                }
                TestingVerdict::Equivalent { reason } => {
                    let _ = writeln!(text, "equivalent ({})", serde_json::to_value(reason).expect("reason serializes"));
                }
                TestingVerdict::Unknown { tried, skipped, .. } => {
                    let _ = writeln!(text, "unknown: {tried} contexts tried, {skipped} skipped");
                }
            }
            (json, text, !verdict.is_distinguished())
        }
    };
    let status = if args.expect_equal && !equal { exit::VERDICT } else { exit::SUCCESS };
    Ok(Report::new(json, text).with_status(status))
}

pub fn oracle(args: &OracleArgs, seed: u64, cfg: &ExploreConfig) -> Result<Report> {
    let mu = match &args.term {
        Some(t) => load(t, Mode::Process)?.into_dist()?,
        None => {
            let drawn = generate_corpus(&CorpusConfig { seed, count: 1, ..CorpusConfig::default() });
            let t = drawn
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Usage(format!("seed {seed} produced no corpus term")))?;
            Dist::dirac(t)?
        }
    };
    let phi = Predicate::parse(&args.predicate)?;
    let s = sandwich(&mu, &phi, args.mode, args.depth, cfg)?;
    let mut json = serde_json::to_value(&s).expect("sandwich serializes");
    json["dist"] = serde_json::to_value(mu.to_json()).expect("distribution serializes");
    json["predicate"] = phi.name().into();
    let text = format!("{mu}\n{}", s.text());
    Ok(Report::new(json, text).with_status(s.status()))
}
