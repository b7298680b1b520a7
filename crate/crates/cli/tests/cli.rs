use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use rccs_core::distribution::DistJson;
use rccs_core::rational::{int, parse_rational};
use rccs_core::Rational;

const Q2: &str = "mu X.(1/3*tau.a (+) 1/3*tau.b (+) 1/3*tau.X)";
const P1: &str = "tau.a";
const P2: &str = "tau.a + tau.(mu X.tau.X)";

fn rccs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rccs"))
        .args(args)
        .env_remove("RCCS_MAX_STATES")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn rat(v: &Value) -> Rational {
    parse_rational(v.as_str().expect("rational string")).unwrap()
}

#[test]
fn bundled_suite_passes() {
    let out = rccs(&["paper"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = json_of(&out);
    let cases = report["cases"].as_array().unwrap();
    assert!(cases.len() >= 40);
    assert_eq!(report["passed"], cases.len());
    let by_id: HashMap<&str, &Value> = cases.iter().map(|c| (c["id"].as_str().unwrap(), c)).collect();
    assert_eq!(by_id["Q2-chi-may-psi-a"]["computed"], "1/2");
    assert_eq!(by_id["Q5Q6-probabilistic-observer"]["computed"], serde_json::json!(["1/1", "1/2"]));
}

#[test]
fn empty_filter_gives_an_empty_passing_report() {
    let out = rccs(&["paper", "--filter", "none"]);
    assert_eq!(code(&out), 0);
    let report = json_of(&out);
    assert_eq!(report["total"], 0);
    assert_eq!(report["cases"], serde_json::json!([]));
}

#[test]
fn suite_is_independent_of_the_seed() {
    let a = rccs(&["paper", "--seed", "1", "--filter", "Q2,P5"]);
    let b = rccs(&["paper", "--seed", "99", "--filter", "Q2,P5"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(json_of(&a)["total"].as_u64().unwrap() > 5);
}

#[test]
fn oracle_table_for_q2() {
    let out = rccs(&["oracle", "--term", Q2, "--predicate", "psi:a", "--depth", "4"]);
    assert_eq!(code(&out), 0);
    let report = json_of(&out);
    let rows: Vec<Rational> = report["rows"].as_array().unwrap().iter().map(rat).collect();
    // (3^k - 1) / (2 * 3^k)
    let expected: Vec<Rational> = (0..=4u32)
        .map(|k| {
            let p = int(3i64.pow(k));
            (&p - int(1)) / (int(2) * &p)
        })
        .collect();
    assert_eq!(rows, expected);
    assert_eq!(rat(&report["bellman"]), int(1) / int(2));
    assert_eq!(report["holds"], true);
    assert_eq!(report["exact"], false);
}

#[test]
fn oracle_table_for_a_single_step() {
    let out = rccs(&["oracle", "--term", "tau.a", "--predicate", "psi:a", "--depth", "2"]);
    assert_eq!(code(&out), 0);
    let report = json_of(&out);
    assert_eq!(report["rows"], serde_json::json!(["0/1", "1/1", "1/1"]));
    assert_eq!(report["bellman"], "1/1");
}

/// Largest reachable chance of an external action, by recursion over an
/// acyclic graph given in the `graph` JSON schema; `None` on a cycle.
fn acyclic_may(graph: &Value) -> Option<Rational> {
    let steps = graph["steps"].as_array().unwrap();
    let n = graph["states"].as_array().unwrap().len();
    let mut out: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    let mut external = vec![false; n];
    let mut taus: Vec<Vec<Vec<(usize, Rational)>>> = vec![Vec::new(); n];
    for s in steps {
        let src = s["src"].as_u64().unwrap() as usize;
        let act = s["act"].as_str().unwrap();
        let target: Vec<(usize, Rational)> = s["target"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| (t["state"].as_u64().unwrap() as usize, rat(&t["p"])))
            .collect();
        if act == "tau" {
            out[src].extend(target.iter().cloned());
            taus[src].push(target);
        } else if act != "omega" {
            external[src] = true;
        }
    }
    fn visit(
        i: usize,
        taus: &[Vec<Vec<(usize, Rational)>>],
        external: &[bool],
        memo: &mut Vec<Option<Rational>>,
        on_stack: &mut Vec<bool>,
    ) -> Option<Rational> {
        if let Some(v) = &memo[i] {
            return Some(v.clone());
        }
        if on_stack[i] {
            return None;
        }
        on_stack[i] = true;
        let mut best = if external[i] { int(1) } else { int(0) };
        for step in &taus[i] {
            let mut v = int(0);
            for (j, p) in step {
                v += p * visit(*j, taus, external, memo, on_stack)?;
            }
            if v > best {
                best = v;
            }
        }
        on_stack[i] = false;
        memo[i] = Some(best.clone());
        Some(best)
    }
    let mut memo = vec![None; n];
    let mut on_stack = vec![false; n];
    visit(0, &taus, &external, &mut memo, &mut on_stack)
}

#[test]
fn random_acyclic_terms_reach_the_exact_value() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let seed = seed.to_string();
        let out = rccs(&["oracle", "--random", "--seed", &seed, "--predicate", "psiL", "--depth", "12"]);
        if code(&out) != 0 {
            continue;
        }
        let report = json_of(&out);
        let term = report["dist"]["dist"][0]["term"].as_str().unwrap().to_string();
        let graph = json_of(&rccs(&["graph", "--term", &term]));
        let Some(expected) = acyclic_may(&graph) else { continue };
        assert_eq!(report["saturated"], true, "{term}");
        let rows = report["rows"].as_array().unwrap();
        assert_eq!(rat(rows.last().unwrap()), expected, "{term}");
        assert_eq!(rat(&report["bellman"]), expected, "{term}");
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} acyclic terms drawn");
}

#[test]
fn graph_json_follows_the_schema() {
    let out = rccs(&["graph", "--term", Q2]);
    assert_eq!(code(&out), 0);
    let g = json_of(&out);
    assert_eq!(g["states"].as_array().unwrap().len(), 4);
    let steps = g["steps"].as_array().unwrap();
    let from_root: Vec<&Value> = steps.iter().filter(|s| s["src"] == 0).collect();
    assert_eq!(from_root.len(), 1);
    assert_eq!(from_root[0]["act"], "tau");
    let target = from_root[0]["target"].as_array().unwrap();
    assert_eq!(target.len(), 3);
    assert!(target.iter().all(|t| rat(&t["p"]) == int(1) / int(3)));
    for s in steps {
        let total: Rational = s["target"].as_array().unwrap().iter().map(|t| rat(&t["p"])).sum();
        assert_eq!(total, int(1));
    }
}

#[test]
fn distribution_files_and_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.json");
    let text = format!(r#"{{"dist": [{{"term": "1/2*tau.a (+) 1/2*tau.b", "p": "1/2"}}, {{"term": "{Q2}", "p": "1/2"}}]}}"#);
    std::fs::write(&path, text).unwrap();
    let path = path.to_str().unwrap();

    let parsed = json_of(&rccs(&["parse", "--term", path]));
    let dist: DistJson = serde_json::from_value(parsed).unwrap();
    assert_eq!(dist.dist.len(), 2);

    let out = rccs(&["chi", "--term", path, "--predicate", "psi:a", "--mode", "may"]);
    assert_eq!(json_of(&out)["value"], "1/2");

    let mut child = Command::new(env!("CARGO_BIN_EXE_rccs"))
        .args(["chi", "--term", "-", "--predicate", "psi:a", "--mode", "fair"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(P2.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(json_of(&out)["value"], "0/1");
}

#[test]
fn chi_reports_the_sandwich() {
    let out = rccs(&["chi", "--term", P1, "--predicate", "psi:a", "--mode", "fair", "--oracle-depth", "3"]);
    assert_eq!(code(&out), 0);
    let report = json_of(&out);
    assert_eq!(report["value"], "1/1");
    assert_eq!(report["oracle"]["holds"], true);
    assert_eq!(report["oracle"]["exact"], true);
}

#[test]
fn observers_compose_before_evaluation() {
    let out = rccs(&["chi", "--term", "1/2*tau.a (+) 1/2*tau.b", "--observer", "~a.omega"]);
    let report = json_of(&out);
    assert_eq!(report["predicate"], "psiOmega");
    assert_eq!(report["value"], "1/2");
}

#[test]
fn compare_exit_codes() {
    let box_ = rccs(&["compare", "--left", P1, "--right", P2, "--kind", "box", "--expect-equal"]);
    assert_eq!(code(&box_), 1);
    let report = json_of(&box_);
    assert_eq!(report["verdict"]["outcome"], "distinguished");
    assert_eq!(report["replay"]["reproduced"], true);

    let diamond = rccs(&["compare", "--left", P1, "--right", P2, "--kind", "diamond", "--expect-equal"]);
    assert_eq!(code(&diamond), 0);
    assert_ne!(json_of(&diamond)["verdict"]["outcome"], "distinguished");
}

#[test]
fn weak_verification_with_a_partition_file() {
    let a1 = "3/4*tau.a (+) 1/4*tau.0";
    let a2 = "1/4*tau.a (+) 3/4*tau.0";
    let b1 = format!("1/2*tau.({a1}) (+) 1/2*tau.({a2})");
    let b2 = "1/2*tau.a (+) 1/2*tau.0";
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocks.json");
    let blocks = serde_json::json!({"blocks": [[b1, b2], [a1], [a2], ["a"], ["0"]]});
    std::fs::write(&path, blocks.to_string()).unwrap();
    let out = rccs(&[
        "compare", "--left", &b1, "--right", b2, "--kind", "weak-verify", "--partition",
        path.to_str().unwrap(), "--expect-equal",
    ]);
    assert_eq!(code(&out), 1);
    let report = json_of(&out);
    assert_eq!(report["valid"], false);
    let failure = &report["failures"][0];
    assert_eq!(failure["action"], "tau");
    assert_eq!(failure["matcher"], "1/2*tau.a (+) 1/2*tau.0");
}

#[test]
fn usage_and_resource_errors() {
    assert_eq!(code(&rccs(&["parse", "--term", "tau.(a"])), 2);
    assert_eq!(code(&rccs(&["chi", "--term", P1, "--format", "dot"])), 2);
    assert_eq!(code(&rccs(&["chi", "--term", P1, "--predicate", "psi:tau"])), 2);
    assert_eq!(code(&rccs(&["compare", "--left", P1, "--right", P2])), 2);
    let blowup = "mu X.tau.(X | X)";
    assert_eq!(code(&rccs(&["chi", "--term", blowup, "--max-states", "20"])), 3);
    let capped = Command::new(env!("CARGO_BIN_EXE_rccs"))
        .args(["graph", "--term", Q2])
        .env("RCCS_MAX_STATES", "2")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 3);
    assert_eq!(json_of(&capped)["truncated"], true);
}

#[test]
fn text_output_marks_decimals_as_approximate() {
    let out = rccs(&["chi", "--term", Q2, "--predicate", "psi:a", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1/2 (~0.500000 approx.)"), "{text}");
}
