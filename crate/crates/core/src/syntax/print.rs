//! Canonical printer. Output re-parses to the identical term.

use super::{Action, Term, TermKind};
use crate::rational::{to_fraction_string, Rational};

pub(super) fn print(t: &Term) -> String {
    let mut out = String::new();
    top(t, false, &mut out);
    out
}

// Anything, including `|`.
fn top(t: &Term, nested: bool, out: &mut String) {
    match t.kind() {
        TermKind::Par(l, r) => {
            top(l, false, out);
            out.push_str(" | ");
            choice(r, false, out);
        }
        _ => choice(t, nested, out),
    }
}

// Sums, weighted sums and recursion; `|` needs parentheses.
fn choice(t: &Term, nested: bool, out: &mut String) {
    match t.kind() {
        TermKind::Sum(items) => {
            for (i, (a, cont)) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                prefix(a, cont, nested, out);
            }
        }
        TermKind::PSum(items) => psum(items, nested, out),
        TermKind::Fix(v, body) => {
            out.push_str("mu ");
            out.push_str(v.name());
            out.push('.');
            let bare = match body.kind() {
                TermKind::Sum(items) => items.len() == 1,
                TermKind::Nil | TermKind::Var(_) | TermKind::Restrict(..) => true,
                _ => false,
            };
            if bare {
                choice(body, false, out);
            } else {
                out.push('(');
                top(body, false, out);
                out.push(')');
            }
        }
        _ => unary(t, nested, out),
    }
}

fn psum(items: &[(Rational, Term)], nested: bool, out: &mut String) {
    for (i, (w, cont)) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(" (+) ");
        }
        out.push_str(&to_fraction_string(w));
        out.push('*');
        prefix(&Action::Tau, cont, nested, out);
    }
}

fn prefix(a: &Action, cont: &Term, nested: bool, out: &mut String) {
    out.push_str(&a.to_string());
    if nested && matches!(cont.kind(), TermKind::Nil) {
        return;
    }
    out.push('.');
    unary(cont, true, out);
}

// Operand of a prefix: binds tighter than every infix operator.
fn unary(t: &Term, nested: bool, out: &mut String) {
    match t.kind() {
        TermKind::Nil => out.push('0'),
        TermKind::Var(v) => out.push_str(v.name()),
        TermKind::Sum(items) if items.len() == 1 => {
            let (a, cont) = &items[0];
            prefix(a, cont, nested, out);
        }
        TermKind::Restrict(ls, body) => {
            out.push_str("restrict{");
            let names: Vec<&str> = ls.iter().map(|c| c.name()).collect();
            out.push_str(&names.join(","));
            out.push_str("}(");
            top(body, false, out);
            out.push(')');
        }
        _ => {
            out.push('(');
            top(t, nested, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::super::{parse, Channel, Mode, Var};
    use super::*;

    fn p(text: &str) -> Term {
        parse(text, Mode::Observer).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(print(&Term::nil()), "0");
        let x = Var::new("X").unwrap();
        let a = Term::prefix(Action::Input(Channel::new("a").unwrap()), Term::nil());
        let p3 = Term::fix(
            x.clone(),
            Term::sum(vec![(Action::Tau, a.clone()), (Action::Tau, Term::var(x))]).unwrap(),
        );
        assert_eq!(print(&p3), "mu X.(tau.a + tau.X)");
        let b: BTreeSet<_> = [Channel::new("b").unwrap()].into_iter().collect();
        assert_eq!(print(&Term::par(a, Term::restrict(b, Term::nil()))), "a.0 | restrict{b}(0)");
        assert_eq!(print(&p("mu X. tau.X").unfold().unwrap()), "tau.(mu X.tau.X)");
        assert_eq!(
            print(&p("mu X.(1/3*tau.a (+) 1/3*tau.b (+) 1/3*tau.X)")),
            "mu X.(1/3*tau.a (+) 1/3*tau.b (+) 1/3*tau.X)"
        );
        assert_eq!(print(&p("~a.omega")), "~a.omega");
    }

    #[test]
    fn round_trips() {
        for text in [
            "a.0 + b.0",
            "tau.(a + b)",
            "(a.0 | b.0) | c.0",
            "a.0 | (b.0 | c.0)",
            "tau.(a.0 | b.0)",
            "restrict{a,b}(a.~b | ~a.b)",
            "1/2*tau (+) 1/2*tau.a",
            "a.(1/2*tau.b (+) 1/2*tau.c)",
            "mu X.(mu Y.(a.X + b.Y))",
            "mu X.a.X | mu Y.b.Y",
            "mu X.(a.X | b)",
            "tau.restrict{a}(a.0)",
            "mu X.0",
            "a.(mu X.tau.X)",
            "a.X + tau.(Y | 0)",
        ] {
            let t = p(text);
            let printed = print(&t);
            assert_eq!(p(&printed), t, "{text} printed as {printed}");
        }
    }
}
