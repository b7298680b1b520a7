//! Exact rational linear algebra: square solves and feasibility of `Ax = b, x >= 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Solves the square system `a x = b` by fraction-free (Bareiss) elimination.
///
/// Each row is first scaled to integers so the elimination never forms fractions.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Format("system is not square".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // augmented integer matrix
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (row, rhs) in a.iter().zip(b) {
        let mut l = BigInt::one();
        for v in row.iter().chain(std::iter::once(rhs)) {
            l = l.lcm(v.denom());
        }
        let scaled: Vec<BigInt> = row
            .iter()
            .chain(std::iter::once(rhs))
            .map(|v| v.numer() * (&l / v.denom()))
            .collect();
        m.push(scaled);
    }
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !m[i][k].is_zero()).ok_or(Error::Singular)?;
        m.swap(k, pivot);
        for i in (k + 1)..n {
            for j in (k + 1)..=n {
                let v = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(m[i][n].clone());
        for j in (i + 1)..n {
            acc -= Rational::from_integer(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / Rational::from_integer(m[i][i].clone());
    }
    Ok(x)
}

/// Sparse linear constraint `sum coeff * x_var = rhs`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Equation {
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// Finds `x >= 0` satisfying every equation, or `None` when none exists.
///
/// Phase one of the simplex method on an exact tableau, with Bland's rule.
pub fn feasible_point(num_vars: usize, equations: &[Equation]) -> Option<Vec<Rational>> {
    let rows = equations.len();
    let cols = num_vars + rows;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(rows);
    for (r, eq) in equations.iter().enumerate() {
        let mut row = vec![Rational::zero(); cols + 1];
        for (v, c) in &eq.terms {
            row[*v] += c;
        }
        row[cols] = eq.rhs.clone();
        if row[cols].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[num_vars + r] = Rational::one();
        tab.push(row);
    }
    let mut basis: Vec<usize> = (num_vars..cols).collect();
    // objective: minimize the sum of artificials, kept as reduced costs
    let mut cost = vec![Rational::zero(); cols + 1];
    for row in &tab {
        for (j, v) in row.iter().enumerate() {
            if j < num_vars || j == cols {
                cost[j] -= v;
            }
        }
    }
    while let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (r, row) in tab.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[cols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            // unbounded direction; cannot happen for a phase-one objective bounded below
            break;
        };
        let piv = tab[pr][enter].clone();
        for v in tab[pr].iter_mut() {
            *v /= &piv;
        }
        let pivot_row = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
        }
        let f = cost[enter].clone();
        for (v, p) in cost.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v -= &f * p;
            }
        }
        basis[pr] = enter;
    }
    if !cost[cols].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); num_vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < num_vars {
            x[b] = tab[r][cols].clone();
        }
    }
    Some(x)
}
