//! Vertex enumeration for small polytopes given by integer inequalities, by
//! brute force over tight constraint sets. Independent of the greedy route.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::rational::{lcm_of_denominators, Rational};

/// `coeffs · x ≤ rhs` (or `=` for equations).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub rhs: Rational,
}

fn det(m: &mut [Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| m[i][c] != 0) else { return 0 };
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                m[i][j] = (m[c][c] * m[i][j] - m[i][c] * m[c][j]) / prev;
            }
            m[i][c] = 0;
        }
        prev = m[c][c];
    }
    sign * m[n - 1][n - 1]
}

fn combinations(k: usize, n: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, k, n, cur, f);
            cur.pop();
        }
    }
    go(0, k, n, &mut Vec::with_capacity(k), f);
}

/// Vertices of `{x ∈ ℚ^dim : eqs hold, ineqs hold}`. The equations must be
/// linearly independent.
pub fn vertices(dim: usize, eqs: &[Constraint], ineqs: &[Constraint]) -> Vec<Vec<Rational>> {
    let scale = lcm_of_denominators(eqs.iter().chain(ineqs).map(|c| &c.rhs));
    let scaled = |c: &Constraint| -> i128 {
        (&c.rhs * Rational::from_integer(scale.clone())).to_integer().to_i128().expect("bound too large")
    };
    let eq_rhs: Vec<i128> = eqs.iter().map(scaled).collect();
    let in_rhs: Vec<i128> = ineqs.iter().map(scaled).collect();
    let row = |c: &Constraint| -> Vec<i128> { c.coeffs.iter().map(|&x| x as i128).collect() };
    let eq_rows: Vec<Vec<i128>> = eqs.iter().map(row).collect();
    let in_rows: Vec<Vec<i128>> = ineqs.iter().map(row).collect();
    let k = dim - eqs.len();
    let mut found: BTreeSet<Vec<(i128, i128)>> = BTreeSet::new();
    combinations(k, ineqs.len(), &mut |pick| {
        let mut a: Vec<Vec<i128>> = eq_rows.clone();
        let mut b: Vec<i128> = eq_rhs.clone();
        for &i in pick {
            a.push(in_rows[i].clone());
            b.push(in_rhs[i]);
        }
        let d = det(&mut a.clone());
        if d == 0 {
            return;
        }
        // Cramer: x_j = det(A_j) / det(A)
        let nums: Vec<i128> = (0..dim)
            .map(|j| {
                let mut aj = a.clone();
                for (r, row) in aj.iter_mut().enumerate() {
                    row[j] = b[r];
                }
                det(&mut aj)
            })
            .collect();
        let (nums, d) = if d < 0 { (nums.iter().map(|x| -x).collect::<Vec<_>>(), -d) } else { (nums, d) };
        let feasible = in_rows.iter().zip(&in_rhs).all(|(row, &rhs)| {
            row.iter().zip(&nums).map(|(c, x)| c * x).sum::<i128>() <= rhs * d
        });
        if feasible {
            let point = nums
                .iter()
                .map(|&x| {
                    let g = x.gcd(&d).max(1);
                    (x / g, d / g)
                })
                .collect();
            found.insert(point);
        }
    });
    found
        .into_iter()
        .map(|p| {
            p.into_iter()
                .map(|(x, d)| Rational::new(BigInt::from(x), BigInt::from(d) * &scale))
                .collect()
        })
        .collect()
}

/// Checks `x` against all constraints.
pub fn satisfies(x: &[Rational], eqs: &[Constraint], ineqs: &[Constraint]) -> bool {
    let dot = |c: &Constraint| -> Rational {
        c.coeffs.iter().zip(x).filter(|(c, _)| **c != 0).map(|(c, x)| x * Rational::from_integer((*c).into())).sum()
    };
    eqs.iter().all(|c| dot(c) == c.rhs) && ineqs.iter().all(|c| dot(c) <= c.rhs)
}

/// Indicator row of a subset mask.
pub fn indicator(n: usize, mask: u32, sign: i64) -> Vec<i64> {
    (0..n).map(|i| if mask >> i & 1 == 1 { sign } else { 0 }).collect()
}

pub fn is_zero_row(c: &Constraint) -> bool {
    c.coeffs.iter().all(|x| *x == 0) && c.rhs.is_zero()
}
