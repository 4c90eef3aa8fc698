//! Exact linear algebra: fraction-free elimination over ℚ, plain elimination
//! over GF(p), and integer lattices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{lcm_of_denominators, Rational};

/// Rows scaled to integers.
fn integer_rows(rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let l = lcm_of_denominators(r);
            r.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect()
}

/// Bareiss elimination to row echelon form. Returns the pivot columns.
pub fn bareiss(m: &mut [Vec<BigInt>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in (c + 1..cols).rev() {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        // entries left of c in rows below are already zero
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_q(rows: &[Vec<Rational>]) -> usize {
    let mut m = integer_rows(rows);
    bareiss(&mut m).len()
}

/// Back-substitution on an echelon form with the given free-variable values.
fn back_substitute(m: &[Vec<BigInt>], pivots: &[usize], ncols: usize, rhs: Option<usize>, free: &[(usize, Rational)]) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); ncols];
    for (c, v) in free {
        x[*c] = v.clone();
    }
    for (r, &c) in pivots.iter().enumerate().rev() {
        let mut acc = match rhs {
            Some(b) => Rational::from_integer(m[r][b].clone()),
            None => Rational::zero(),
        };
        for j in c + 1..ncols {
            if !m[r][j].is_zero() {
                acc -= Rational::from_integer(m[r][j].clone()) * &x[j];
            }
        }
        x[c] = acc / Rational::from_integer(m[r][c].clone());
    }
    x
}

/// Basis of `{x : A x = 0}`.
pub fn nullspace_q(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m = integer_rows(rows);
    let pivots = bareiss(&mut m);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| back_substitute(&m, &pivots, ncols, None, &[(f, Rational::one())]))
        .collect()
}

/// Some solution of `A x = b`, free variables set to zero.
pub fn solve_q(rows: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| r.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    let mut m = integer_rows(&aug);
    let pivots = bareiss(&mut m);
    if pivots.contains(&ncols) {
        return None;
    }
    Some(back_substitute(&m, &pivots, ncols, Some(ncols), &[]))
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(p as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(p as i128) as u64
}

/// Row echelon form over GF(p). Returns the pivot columns.
pub fn echelon_fp(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(k) = (r..rows).find(|&i| !m[i][c].is_multiple_of(p)) else { continue };
        m.swap(r, k);
        let inv = inv_mod(m[r][c] % p, p);
        for j in 0..cols {
            m[r][j] = m[r][j] % p * inv % p;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_multiple_of(p) {
                let f = m[i][c] % p;
                for j in 0..cols {
                    m[i][j] = (m[i][j] % p + p * p - f * m[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_fp(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m = rows.to_vec();
    echelon_fp(&mut m, p).len()
}

/// Basis of `{x : A x = 0}` over GF(p).
pub fn nullspace_fp(rows: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m = rows.to_vec();
    let pivots = echelon_fp(&mut m, p);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut x = vec![0u64; ncols];
            x[f] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                x[c] = (p - m[r][f] % p) % p;
            }
            x
        })
        .collect()
}

/// Integer row echelon form by unimodular row operations, with entries above
/// each pivot reduced into `[0, pivot)`. Zero rows are dropped, so the result
/// is the Hermite normal form of the row lattice.
pub fn hnf(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut m = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..ncols {
        loop {
            let nz: Vec<usize> = (r..m.len()).filter(|&i| !m[i][c].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let k = *nz.iter().min_by_key(|&&i| m[i][c].abs()).unwrap();
            m.swap(r, k);
            if nz.len() == 1 {
                break;
            }
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                for j in 0..ncols {
                    let d = &q * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            pivots.push((r, c));
            r += 1;
        }
    }
    m.truncate(r);
    for &(pr, pc) in &pivots {
        for i in 0..pr {
            let q = m[i][pc].div_floor(&m[pr][pc]);
            if !q.is_zero() {
                for j in 0..ncols {
                    let d = &q * &m[pr][j];
                    m[i][j] -= d;
                }
            }
        }
    }
    m
}

/// Basis of the integer kernel `{x ∈ ℤ^k : C x = 0}`.
pub fn integer_kernel(c: &[Vec<BigInt>], k: usize) -> Vec<Vec<BigInt>> {
    // rows of [Cᵀ | I]; reduce the Cᵀ part, zero rows carry kernel vectors
    let m = c.len();
    let mut rows: Vec<Vec<BigInt>> = (0..k)
        .map(|i| {
            let mut row: Vec<BigInt> = (0..m).map(|r| c[r][i].clone()).collect();
            row.extend((0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let mut r = 0;
    for col in 0..m {
        loop {
            let nz: Vec<usize> = (r..k).filter(|&i| !rows[i][col].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            rows.swap(r, p);
            if nz.len() == 1 {
                break;
            }
            for i in r + 1..k {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[r][col]);
                for j in 0..m + k {
                    let d = &q * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        if r < k && !rows[r][col].is_zero() {
            r += 1;
        }
    }
    rows[r..].iter().map(|row| row[m..].to_vec()).collect()
}
