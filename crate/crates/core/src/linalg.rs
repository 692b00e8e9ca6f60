//! Exact integer and rational linear algebra on small dense matrices.
//!
//! Matrices are row-major `Vec<Vec<BigInt>>`. Everything here is exact; there
//! is no floating point. Sizes in this crate stay below a few dozen rows, so
//! the algorithms favour clarity over asymptotics.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn to_big(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

pub fn transpose(rows: &IntMatrix) -> IntMatrix {
    if rows.is_empty() {
        return Vec::new();
    }
    let cols = rows[0].len();
    (0..cols).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect()
}

fn row_axpy(rows: &mut IntMatrix, dst: usize, src: usize, factor: &BigInt) {
    if factor.is_zero() {
        return;
    }
    let (d, s) = if dst < src {
        let (lo, hi) = rows.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in d.iter_mut().zip(s.iter()) {
        *x -= factor * y;
    }
}

fn negate_row(row: &mut [BigInt]) {
    for x in row.iter_mut() {
        *x = -std::mem::take(x);
    }
}

/// Leading principal minors by fraction-free (Bareiss) elimination without
/// pivoting. Stops after the first zero minor, which is included.
pub fn leading_minors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let n = m.len();
    let mut a = to_big(m);
    let mut prev = BigInt::one();
    let mut minors = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = a[k][k].clone();
        minors.push(pivot.clone());
        if pivot.is_zero() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &pivot - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = pivot;
    }
    minors
}

/// Determinant by Bareiss elimination with row pivoting.
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    if sign < 0 {
        -a[n - 1][n - 1].clone()
    } else {
        a[n - 1][n - 1].clone()
    }
}

/// Rank over Q, by fraction-free elimination.
pub fn rank(rows: &IntMatrix) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut a = rows.clone();
    let m = a.len();
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..m {
            if a[i][c].is_zero() {
                continue;
            }
            let (f, g) = (a[r][c].clone(), a[i][c].clone());
            for j in c..cols {
                let v = &a[i][j] * &f - &a[r][j] * &g;
                a[i][j] = v;
            }
            let content = a[i][c..].iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if !content.is_zero() && !content.is_one() {
                for x in a[i][c..].iter_mut() {
                    *x /= &content;
                }
            }
        }
        r += 1;
    }
    r
}

/// Row-style Hermite normal form `H = U * A` with `U` unimodular.
#[derive(Debug, Clone)]
pub struct Hermite {
    /// All rows of `H`; the first `rank` are nonzero, the rest are zero.
    pub form: IntMatrix,
    pub transform: IntMatrix,
    pub rank: usize,
}

pub fn hermite(rows: &IntMatrix) -> Hermite {
    let m = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    let mut a = rows.clone();
    let mut u = identity(m);
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        loop {
            let pivot = (r..m)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()).then(i.cmp(&j)));
            let Some(p) = pivot else { break };
            a.swap(r, p);
            u.swap(r, p);
            let mut clean = true;
            for i in r + 1..m {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                row_axpy(&mut a, i, r, &q);
                row_axpy(&mut u, i, r, &q);
                if !a[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            negate_row(&mut a[r]);
            negate_row(&mut u[r]);
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            row_axpy(&mut a, i, r, &q);
            row_axpy(&mut u, i, r, &q);
        }
        r += 1;
    }
    Hermite { form: a, transform: u, rank: r }
}

/// Nonzero rows of the Hermite normal form: a canonical basis of the row span.
pub fn row_basis(rows: &IntMatrix) -> IntMatrix {
    let h = hermite(rows);
    h.form.into_iter().take(h.rank).collect()
}

/// Saturated Z-basis of `{x : A x = 0}` (the right kernel of `A`).
pub fn integer_kernel(a: &IntMatrix, cols: usize) -> IntMatrix {
    if a.is_empty() {
        return identity(cols);
    }
    let h = hermite(&transpose(a));
    h.transform.into_iter().skip(h.rank).collect()
}

/// Smith normal form `D = U * A * V`; only the column transform `V` is kept.
#[derive(Debug, Clone)]
pub struct Smith {
    /// Nonzero diagonal entries, positive, each dividing the next.
    pub invariants: Vec<BigInt>,
    pub col_transform: IntMatrix,
}

pub fn smith(rows: &IntMatrix) -> Smith {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mut a = rows.clone();
    let mut v = identity(n);
    let mut invariants = Vec::new();

    let col_axpy = |mat: &mut IntMatrix, dst: usize, src: usize, f: &BigInt| {
        for row in mat.iter_mut() {
            let s = row[src].clone();
            row[dst] -= f * s;
        }
    };

    for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Smith { invariants, col_transform: v };
            };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
            }
            let mut clean = true;
            for i in t + 1..m {
                let q = a[i][t].div_floor(&a[t][t]);
                row_axpy(&mut a, i, t, &q);
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(&mut a, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut a, t, i, &minus_one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            negate_row(&mut a[t]);
        }
        invariants.push(a[t][t].clone());
    }
    Smith { invariants, col_transform: v }
}

/// Scales a rational row to an integer row with the same Q-span.
pub fn clear_denominators(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect()
}

pub fn rational_rank(rows: &[Vec<BigRational>]) -> usize {
    let ints: IntMatrix = rows.iter().map(|r| clear_denominators(r)).collect();
    rank(&ints)
}

/// True iff `v` lies in the Q-span of `rows`.
pub fn in_rational_span(rows: &IntMatrix, v: &[BigInt]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    let mut extended = rows.clone();
    extended.push(v.to_vec());
    rank(&extended) == rank(rows)
}

/// Solves `c * A = b` for a square nonsingular `A` over Q.
pub fn solve_left(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = a.len();
    // Work with A^T c^T = b^T, augmented.
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n).map(|j| BigRational::from_integer(a[j][i].clone())).collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !aug[i][c].is_zero())?;
        aug.swap(c, p);
        let inv = aug[c][c].recip();
        for x in aug[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=n {
                    let s = &aug[c][j] * &f;
                    aug[i][j] -= s;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}
