//! Independent checker for fibration certificates.
//!
//! Works from the raw Gram matrix of `Π` with its own i128 arithmetic and
//! its own root enumeration; nothing here calls into the search path.

use serde::{Deserialize, Serialize};

use crate::fibration::FibrationCertificate;

/// How the checker enumerates roots of `Π` orthogonal to `x`.
#[derive(Debug, Clone, Copy)]
pub enum RootOracle<'a> {
    /// Brute force over the coordinate box `|v_i|² ≤ 2 (Q⁻¹)_ii`.
    CoordinateBox,
    /// `Π` sits between `2Z^16` and `Z^16` in half coordinates (form
    /// `-(a·b)/2`); `half_basis` gives the basis vectors in that frame.
    HalfFrame { half_basis: &'a [Vec<i64>] },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
}

const BOX_LIMIT: u128 = 20_000_000;

pub fn verify_certificate(
    pi_gram: &[Vec<i64>],
    cert: &FibrationCertificate,
    oracle: RootOracle<'_>,
) -> VerificationReport {
    let n = pi_gram.len();
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool| checks.push(Check { name: name.into(), passed });

    let shapes_ok = cert.x.len() == n && cert.e.len() == n + 1 && cert.l.len() == n + 1;
    push("dimensions", shapes_ok);
    if !shapes_ok {
        return VerificationReport { valid: false, checks };
    }
    let g: Vec<Vec<i128>> = pi_gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let x: Vec<i128> = cert.x.0.iter().map(|&c| c as i128).collect();
    let hs = cert.hs_square as i128;

    let mut pic = vec![vec![0i128; n + 1]; n + 1];
    pic[0][0] = hs;
    for i in 0..n {
        pic[i + 1][1..].copy_from_slice(&g[i]);
    }
    let e: Vec<i128> = cert.e.0.iter().map(|&c| c as i128).collect();
    let l: Vec<i128> = cert.l.0.iter().map(|&c| c as i128).collect();

    push("x primitive", gcd_all(&x) == 1);
    push("hS_square positive and even", hs > 0 && hs % 2 == 0);
    push("x^2 = -hS_square", form(&g, &x, &x) == -hs);
    let expected_e: Vec<i128> = std::iter::once(1).chain(x.iter().map(|c| -c)).collect();
    push("e = h_S - x", e == expected_e);
    push("e^2 = 0", form(&pic, &e, &e) == 0);
    push("e primitive", gcd_all(&e) == 1);
    push("l^2 = -2", form(&pic, &l, &l) == -2);
    push("(l, e) = 1", form(&pic, &l, &e) == 1);

    let orthogonal_root = match oracle {
        RootOracle::CoordinateBox => box_orthogonal_root(&g, &x),
        RootOracle::HalfFrame { half_basis } => frame_orthogonal_root(&g, half_basis, &x),
    };
    match orthogonal_root {
        Some(found) => {
            push("root oracle applicable", true);
            push("x^perp root-free", !found);
            push("root_check agrees", cert.root_check == !found);
        }
        None => push("root oracle applicable", false),
    }

    match oracle {
        RootOracle::CoordinateBox => push("code_class empty", cert.code_class.is_empty()),
        RootOracle::HalfFrame { half_basis } => {
            let half = to_half(half_basis, &x);
            let outside_exceptional = half.iter().any(|a| a % 2 != 0);
            push("code_class nonzero", cert.code_class.iter().any(|&c| c != 0));
            push("code_class matches half coordinates", outside_exceptional);
        }
    }

    let valid = checks.iter().all(|c| c.passed);
    VerificationReport { valid, checks }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0, |g, &c| gcd(g, c))
}

fn form(g: &[Vec<i128>], a: &[i128], b: &[i128]) -> i128 {
    let mut s = 0;
    for i in 0..a.len() {
        if a[i] == 0 {
            continue;
        }
        for j in 0..b.len() {
            s += a[i] * g[i][j] * b[j];
        }
    }
    s
}

fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a = m.to_vec();
    let mut prev = 1i128;
    let mut sign = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn minor(m: &[Vec<i128>], skip: usize) -> Vec<Vec<i128>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &x)| x).collect())
        .collect()
}

/// `Some(true)` if a root of `Π` is orthogonal to `x`; `None` if the box is
/// too large or the form is not negative definite.
fn box_orthogonal_root(g: &[Vec<i128>], x: &[i128]) -> Option<bool> {
    let n = g.len();
    let q: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let d = det(&q);
    if d <= 0 {
        return None;
    }
    // |v_i|² ≤ 2 adj_ii / det
    let mut bounds = Vec::with_capacity(n);
    let mut volume: u128 = 1;
    for i in 0..n {
        let adj = det(&minor(&q, i));
        let mut b = 0i128;
        while (b + 1) * (b + 1) * d <= 2 * adj {
            b += 1;
        }
        bounds.push(b);
        volume = volume.saturating_mul((2 * b + 1) as u128);
    }
    if volume > BOX_LIMIT {
        return None;
    }
    let gx: Vec<i128> = (0..n).map(|i| (0..n).map(|j| g[i][j] * x[j]).sum()).collect();
    let mut v: Vec<i128> = bounds.iter().map(|b| -b).collect();
    loop {
        if v.iter().any(|&c| c != 0)
            && v.iter().zip(&gx).map(|(a, b)| a * b).sum::<i128>() == 0
            && form(g, &v, &v) == -2
        {
            return Some(true);
        }
        let mut i = 0;
        loop {
            if i == n {
                return Some(false);
            }
            if v[i] < bounds[i] {
                v[i] += 1;
                break;
            }
            v[i] = -bounds[i];
            i += 1;
        }
    }
}

fn to_half(half_basis: &[Vec<i64>], v: &[i128]) -> Vec<i128> {
    let width = half_basis.first().map_or(0, Vec::len);
    let mut out = vec![0i128; width];
    for (c, row) in v.iter().zip(half_basis) {
        for (o, &r) in out.iter_mut().zip(row) {
            *o += c * r as i128;
        }
    }
    out
}

/// Rank over F_2 of rows given as bitmasks.
fn f2_rank(mut rows: Vec<u32>) -> usize {
    let mut rank = 0;
    for bit in 0..32 {
        let mask = 1u32 << bit;
        if let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) {
            rows.swap(rank, p);
            for i in 0..rows.len() {
                if i != rank && rows[i] & mask != 0 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}

fn parity_mask(a: &[i128]) -> u32 {
    a.iter().enumerate().filter(|(_, &c)| c % 2 != 0).fold(0, |m, (i, _)| m | (1 << i))
}

fn frame_orthogonal_root(g: &[Vec<i128>], half_basis: &[Vec<i64>], x: &[i128]) -> Option<bool> {
    let n = g.len();
    let width = half_basis.first().map_or(0, Vec::len);
    if half_basis.len() != n || width != n || n > 32 {
        return None;
    }
    // The frame must reproduce the Gram matrix.
    for i in 0..n {
        for j in 0..n {
            let dot: i128 = half_basis[i].iter().zip(&half_basis[j]).map(|(&a, &b)| (a * b) as i128).sum();
            if dot % 2 != 0 || -dot / 2 != g[i][j] {
                return None;
            }
        }
    }
    // With code C = basis mod 2, the lattice lies in {a : a mod 2 ∈ C}, whose
    // determinant is 2^(n - 2 dim C); equality of determinants forces equality.
    let code: Vec<u32> =
        half_basis.iter().map(|r| parity_mask(&r.iter().map(|&c| c as i128).collect::<Vec<_>>())).collect();
    let dim = f2_rank(code.clone());
    let expected = 1i128 << (n as i128 - 2 * dim as i128).max(0);
    if 2 * dim > n || det(g).abs() != expected {
        return None;
    }
    let in_code = |mask: u32| {
        let mut rows = code.clone();
        rows.push(mask);
        f2_rank(rows) == dim
    };
    let xh = to_half(half_basis, x);

    // Norm -2 means Σ a_i² = 4: one ±2, or four ±1.
    for i in 0..n {
        if xh[i] == 0 {
            return Some(true);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let mask = (1u32 << i) | (1 << j) | (1 << k) | (1 << l);
                    if !in_code(mask) {
                        continue;
                    }
                    for signs in 0..16u32 {
                        let s = |b: u32| if signs & (1 << b) != 0 { -1 } else { 1 };
                        let dot = s(0) * xh[i] + s(1) * xh[j] + s(2) * xh[k] + s(3) * xh[l];
                        if dot == 0 {
                            return Some(true);
                        }
                    }
                }
            }
        }
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeVector;

    fn toy_cert() -> FibrationCertificate {
        FibrationCertificate {
            x: LatticeVector(vec![1, 0]),
            hs_square: 2,
            e: LatticeVector(vec![1, -1, 0]),
            l: LatticeVector(vec![0, 0, 1]),
            root_check: true,
            code_class: vec![],
        }
    }

    const A2: [[i64; 2]; 2] = [[-2, -1], [-1, -2]];

    fn a2() -> Vec<Vec<i64>> {
        A2.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn accepts_hand_certificate() {
        let r = verify_certificate(&a2(), &toy_cert(), RootOracle::CoordinateBox);
        assert!(r.valid, "{r:?}");
    }

    #[test]
    fn rejects_tampering() {
        let mut c = toy_cert();
        c.l = LatticeVector(vec![0, 0, -1]);
        assert!(!verify_certificate(&a2(), &c, RootOracle::CoordinateBox).valid);

        let mut c = toy_cert();
        c.hs_square = 4;
        assert!(!verify_certificate(&a2(), &c, RootOracle::CoordinateBox).valid);

        let mut c = toy_cert();
        c.root_check = false;
        assert!(!verify_certificate(&a2(), &c, RootOracle::CoordinateBox).valid);
    }

    #[test]
    fn detects_orthogonal_root() {
        // In -2 Id_2, x = e1 is orthogonal to the root e2.
        let g = [vec![-2i64, 0], vec![0, -2]];
        let gi: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&c| c as i128).collect()).collect();
        assert_eq!(box_orthogonal_root(&gi, &[1, 0]), Some(true));
        assert_eq!(box_orthogonal_root(&gi, &[1, 1]), Some(false));
    }

    #[test]
    fn determinant_matches_known_values() {
        assert_eq!(det(&[vec![2, 1], vec![1, 2]]), 3);
        assert_eq!(det(&[vec![0, 1], vec![1, 0]]), -1);
    }
}
