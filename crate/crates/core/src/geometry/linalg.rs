//! Small dense matrices over [`RatFunc`].

use crate::kernel::{Rat, RatFunc};

pub type Matrix = Vec<Vec<RatFunc>>;
pub type Tensor3 = Vec<Vec<Vec<RatFunc>>>;

pub fn zeros(n: usize) -> Matrix {
    vec![vec![RatFunc::zero(); n]; n]
}

pub fn zeros3(n: usize) -> Tensor3 {
    vec![zeros(n); n]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = RatFunc::one();
    }
    m
}

pub fn is_square(m: &Matrix, n: usize) -> bool {
    m.len() == n && m.iter().all(|r| r.len() == n)
}

pub fn transpose(m: &Matrix) -> Matrix {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect()
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    out
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn trace(a: &Matrix) -> RatFunc {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

/// Row vector times matrix.
pub fn row_mul(v: &[RatFunc], m: &Matrix) -> Vec<RatFunc> {
    let n = m.len();
    (0..n)
        .map(|j| (0..n).filter(|&k| !v[k].is_zero()).map(|k| &v[k] * &m[k][j]).sum())
        .collect()
}

/// Determinant by fraction-carrying Gaussian elimination, or through the
/// characteristic polynomial when entries carry parameters (which may not
/// be divided by).
pub fn det(m: &Matrix) -> RatFunc {
    let n = m.len();
    if m.iter().flatten().any(RatFunc::has_params) {
        let f = charpoly(m);
        return if n.is_multiple_of(2) { f[n].clone() } else { -&f[n] };
    }
    let mut a = m.clone();
    let mut d = RatFunc::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return RatFunc::zero();
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        let p = a[col][col].clone();
        d = &d * &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].checked_div(&p).expect("nonzero pivot");
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= &t;
            }
        }
    }
    d
}

/// Inverse, or `None` if the matrix is singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col].clone();
        let pinv = RatFunc::one().checked_div(&p).ok()?;
        for c in 0..n {
            a[col][c] = &a[col][c] * &pinv;
            inv[col][c] = &inv[col][c] * &pinv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= &t;
                let t = &f * &inv[col][c];
                inv[r][c] -= &t;
            }
        }
    }
    Some(inv)
}

/// Coefficients `[1, f1, ..., fn]` of `det(λI - A) = λ^n + f1 λ^{n-1} + ... + fn`.
///
/// Faddeev–LeVerrier recursion; only divides by integers, so parameters in
/// the entries are fine.
pub fn charpoly(a: &Matrix) -> Vec<RatFunc> {
    let n = a.len();
    let mut coeffs = vec![RatFunc::one()];
    let mut m = zeros(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + f_{k-1} I
        let mut next = mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[k - 1];
        }
        m = next;
        let am = mul(a, &m);
        let f = trace(&am).scale(&Rat::new((-1).into(), (k as i64).into()));
        coeffs.push(f);
    }
    coeffs
}

/// `A^k` for `k = 0..=top`.
pub fn powers(a: &Matrix, top: usize) -> Vec<Matrix> {
    let mut out = vec![identity(a.len())];
    for k in 1..=top {
        out.push(mul(&out[k - 1], a));
    }
    out
}

/// Jacobian `∂V^i/∂u^j` of a flux vector.
pub fn jacobian(flux: &[RatFunc]) -> Matrix {
    let n = flux.len();
    flux.iter().map(|f| (0..n).map(|j| f.partial(j)).collect()).collect()
}
