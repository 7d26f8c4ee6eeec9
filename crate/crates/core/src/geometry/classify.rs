//! Classifiers for velocity matrices: Nijenhuis and Haantjes torsions,
//! linear degeneracy, and a double-eigenvalue certificate.

use num_traits::{Signed, Zero};

use crate::kernel::{Rat, RatFunc, Var};

use super::linalg::{self, zeros3, Matrix, Tensor3};
use super::ConditionReport;

/// `N^i_{jk} = V^s_j ∂_s V^i_k - V^s_k ∂_s V^i_j - V^i_s (∂_j V^s_k - ∂_k V^s_j)`,
/// indexed `[i][j][k]`.
pub fn nijenhuis(v: &Matrix) -> Tensor3 {
    let n = v.len();
    let dv = super::partials(v); // dv[s][i][k] = ∂_s V^i_k
    // a[i][j][k] = V^s_j ∂_s V^i_k
    let mut a = zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                a[i][j][k] = (0..n).filter(|&s| !v[s][j].is_zero()).map(|s| &v[s][j] * &dv[s][i][k]).sum();
            }
        }
    }
    let mut out = zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut x = &a[i][j][k] - &a[i][k][j];
                for s in 0..n {
                    if !v[i][s].is_zero() {
                        x -= &(&v[i][s] * &(&dv[j][s][k] - &dv[k][s][j]));
                    }
                }
                out[i][j][k] = x;
            }
        }
    }
    out
}

/// `H^i_{jk} = N^i_{pq}V^p_jV^q_k - N^p_{jq}V^i_pV^q_k - N^p_{qk}V^i_pV^q_j + N^p_{jk}V^i_qV^q_p`.
pub fn haantjes(v: &Matrix) -> Tensor3 {
    let n = v.len();
    let nt = nijenhuis(v);
    let v2 = linalg::mul(v, v);
    // t1[i][p][k] = N^i_{pq} V^q_k, t2[p][j][k] = N^p_{qk} V^q_j
    let mut t1 = zeros3(n);
    let mut t2 = zeros3(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                t1[a][b][c] = (0..n).filter(|&q| !v[q][c].is_zero()).map(|q| &nt[a][b][q] * &v[q][c]).sum();
                t2[a][b][c] = (0..n).filter(|&q| !v[q][b].is_zero()).map(|q| &nt[a][q][c] * &v[q][b]).sum();
            }
        }
    }
    let mut out = zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut x = RatFunc::zero();
                for p in 0..n {
                    if !v[p][j].is_zero() {
                        x += &(&t1[i][p][k] * &v[p][j]);
                    }
                    if !v[i][p].is_zero() {
                        x -= &(&v[i][p] * &(&t1[p][j][k] + &t2[p][j][k]));
                    }
                    if !v2[i][p].is_zero() {
                        x += &(&v2[i][p] * &nt[p][j][k]);
                    }
                }
                out[i][j][k] = x;
            }
        }
    }
    out
}

/// Row vectors `Σ_{k<n} ∇f_{n-k} V^{k+shift}` for `det(λI - V) = λ^n + f1 λ^{n-1} + ...`.
fn degeneracy_rows(f: &[RatFunc], pw: &[Matrix], shift: usize) -> Vec<RatFunc> {
    let n = f.len() - 1;
    let mut acc = vec![RatFunc::zero(); n];
    for k in 0..n {
        let grad: Vec<RatFunc> = (0..n).map(|i| f[n - k].partial(i)).collect();
        let row = linalg::row_mul(&grad, &pw[k + shift]);
        for (a, r) in acc.iter_mut().zip(&row) {
            *a += r;
        }
    }
    acc
}

/// `Σ_{k=0}^{n-1} ∇f_{n-k} V^k = 0` with `∇` the row gradient in `u`.
pub fn linear_degeneracy_check(v: &Matrix) -> ConditionReport {
    let n = v.len();
    let mut rep = ConditionReport::new("linear degeneracy");
    rep.family("gradient-contraction");
    if n == 0 {
        return rep;
    }
    let f = linalg::charpoly(v);
    let pw = linalg::powers(v, n);
    for (i, x) in degeneracy_rows(&f, &pw, 0).into_iter().enumerate() {
        rep.check("gradient-contraction", &[i], x);
    }
    let shifted = degeneracy_rows(&f, &pw, 1).iter().all(RatFunc::is_zero);
    rep.note(format!(
        "right-multiplied variant Σ ∇f_(n-k) V^(k+1) = 0: {}",
        if shifted { "holds" } else { "does not hold" }
    ));
    rep
}

/// Verdict at one rational point of `(u, c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleVerdict {
    pub fields: Vec<Rat>,
    pub params: Vec<Rat>,
    /// `None` when a coefficient of `q` has a pole there.
    pub distinct_real_roots: Option<usize>,
    pub square_free_degree: Option<usize>,
}

impl SampleVerdict {
    /// Every root of `q` at this point is real.
    pub fn all_real(&self) -> bool {
        matches!((self.distinct_real_roots, self.square_free_degree), (Some(a), Some(b)) if a == b)
    }
}

/// `det(λI - V) = q(λ)^2` with `q` monic, plus sampled reality checks on `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityCertificate {
    /// Coefficients `[1, a1, ..., am]` of `q`, highest power first.
    pub q: Option<Vec<RatFunc>>,
    pub samples: Vec<SampleVerdict>,
}

impl MultiplicityCertificate {
    pub fn is_perfect_square(&self) -> bool {
        self.q.is_some()
    }

    /// Perfect square and every evaluable sample has only real roots.
    pub fn certified(&self) -> bool {
        self.q.is_some() && self.samples.iter().all(|s| s.distinct_real_roots.is_none() || s.all_real())
    }
}

/// Square root of a monic polynomial given by `[1, f1, ..., f2m]`.
fn monic_sqrt(f: &[RatFunc]) -> Option<Vec<RatFunc>> {
    let deg = f.len() - 1;
    if !deg.is_multiple_of(2) {
        return None;
    }
    let m = deg / 2;
    let half = Rat::new(1.into(), 2.into());
    let mut a = vec![RatFunc::one()];
    for k in 1..=m {
        let mut s = f[k].clone();
        for i in 1..k {
            s -= &(&a[i] * &a[k - i]);
        }
        a.push(s.scale(&half));
    }
    // remaining coefficients of q^2
    for k in m + 1..=deg {
        let mut s = RatFunc::zero();
        for i in k - m..=m {
            s += &(&a[i] * &a[k - i]);
        }
        if s != f[k] {
            return None;
        }
    }
    Some(a)
}

/// Univariate polynomial over `Rat`, lowest power first, no trailing zeros.
type UPoly = Vec<Rat>;

fn trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn deriv(p: &UPoly) -> UPoly {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| c * Rat::from_integer((i as i64).into())).collect())
}

fn divrem(a: &UPoly, b: &UPoly) -> (UPoly, UPoly) {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![Rat::zero(); a.len().saturating_sub(db).max(1)];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        q[shift] = c;
        r = trim(r);
    }
    (trim(q), r)
}

fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let r = divrem(&x, &y).1;
        x = y;
        y = r;
    }
    x
}

/// Number of distinct real roots by a Sturm sequence.
fn sturm_count(p: &UPoly) -> usize {
    if p.len() <= 1 {
        return 0;
    }
    let mut seq = vec![p.clone(), deriv(p)];
    loop {
        let last = &seq[seq.len() - 1];
        if last.is_empty() {
            seq.pop();
            break;
        }
        let r = divrem(&seq[seq.len() - 2], last).1;
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let changes = |signs: Vec<i32>| {
        let s: Vec<i32> = signs.into_iter().filter(|&x| x != 0).collect();
        s.windows(2).filter(|w| w[0] != w[1]).count()
    };
    let sign = |c: &Rat| if c.is_positive() { 1 } else if c.is_negative() { -1 } else { 0 };
    let at_pos: Vec<i32> = seq.iter().map(|q| sign(q.last().unwrap())).collect();
    let at_neg: Vec<i32> = seq
        .iter()
        .map(|q| {
            let s = sign(q.last().unwrap());
            if (q.len() - 1) % 2 == 1 { -s } else { s }
        })
        .collect();
    changes(at_neg) - changes(at_pos)
}

fn sample(q: &[RatFunc], fields: &[Rat], params: &[Rat]) -> SampleVerdict {
    let point = |v: Var| match v {
        Var::Field(i) => fields.get(i as usize).cloned(),
        Var::Param(k) => params.get(k as usize).cloned(),
    };
    let coeffs: Option<Vec<Rat>> = q.iter().rev().map(|c| c.eval(&point)).collect();
    let (real, sf) = match coeffs {
        Some(c) => {
            let p = trim(c);
            let g = gcd(&p, &deriv(&p));
            let s = divrem(&p, &g).0;
            (Some(sturm_count(&s)), Some(s.len() - 1))
        }
        None => (None, None),
    };
    SampleVerdict {
        fields: fields.to_vec(),
        params: params.to_vec(),
        distinct_real_roots: real,
        square_free_degree: sf,
    }
}

/// Tests whether the characteristic polynomial of `v` is `q(λ)^2` and, at each
/// sample point `(u, c)`, whether all roots of `q` are real.
pub fn multiplicity_certificate(v: &Matrix, samples: &[(Vec<Rat>, Vec<Rat>)]) -> MultiplicityCertificate {
    let q = monic_sqrt(&linalg::charpoly(v));
    let samples = match &q {
        Some(q) => samples.iter().map(|(f, p)| sample(q, f, p)).collect(),
        None => Vec::new(),
    };
    MultiplicityCertificate { q, samples }
}
