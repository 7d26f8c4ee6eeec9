//! Second-order operators in canonical form `∂_x g^{ij} ∂_x` with
//! `g_{ij} = T_{ijk} u^k + g0_{ij}`.

use crate::kernel::{Rat, RatFunc};

use super::linalg::{self, zeros, zeros3, Matrix, Tensor3};
use super::{check_dim, check_skew, partials, ConditionReport, GeometryError, Metric};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondOrderData {
    t: Tensor3,
    g0: Matrix,
}

const PERMS: [([usize; 3], bool); 6] = [
    ([0, 1, 2], false),
    ([1, 2, 0], false),
    ([2, 0, 1], false),
    ([1, 0, 2], true),
    ([0, 2, 1], true),
    ([2, 1, 0], true),
];

impl SecondOrderData {
    pub fn new(t: Tensor3, g0: Matrix) -> Result<Self, GeometryError> {
        let n = g0.len();
        check_dim(&g0, n, "g0")?;
        if t.len() != n || t.iter().any(|m| !linalg::is_square(m, n)) {
            return Err(GeometryError::DimensionMismatch(format!("T must be {n}x{n}x{n}")));
        }
        Ok(SecondOrderData { t, g0 })
    }

    /// Builds `T` and `g0` from representative entries extended by total
    /// skew-symmetry (signs follow the permutation parity).
    pub fn alternating(n: usize, t_entries: &[([usize; 3], Rat)], g0_entries: &[([usize; 2], Rat)]) -> Self {
        let mut t = zeros3(n);
        for (idx, v) in t_entries {
            for (p, odd) in PERMS {
                let c = RatFunc::constant(if odd { -v.clone() } else { v.clone() });
                t[idx[p[0]]][idx[p[1]]][idx[p[2]]] = c;
            }
        }
        let mut g0 = zeros(n);
        for ([i, j], v) in g0_entries {
            g0[*i][*j] = RatFunc::constant(v.clone());
            g0[*j][*i] = RatFunc::constant(-v.clone());
        }
        SecondOrderData { t, g0 }
    }

    pub fn n(&self) -> usize {
        self.g0.len()
    }

    pub fn t(&self) -> &Tensor3 {
        &self.t
    }

    pub fn g0(&self) -> &Matrix {
        &self.g0
    }

    /// `g_{ij}(u) = T_{ijk} u^k + g0_{ij}`.
    pub fn g_low(&self) -> Matrix {
        let n = self.n();
        let mut g = self.g0.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !self.t[i][j][k].is_zero() {
                        g[i][j] += &(&self.t[i][j][k] * &RatFunc::field(k));
                    }
                }
            }
        }
        g
    }

    pub fn metric(&self) -> Result<Metric, GeometryError> {
        Metric::lower(self.g_low())
    }
}

/// Constancy and total skew-symmetry of `T` and `g0`.
pub fn second_order_canonical_check(d: &SecondOrderData) -> ConditionReport {
    let n = d.n();
    let mut rep = ConditionReport::new("second-order canonical form");
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                rep.check("constant-coefficients", &[i, j, m], d.g0[i][j].partial(m));
                for k in 0..n {
                    rep.check("constant-coefficients", &[i, j, k, m], d.t[i][j][k].partial(m));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            rep.check("total-skew-symmetry", &[i, j], &d.g0[i][j] + &d.g0[j][i]);
            for k in 0..n {
                let t = &d.t[i][j][k];
                rep.check("total-skew-symmetry", &[i, j, k], t + &d.t[j][i][k]);
                rep.check("total-skew-symmetry", &[i, j, k], t + &d.t[i][k][j]);
                rep.check("total-skew-symmetry", &[i, j, k], t + &d.t[k][j][i]);
            }
        }
    }
    rep
}

/// `g_{qj}V^j_{,p} + g_{pj}V^j_{,q} = 0` and
/// `g_{qk}V^k_{,pl} + g_{pq,k}V^k_{,l} + g_{qk,l}V^k_{,p} = 0`.
pub fn second_order_compat(d: &SecondOrderData, flux: &[RatFunc]) -> Result<ConditionReport, GeometryError> {
    let n = d.n();
    if flux.len() != n {
        return Err(GeometryError::DimensionMismatch(format!("expected {n} fluxes")));
    }
    let g = d.g_low();
    check_skew(&g, "g_low")?;
    if linalg::det(&g).is_zero() {
        return Err(GeometryError::DegenerateMetric);
    }
    let jac = linalg::jacobian(flux);
    let hess = partials(&jac); // hess[l][k][p] = V^k_{,pl}
    let dg = partials(&g);
    let mut rep = ConditionReport::new("second-order compatibility");
    for p in 0..n {
        for q in 0..n {
            let x: RatFunc = (0..n).map(|j| &(&g[q][j] * &jac[j][p]) + &(&g[p][j] * &jac[j][q])).sum();
            rep.check("flux-skew-symmetry", &[p, q], x);
        }
    }
    for p in 0..n {
        for q in 0..n {
            for l in 0..n {
                let mut x = RatFunc::zero();
                for k in 0..n {
                    x += &(&g[q][k] * &hess[l][k][p]);
                    x += &(&dg[k][p][q] * &jac[k][l]);
                    x += &(&dg[l][q][k] * &jac[k][p]);
                }
                rep.check("flux-second-derivatives", &[p, q, l], x);
            }
        }
    }
    Ok(rep)
}
