//! Third-order operators `∂_x(g^{ij}∂_x + c^{ij}_k u^k_x)∂_x`, local and with
//! tails `c^α w^i_{αk} u^k_x ∂_x^{-1} w^j_{αh} u^h_x` inside.

use crate::covering::{extract_conditions, linearize, EvolutionSystem};
use crate::kernel::{rat, Rat, RatFunc};

use super::linalg::{self, zeros3, Matrix, Tensor3};
use super::{check_dim, partials, potential_tail_characteristic, ConditionReport, GeometryError, Metric};

/// Metric `g_{ij}` and the coefficients `c^{ij}_k`, `c_{ijk} = g_{iq} g_{jp} c^{pq}_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThirdOrderData {
    metric: Metric,
    c_up: Tensor3,
    c_low: Tensor3,
}

/// One nonlocal summand: weight `c^α` and matrix `w^i_{αj}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonlocalTail {
    pub weight: Rat,
    pub w: Matrix,
}

impl ThirdOrderData {
    /// Takes `c_{nkm} = (g_{mn,k} - g_{kn,m}) / 3` and raises it.
    pub fn from_metric(g_low: Matrix) -> Result<Self, GeometryError> {
        let metric = Metric::lower(g_low)?;
        let n = metric.n();
        let dg = partials(metric.low());
        let third = rat(1, 3);
        let mut c_low = zeros3(n);
        for a in 0..n {
            for k in 0..n {
                for m in 0..n {
                    c_low[a][k][m] = (&dg[k][m][a] - &dg[m][k][a]).scale(&third);
                }
            }
        }
        let c_up = raise(&metric, &c_low);
        Ok(ThirdOrderData { metric, c_up, c_low })
    }

    /// Uses the given `c^{ij}_k` as is.
    pub fn new(g_low: Matrix, c_up: Tensor3) -> Result<Self, GeometryError> {
        let metric = Metric::lower(g_low)?;
        let n = metric.n();
        if c_up.len() != n || c_up.iter().any(|m| !linalg::is_square(m, n)) {
            return Err(GeometryError::DimensionMismatch(format!("c must be {n}x{n}x{n}")));
        }
        let g = metric.low();
        let mut c_low = zeros3(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = RatFunc::zero();
                    for q in 0..n {
                        if g[i][q].is_zero() {
                            continue;
                        }
                        for p in 0..n {
                            if !g[j][p].is_zero() && !c_up[p][q][k].is_zero() {
                                acc += &(&(&g[i][q] * &g[j][p]) * &c_up[p][q][k]);
                            }
                        }
                    }
                    c_low[i][j][k] = acc;
                }
            }
        }
        Ok(ThirdOrderData { metric, c_up, c_low })
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn c_up(&self) -> &Tensor3 {
        &self.c_up
    }

    pub fn c_low(&self) -> &Tensor3 {
        &self.c_low
    }

    /// `c^s_{ml} = g^{sq} c_{qml}`, indexed `[s][m][l]`.
    pub fn c_mixed(&self) -> Tensor3 {
        let n = self.n();
        let gu = self.metric.up();
        let mut out = zeros3(n);
        for s in 0..n {
            for m in 0..n {
                for l in 0..n {
                    out[s][m][l] = (0..n)
                        .filter(|&q| !gu[s][q].is_zero())
                        .map(|q| &gu[s][q] * &self.c_low[q][m][l])
                        .sum();
                }
            }
        }
        out
    }
}

/// `c^{pq}_k = g^{qi} g^{pj} c_{ijk}`.
fn raise(metric: &Metric, c_low: &Tensor3) -> Tensor3 {
    let n = metric.n();
    let gu = metric.up();
    let mut out = zeros3(n);
    for p in 0..n {
        for q in 0..n {
            for k in 0..n {
                let mut acc = RatFunc::zero();
                for i in 0..n {
                    if gu[q][i].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        if !gu[p][j].is_zero() && !c_low[i][j][k].is_zero() {
                            acc += &(&(&gu[q][i] * &gu[p][j]) * &c_low[i][j][k]);
                        }
                    }
                }
                out[p][q][k] = acc;
            }
        }
    }
    out
}

fn lower_tail(g: &Matrix, w: &Matrix) -> Matrix {
    linalg::mul(g, w)
}

/// Symmetry, the formula for `c`, the cyclic identity and, with `tails`,
/// the flatness condition modified by `Σ_α c^α w_{αml} w_{αnk}`.
fn structure_checks(d: &ThirdOrderData, tails: &[NonlocalTail], rep: &mut ConditionReport) {
    let n = d.n();
    let g = d.metric.low();
    let dg = partials(g);
    let third = rat(1, 3);
    for i in 0..n {
        for j in 0..n {
            rep.check("metric-symmetry", &[i, j], &g[i][j] - &g[j][i]);
        }
    }
    for a in 0..n {
        for k in 0..n {
            for m in 0..n {
                let expect = (&dg[k][m][a] - &dg[m][k][a]).scale(&third);
                rep.check("c-from-metric", &[a, k, m], &d.c_low[a][k][m] - &expect);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = &(&dg[k][i][j] + &dg[i][j][k]) + &dg[j][k][i];
                rep.check("cyclic-metric-derivative", &[i, j, k], x);
            }
        }
    }
    let cm = d.c_mixed();
    let lowered: Vec<(Rat, Matrix)> = tails.iter().map(|t| (t.weight.clone(), lower_tail(g, &t.w))).collect();
    for a in 0..n {
        for m in 0..n {
            for l in 0..n {
                for k in 0..n {
                    let mut x = d.c_low[a][m][l].partial(k);
                    for s in 0..n {
                        if !cm[s][m][l].is_zero() {
                            x += &(&cm[s][m][l] * &d.c_low[s][a][k]);
                        }
                    }
                    for (c, w) in &lowered {
                        x += &(&w[m][l] * &w[a][k]).scale(c);
                    }
                    rep.check("c-flatness", &[a, m, l, k], x);
                }
            }
        }
    }
}

/// Hamiltonian conditions for the local canonical third-order operator.
pub fn third_order_hamiltonian_check(d: &ThirdOrderData) -> ConditionReport {
    let mut rep = ConditionReport::new("third-order Hamiltonian conditions");
    structure_checks(d, &[], &mut rep);
    rep
}

/// Compatibility with `u_t = (V(u))_x`.
pub fn third_order_compat(d: &ThirdOrderData, flux: &[RatFunc]) -> Result<ConditionReport, GeometryError> {
    let n = d.n();
    if flux.len() != n {
        return Err(GeometryError::DimensionMismatch(format!("expected {n} fluxes")));
    }
    d.metric.require_symmetric("metric")?;
    let g = d.metric.low();
    let gu = d.metric.up();
    let c = &d.c_low;
    let jac = linalg::jacobian(flux);
    let hess = partials(&jac); // hess[j][k][i] = V^k_{,ij}
    let mut rep = ConditionReport::new("third-order compatibility");
    for i in 0..n {
        for j in 0..n {
            let x: RatFunc = (0..n).map(|m| &(&g[i][m] * &jac[m][j]) - &(&g[j][m] * &jac[m][i])).sum();
            rep.check("flux-metric-symmetry", &[i, j], x);
        }
    }
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut x = RatFunc::zero();
                for m in 0..n {
                    x += &(&c[m][k][l] * &jac[m][i]);
                    x += &(&c[m][i][k] * &jac[m][l]);
                    x += &(&c[m][l][i] * &jac[m][k]);
                }
                rep.check("flux-c-cyclic", &[i, k, l], x);
            }
        }
    }
    // t[s][i][j] = c_{smj} V^m_{,i}
    let mut t = zeros3(n);
    for s in 0..n {
        for i in 0..n {
            for j in 0..n {
                t[s][i][j] = (0..n).map(|m| &c[s][m][j] * &jac[m][i]).sum();
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut x = hess[j][k][i].clone();
                for s in 0..n {
                    if gu[k][s].is_zero() {
                        continue;
                    }
                    x -= &(&gu[k][s] * &(&t[s][i][j] + &t[s][j][i]));
                }
                rep.check("flux-second-derivatives", &[k, i, j], x);
            }
        }
    }
    Ok(rep)
}

/// Conditions for the operator with nonlocal tails and its compatibility
/// with `u_t = (V(u))_x`; also confirms that each `φ^i_α = w^i_{αk} b^k_xx`
/// is a symmetry of the potential system.
pub fn third_order_nonlocal_checks(
    d: &ThirdOrderData,
    tails: &[NonlocalTail],
    flux: &[RatFunc],
) -> Result<ConditionReport, GeometryError> {
    let n = d.n();
    for t in tails {
        check_dim(&t.w, n, "tail matrix")?;
    }
    let g = d.metric.low();
    let cm = d.c_mixed();
    let mut rep = ConditionReport::new("nonlocal third-order conditions");
    structure_checks(d, tails, &mut rep);
    for (alpha, tail) in tails.iter().enumerate() {
        let wl = lower_tail(g, &tail.w);
        for i in 0..n {
            for j in 0..n {
                rep.check("tail-skew", &[alpha, i, j], &wl[i][j] + &wl[j][i]);
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let mut x = wl[i][j].partial(l);
                    for s in 0..n {
                        x -= &(&cm[s][i][j] * &wl[s][l]);
                    }
                    rep.check("tail-parallel", &[alpha, i, j, l], x);
                }
            }
        }
    }
    rep.absorb(third_order_compat(d, flux)?);
    let jac = linalg::jacobian(flux);
    let djac = partials(&jac); // djac[h][k][m] = V^k_{,mh}
    let system = EvolutionSystem::potential(flux.to_vec())?;
    for (alpha, tail) in tails.iter().enumerate() {
        let w = &tail.w;
        let dw = partials(w); // dw[k][i][h] = w^i_{h,k}
        for i in 0..n {
            for h in 0..n {
                for m in 0..n {
                    let mut x = RatFunc::zero();
                    for k in 0..n {
                        x -= &(&dw[k][i][h] * &jac[k][m]);
                        x -= &(&dw[k][i][m] * &jac[k][h]);
                        x -= &(&w[i][k] * &djac[h][k][m]);
                        x -= &(&w[i][k] * &djac[m][k][h]);
                        x += &(&jac[i][k] * &dw[h][k][m]);
                        x += &(&jac[i][k] * &dw[m][k][h]);
                    }
                    rep.check("tail-differential", &[alpha, i, h, m], x);
                }
            }
        }
        let vw = linalg::mul(&jac, w);
        let wv = linalg::mul(w, &jac);
        for i in 0..n {
            for h in 0..n {
                rep.check("tail-commutation", &[alpha, i, h], &vw[i][h] - &wv[i][h]);
            }
        }
        let residual = linearize(&system, &potential_tail_characteristic(w))?;
        rep.family("tail-symmetry");
        for cond in extract_conditions(&residual) {
            rep.check("tail-symmetry", &[alpha, cond.component], cond.coefficient);
        }
    }
    Ok(rep)
}
