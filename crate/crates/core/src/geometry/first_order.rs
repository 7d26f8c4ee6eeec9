//! First-order operators `g^{ij} ∂_x + Γ^{ij}_k u^k_x`, local and with a
//! hydrodynamic nonlocal tail.

use crate::kernel::{rat, RatFunc};

use super::linalg::{self, zeros3, Matrix, Tensor3};
use super::{check_dim, partials, ConditionReport, GeometryError, Metric};

/// Contravariant connection symbols `Γ^{ij}_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    upper: Tensor3,
}

impl Connection {
    pub fn new(upper: Tensor3) -> Result<Self, GeometryError> {
        let n = upper.len();
        if upper.iter().any(|m| !linalg::is_square(m, n)) {
            return Err(GeometryError::DimensionMismatch(format!("connection must be {n}x{n}x{n}")));
        }
        Ok(Connection { upper })
    }

    pub fn zero(n: usize) -> Self {
        Connection { upper: zeros3(n) }
    }

    pub fn n(&self) -> usize {
        self.upper.len()
    }

    pub fn upper(&self) -> &Tensor3 {
        &self.upper
    }

    /// `Γ^i_{jk} = -g_{js} Γ^{si}_k`.
    pub fn lower(&self, metric: &Metric) -> Tensor3 {
        let n = self.n();
        let g = metric.low();
        let mut out = zeros3(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s: RatFunc = (0..n)
                        .filter(|&s| !g[j][s].is_zero())
                        .map(|s| &g[j][s] * &self.upper[s][i][k])
                        .sum();
                    out[i][j][k] = -s;
                }
            }
        }
        out
    }

    /// Levi-Civita connection of `metric`, raised to `Γ^{ij}_k = -g^{is} Γ^j_{sk}`.
    pub fn levi_civita(metric: &Metric) -> Self {
        let n = metric.n();
        let gl = metric.low();
        let gu = metric.up();
        let dg = partials(gl);
        let half = rat(1, 2);
        let mut chr = zeros3(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = RatFunc::zero();
                    for l in 0..n {
                        if gu[i][l].is_zero() {
                            continue;
                        }
                        let t = &(&dg[k][l][j] + &dg[j][l][k]) - &dg[l][j][k];
                        acc += &(&gu[i][l] * &t);
                    }
                    chr[i][j][k] = acc.scale(&half);
                }
            }
        }
        let mut upper = zeros3(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s: RatFunc = (0..n)
                        .filter(|&s| !gu[i][s].is_zero())
                        .map(|s| &gu[i][s] * &chr[j][s][k])
                        .sum();
                    upper[i][j][k] = -s;
                }
            }
        }
        Connection { upper }
    }
}

fn check_inputs(metric: &Metric, conn: &Connection) -> Result<usize, GeometryError> {
    let n = metric.n();
    if conn.n() != n {
        return Err(GeometryError::DimensionMismatch(format!("connection must be {n}x{n}x{n}")));
    }
    Ok(n)
}

/// `R^{ij}_{kl} = Γ^{ij}_{l,k} - Γ^{ij}_{k,l} + Γ^i_{ks}Γ^{sj}_l - Γ^j_{ks}Γ^{si}_l`,
/// indexed `[i][j][k][l]`.
pub fn curvature(metric: &Metric, conn: &Connection) -> Result<Vec<Tensor3>, GeometryError> {
    let n = check_inputs(metric, conn)?;
    let up = conn.upper();
    let lo = conn.lower(metric);
    let dgam: Vec<Tensor3> = (0..n)
        .map(|m| up.iter().map(|a| a.iter().map(|r| r.iter().map(|x| x.partial(m)).collect()).collect()).collect())
        .collect();
    let mut r = vec![zeros3(n); n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = &dgam[k][i][j][l] - &dgam[l][i][j][k];
                    for s in 0..n {
                        acc += &(&lo[i][k][s] * &up[s][j][l]);
                        acc -= &(&lo[j][k][s] * &up[s][i][l]);
                    }
                    r[i][j][k][l] = acc;
                }
            }
        }
    }
    Ok(r)
}

/// Symmetry of `g^{ij}`, compatibility `g^{ij}_{,k} = Γ^{ij}_k + Γ^{ji}_k`,
/// `g^{ik}Γ^{jl}_k = g^{jk}Γ^{il}_k` and vanishing curvature.
pub fn first_order_hamiltonian_check(metric: &Metric, conn: &Connection) -> Result<ConditionReport, GeometryError> {
    let n = check_inputs(metric, conn)?;
    let g = metric.up();
    let up = conn.upper();
    let dg = partials(g);
    let mut rep = ConditionReport::new("first-order Hamiltonian conditions");
    for i in 0..n {
        for j in 0..n {
            rep.check("metric-symmetry", &[i, j], &g[i][j] - &g[j][i]);
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = &(&dg[k][i][j] - &up[i][j][k]) - &up[j][i][k];
                rep.check("metric-connection-compatibility", &[i, j, k], v);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let v: RatFunc = (0..n).map(|k| &(&g[i][k] * &up[j][l][k]) - &(&g[j][k] * &up[i][l][k])).sum();
                rep.check("connection-symmetry", &[i, j, l], v);
            }
        }
    }
    let r = curvature(metric, conn)?;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    rep.check("curvature", &[i, j, k, l], r[i][j][k][l].clone());
                }
            }
        }
    }
    Ok(rep)
}

/// `g^{ik}V^j_k = g^{jk}V^i_k` and `g^{ik}(∇_k V^j_h - ∇_h V^j_k) = 0`.
pub fn tsarev_check(metric: &Metric, conn: &Connection, v: &Matrix) -> Result<ConditionReport, GeometryError> {
    let n = check_inputs(metric, conn)?;
    metric.require_symmetric("metric")?;
    check_dim(v, n, "velocity matrix")?;
    let g = metric.up();
    let lo = conn.lower(metric);
    let dv = partials(v);
    let mut rep = ConditionReport::new("compatibility with the hydrodynamic system");
    for i in 0..n {
        for j in 0..n {
            let x: RatFunc = (0..n).map(|k| &(&g[i][k] * &v[j][k]) - &(&g[j][k] * &v[i][k])).sum();
            rep.check("velocity-metric-symmetry", &[i, j], x);
        }
    }
    // ∇_k V^j_h = ∂_k V^j_h + Γ^j_{ks} V^s_h - Γ^s_{kh} V^j_s
    let mut nabla = zeros3(n);
    for k in 0..n {
        for j in 0..n {
            for h in 0..n {
                let mut acc = dv[k][j][h].clone();
                for s in 0..n {
                    acc += &(&lo[j][k][s] * &v[s][h]);
                    acc -= &(&lo[s][k][h] * &v[j][s]);
                }
                nabla[k][j][h] = acc;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for h in 0..n {
                let x: RatFunc = (0..n)
                    .filter(|&k| !g[i][k].is_zero())
                    .map(|k| &g[i][k] * &(&nabla[k][j][h] - &nabla[h][j][k]))
                    .sum();
                rep.check("covariant-curl", &[i, j, h], x);
            }
        }
    }
    Ok(rep)
}

/// The coefficient families of `p_xx`, `u_x p_x`, `u_xx p` and `u_x u_x p`
/// in the covering residual of a first-order operator, written out in terms
/// of `g`, `Γ` and `V` without using the Hamiltonian property.
pub fn expanded_first_order_conditions(
    metric: &Metric,
    conn: &Connection,
    v: &Matrix,
) -> Result<ConditionReport, GeometryError> {
    let n = check_inputs(metric, conn)?;
    check_dim(v, n, "velocity matrix")?;
    let g = metric.up();
    let gam = conn.upper();
    let dg = partials(g);
    let dv = partials(v); // dv[m][j][k] = V^j_{k,m}
    let ddv: Vec<Vec<Matrix>> = dv.iter().map(partials).collect(); // ddv[m][l][j][k] = V^j_{k,ml}
    let dgam: Vec<Tensor3> = (0..n)
        .map(|m| gam.iter().map(|a| a.iter().map(|r| r.iter().map(|x| x.partial(m)).collect()).collect()).collect())
        .collect(); // dgam[k][i][j][m] = Γ^{ij}_{m,k}
    let mut rep = ConditionReport::new("expanded first-order conditions");

    for i in 0..n {
        for j in 0..n {
            let x: RatFunc = (0..n).map(|k| &(&v[i][k] * &g[k][j]) - &(&v[j][k] * &g[k][i])).sum();
            rep.check("coefficient-p_xx", &[i, j], x);
        }
    }
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                let mut x = RatFunc::zero();
                for k in 0..n {
                    x += &(&dg[k][i][j] * &v[k][m]);
                    x += &(&g[i][k] * &(&dv[m][j][k] - &dv[k][j][m]));
                    x += &(&g[i][k] * &dv[m][j][k]);
                    x += &(&gam[i][k][m] * &v[j][k]);
                    x -= &(&dv[k][i][m] * &g[k][j]);
                    x -= &(&v[i][k] * &dg[m][k][j]);
                    x -= &(&v[i][k] * &gam[k][j][m]);
                }
                rep.check("coefficient-u_x-p_x", &[i, j, m], x);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for h in 0..n {
                let mut x = RatFunc::zero();
                for k in 0..n {
                    x += &(&g[i][k] * &(&dv[h][j][k] - &dv[k][j][h]));
                    x += &(&gam[i][j][k] * &v[k][h]);
                    x -= &(&gam[k][j][h] * &v[i][k]);
                }
                rep.check("coefficient-u_xx-p", &[i, j, h], x);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let mut x = RatFunc::zero();
                    for k in 0..n {
                        let t = &(&(&ddv[l][m][j][k] + &ddv[m][l][j][k]) - &ddv[l][k][j][m]) - &ddv[m][k][j][l];
                        x += &(&g[i][k] * &t);
                        x += &(&dgam[k][i][j][m] * &v[k][l]);
                        x += &(&dgam[k][i][j][l] * &v[k][m]);
                        x += &(&gam[i][j][k] * &dv[m][k][l]);
                        x += &(&gam[i][j][k] * &dv[l][k][m]);
                        x += &(&gam[i][k][l] * &dv[m][j][k]);
                        x += &(&gam[i][k][m] * &dv[l][j][k]);
                        x -= &(&gam[i][k][l] * &dv[k][j][m]);
                        x -= &(&gam[i][k][m] * &dv[k][j][l]);
                        x -= &(&gam[k][j][m] * &dv[k][i][l]);
                        x -= &(&gam[k][j][l] * &dv[k][i][m]);
                        x -= &(&dgam[l][k][j][m] * &v[i][k]);
                        x -= &(&dgam[m][k][j][l] * &v[i][k]);
                    }
                    rep.check("coefficient-u_x-u_x-p", &[i, j, l, m], x);
                }
            }
        }
    }
    Ok(rep)
}

/// Conditions for `g^{ij}∂_x + Γ^{ij}_k u^k_x + W^i_k u^k_x ∂_x^{-1} W^j_h u^h_x`
/// to be compatible with `u_t = V u_x`: the two local conditions, `WV = VW`,
/// and vanishing of the curvature/tail combination in the `u_x u_x p`
/// coefficients. Only these conditions are checked.
pub fn nonlocal_first_order_check(
    metric: &Metric,
    conn: &Connection,
    w: &Matrix,
    v: &Matrix,
) -> Result<ConditionReport, GeometryError> {
    let n = check_inputs(metric, conn)?;
    check_dim(w, n, "tail matrix")?;
    let mut rep = ConditionReport::new("nonlocal first-order compatibility");
    rep.absorb(tsarev_check(metric, conn, v)?);
    let wv = linalg::mul(w, v);
    let vw = linalg::mul(v, w);
    for i in 0..n {
        for j in 0..n {
            rep.check("tail-velocity-commutation", &[i, j], &wv[i][j] - &vw[i][j]);
        }
    }
    let r = curvature(metric, conn)?;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let mut x = RatFunc::zero();
                    for k in 0..n {
                        x += &(&r[i][j][k][l] * &v[k][m]);
                        x += &(&r[i][j][k][m] * &v[k][l]);
                        x += &(&(&w[i][l] * &v[j][k]) * &w[k][m]);
                        x += &(&(&w[i][m] * &v[j][k]) * &w[k][l]);
                        x -= &(&(&v[i][k] * &w[k][l]) * &w[j][m]);
                        x -= &(&(&v[i][k] * &w[k][m]) * &w[j][l]);
                    }
                    rep.check("curvature-tail", &[i, j, l, m], x);
                }
            }
        }
    }
    rep.note("verdict covers the stated conditions only");
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_ratfunc;

    fn m(rows: &[&[&str]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|s| parse_ratfunc(s).unwrap()).collect()).collect()
    }

    fn id2() -> Metric {
        Metric::upper(m(&[&["1", "0"], &["0", "1"]])).unwrap()
    }

    #[test]
    fn flat_identity_passes() {
        assert!(first_order_hamiltonian_check(&id2(), &Connection::zero(2)).unwrap().pass);
    }

    #[test]
    fn scalar_metric() {
        let g = Metric::upper(m(&[&["u1"]])).unwrap();
        let conn = Connection::new(vec![m(&[&["1/2"]])]).unwrap();
        assert!(first_order_hamiltonian_check(&g, &conn).unwrap().pass);
    }

    #[test]
    fn compatibility_violation_is_located() {
        let mut up = zeros3(2);
        up[0][0][0] = RatFunc::one();
        let rep = first_order_hamiltonian_check(&id2(), &Connection::new(up).unwrap()).unwrap();
        assert!(!rep.pass);
        let bad: Vec<_> = rep.residuals_of("metric-connection-compatibility").collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].indices, vec![0, 0, 0]);
        assert_eq!(bad[0].value, RatFunc::int(-2));
    }

    #[test]
    fn polar_levi_civita_is_flat() {
        let g = Metric::lower(m(&[&["1", "0"], &["0", "u1^2"]])).unwrap();
        let conn = Connection::levi_civita(&g);
        let r = curvature(&g, &conn).unwrap();
        assert!(r.iter().flatten().flatten().flatten().all(RatFunc::is_zero));
        assert!(first_order_hamiltonian_check(&g, &conn).unwrap().pass);
    }

    #[test]
    fn tsarev_examples() {
        let flat = Connection::zero(2);
        assert!(tsarev_check(&id2(), &flat, &m(&[&["1", "0"], &["0", "1"]])).unwrap().pass);
        assert!(tsarev_check(&id2(), &flat, &m(&[&["u1", "u2"], &["u2", "u1"]])).unwrap().pass);
        assert!(!tsarev_check(&id2(), &flat, &m(&[&["u2", "0"], &["0", "u1"]])).unwrap().pass);
    }

    #[test]
    fn expanded_examples() {
        let flat = Connection::zero(2);
        assert!(expanded_first_order_conditions(&id2(), &flat, &m(&[&["u1", "u2"], &["u2", "u1"]])).unwrap().pass);
        let rep = expanded_first_order_conditions(&id2(), &flat, &m(&[&["u2", "0"], &["0", "u1"]])).unwrap();
        assert!(!rep.family_passes("coefficient-u_xx-p"));
    }

    #[test]
    fn nonlocal_scalar_case() {
        let g = Metric::upper(m(&[&["1"]])).unwrap();
        let rep =
            nonlocal_first_order_check(&g, &Connection::zero(1), &m(&[&["u1^2 + 1"]]), &m(&[&["1/(u1 + 1)"]])).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn degenerate_metric_rejected() {
        assert_eq!(Metric::upper(m(&[&["u1", "u1"], &["1", "1"]])), Err(GeometryError::DegenerateMetric));
    }
}
