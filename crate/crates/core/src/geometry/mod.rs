//! Closed-form tensor conditions for homogeneous Hamiltonian operators of
//! orders one to three, compatibility with hydrodynamic-type systems, and
//! classifiers for velocity matrices.
//!
//! Index conventions: `Γ^{ij}_k` is stored as `upper[i][j][k]`, `Γ^i_{jk}` as
//! `lower[i][j][k]`, third-order `c^{ij}_k` as `c_up[i][j][k]` and `c_{ijk}` as
//! `c_low[i][j][k]`. Indices are 0-based in code and 1-based when printed.

mod classify;
mod first_order;
pub mod linalg;
mod report;
mod second_order;
mod third_order;

pub use classify::{
    haantjes, linear_degeneracy_check, multiplicity_certificate, nijenhuis, MultiplicityCertificate,
    SampleVerdict,
};
pub use first_order::{
    curvature, expanded_first_order_conditions, first_order_hamiltonian_check, nonlocal_first_order_check,
    tsarev_check, Connection,
};
pub use linalg::{Matrix, Tensor3};
pub use report::{ConditionReport, Residual};
pub use second_order::{second_order_canonical_check, second_order_compat, SecondOrderData};
pub use third_order::{
    third_order_compat, third_order_hamiltonian_check, third_order_nonlocal_checks, NonlocalTail, ThirdOrderData,
};

use crate::covering::{BivectorForm, CoveringError, EvolutionSystem, SystemKind};
use crate::kernel::{DiffPoly, KernelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate metric: det g = 0")]
    DegenerateMetric,
    #[error("{what} must be symmetric; entry ({i},{j}) differs from ({j},{i})", i = .i + 1, j = .j + 1)]
    NotSymmetric { what: &'static str, i: usize, j: usize },
    #[error("{what} must be skew-symmetric; entry ({i},{j}) is not minus ({j},{i})", i = .i + 1, j = .j + 1)]
    NotSkew { what: &'static str, i: usize, j: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("system is not conservative")]
    NotConservative,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
}

/// Index position of a metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

/// A nondegenerate (co)metric `g^{ij}` or `g_{ij}` with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    g: Matrix,
    inv: Matrix,
    variance: Variance,
}

impl Metric {
    pub fn new(g: Matrix, variance: Variance) -> Result<Self, GeometryError> {
        let n = g.len();
        if !linalg::is_square(&g, n) {
            return Err(GeometryError::DimensionMismatch(format!("metric is not {n}x{n}")));
        }
        let inv = linalg::inverse(&g).ok_or(GeometryError::DegenerateMetric)?;
        Ok(Metric { g, inv, variance })
    }

    pub fn upper(g: Matrix) -> Result<Self, GeometryError> {
        Metric::new(g, Variance::Upper)
    }

    pub fn lower(g: Matrix) -> Result<Self, GeometryError> {
        Metric::new(g, Variance::Lower)
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    /// `g^{ij}`.
    pub fn up(&self) -> &Matrix {
        match self.variance {
            Variance::Upper => &self.g,
            Variance::Lower => &self.inv,
        }
    }

    /// `g_{ij}`.
    pub fn low(&self) -> &Matrix {
        match self.variance {
            Variance::Upper => &self.inv,
            Variance::Lower => &self.g,
        }
    }

    pub fn require_symmetric(&self, what: &'static str) -> Result<(), GeometryError> {
        check_symmetric(&self.g, what)
    }
}

pub(crate) fn check_symmetric(m: &Matrix, what: &'static str) -> Result<(), GeometryError> {
    let n = m.len();
    for i in 0..n {
        for j in i + 1..n {
            if m[i][j] != m[j][i] {
                return Err(GeometryError::NotSymmetric { what, i, j });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_skew(m: &Matrix, what: &'static str) -> Result<(), GeometryError> {
    let n = m.len();
    for i in 0..n {
        for j in i..n {
            if !(&m[i][j] + &m[j][i]).is_zero() {
                return Err(GeometryError::NotSkew { what, i, j });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_dim(m: &Matrix, n: usize, what: &str) -> Result<(), GeometryError> {
    if linalg::is_square(m, n) {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch(format!("{what} must be {n}x{n}")))
    }
}

/// Potential form `b^i_t = V^i(b_x)` of a conservative system.
pub fn potentialize(system: &EvolutionSystem) -> Result<EvolutionSystem, GeometryError> {
    match system.kind() {
        SystemKind::Conservative(v) => Ok(EvolutionSystem::potential(v.clone())?),
        SystemKind::Potential(_) => Ok(system.clone()),
        _ => Err(GeometryError::NotConservative),
    }
}

/// Odd form `-g^{ij}(b_x) p_j` of the canonical second-order operator
/// `∂_x g^{ij} ∂_x` after the potential substitution.
pub fn second_order_potential_form(g_up: &Matrix) -> BivectorForm {
    let n = g_up.len();
    let comps = (0..n)
        .map(|i| (0..n).map(|j| DiffPoly::p(j, 0).scale(&-&g_up[i][j])).sum())
        .collect();
    BivectorForm::new(comps).expect("odd-linear")
}

/// `D(p)^i = D_x(g^{ij} p_{j,xx} + c^{ij}_k u^k_x p_{j,x})` in the original variables.
pub fn third_order_conservative_form(d: &ThirdOrderData) -> BivectorForm {
    let n = d.n();
    let g = d.metric().up();
    let comps = (0..n)
        .map(|i| {
            let mut inner = DiffPoly::zero();
            for j in 0..n {
                inner += &DiffPoly::p(j, 2).scale(&g[i][j]);
                for k in 0..n {
                    let c = &d.c_up()[i][j][k];
                    if !c.is_zero() {
                        inner += &DiffPoly::u(k, 1).checked_mul(&DiffPoly::p(j, 1)).expect("one odd").scale(c);
                    }
                }
            }
            inner.total_x()
        })
        .collect();
    BivectorForm::new(comps).expect("odd-linear")
}

/// `E(p)^i = -g^{ij} p_{j,x} - c^{ij}_k b^k_xx p_j` in potential variables
/// (stored jets shifted by one), without nonlocal tail.
pub fn third_order_potential_form(d: &ThirdOrderData) -> BivectorForm {
    let n = d.n();
    let g = d.metric().up();
    let comps = (0..n)
        .map(|i| {
            let mut e = DiffPoly::zero();
            for j in 0..n {
                e -= &DiffPoly::p(j, 1).scale(&g[i][j]);
                for k in 0..n {
                    let c = &d.c_up()[i][j][k];
                    if !c.is_zero() {
                        e -= &DiffPoly::u(k, 1).checked_mul(&DiffPoly::p(j, 0)).expect("one odd").scale(c);
                    }
                }
            }
            e
        })
        .collect();
    BivectorForm::new(comps).expect("odd-linear")
}

/// `φ^i = w^i_k b^k_xx` in stored potential variables.
pub fn potential_tail_characteristic(w: &Matrix) -> Vec<DiffPoly> {
    let n = w.len();
    (0..n).map(|i| (0..n).map(|k| DiffPoly::u(k, 1).scale(&w[i][k])).sum()).collect()
}

/// `φ^i = W^i_k u^k_x` for a hydrodynamic symmetry.
pub fn hydrodynamic_characteristic(w: &Matrix) -> Vec<DiffPoly> {
    potential_tail_characteristic(w)
}

/// First-order local operator `g^{ij} p_{j,x} + Γ^{ij}_k u^k_x p_j`.
pub fn first_order_form(g_up: &Matrix, conn: &Connection) -> BivectorForm {
    let n = g_up.len();
    let comps = (0..n)
        .map(|i| {
            let mut a = DiffPoly::zero();
            for j in 0..n {
                a += &DiffPoly::p(j, 1).scale(&g_up[i][j]);
                for k in 0..n {
                    let c = &conn.upper()[i][j][k];
                    if !c.is_zero() {
                        a += &DiffPoly::u(k, 1).checked_mul(&DiffPoly::p(j, 0)).expect("one odd").scale(c);
                    }
                }
            }
            a
        })
        .collect();
    BivectorForm::new(comps).expect("odd-linear")
}

pub(crate) fn partial_matrix(m: &Matrix, k: usize) -> Matrix {
    m.iter().map(|r| r.iter().map(|x| x.partial(k)).collect()).collect()
}

pub(crate) fn partials(m: &Matrix) -> Vec<Matrix> {
    (0..m.len()).map(|k| partial_matrix(m, k)).collect()
}
