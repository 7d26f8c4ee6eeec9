//! Evolutionary systems `u^i_t = f^i(u, u_x, u_xx, ...)`.

use crate::kernel::{DiffPoly, RatFunc};

use super::CoveringError;

/// Structural tag of a system; the matrices are kept for the classifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemKind {
    General,
    /// `u^i_t = V^i_j(u) u^j_x`.
    Hydrodynamic(Vec<Vec<RatFunc>>),
    /// `u^i_t = D_x V^i(u)`.
    Conservative(Vec<RatFunc>),
    /// `b^i_t = V^i(b_x)`, stored in the variables `u^i = b^i_x`.
    Potential(Vec<RatFunc>),
}

/// An evolutionary system.
///
/// For potential systems the stored jet `u^i_s` stands for `b^i_{s+1}`; the
/// `jet_offset` of 1 records that shift so that linearization and the
/// adjoint pick up one extra x-derivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionSystem {
    n: usize,
    fluxes: Vec<DiffPoly>,
    kind: SystemKind,
    jet_offset: usize,
}

fn check_square(v: &[Vec<RatFunc>]) -> Result<usize, CoveringError> {
    let n = v.len();
    if v.iter().any(|row| row.len() != n) {
        return Err(CoveringError::DimensionMismatch(format!("velocity matrix is not {n}x{n}")));
    }
    Ok(n)
}

impl EvolutionSystem {
    pub fn general(fluxes: Vec<DiffPoly>) -> Result<Self, CoveringError> {
        let n = fluxes.len();
        if fluxes.iter().any(|f| !f.is_odd_free()) {
            return Err(CoveringError::OddInSystem);
        }
        if let Some(f) = fluxes.iter().find(|f| f.field_arity() > n) {
            return Err(CoveringError::DimensionMismatch(format!("flux {f} refers to more than {n} fields")));
        }
        Ok(EvolutionSystem { n, fluxes, kind: SystemKind::General, jet_offset: 0 })
    }

    pub fn hydrodynamic(v: Vec<Vec<RatFunc>>) -> Result<Self, CoveringError> {
        let n = check_square(&v)?;
        let fluxes = (0..n)
            .map(|i| (0..n).map(|j| DiffPoly::u(j, 1).scale(&v[i][j])).sum())
            .collect();
        Ok(EvolutionSystem { n, fluxes, kind: SystemKind::Hydrodynamic(v), jet_offset: 0 })
    }

    pub fn conservative(flux: Vec<RatFunc>) -> Result<Self, CoveringError> {
        let n = flux.len();
        let fluxes = flux.iter().map(|f| DiffPoly::from_ratfunc(f.clone()).total_x()).collect();
        Ok(EvolutionSystem { n, fluxes, kind: SystemKind::Conservative(flux), jet_offset: 0 })
    }

    /// `b^i_t = V^i(b_x)` in potential coordinates.
    pub fn potential(flux: Vec<RatFunc>) -> Result<Self, CoveringError> {
        let n = flux.len();
        let fluxes = flux.iter().cloned().map(DiffPoly::from_ratfunc).collect();
        Ok(EvolutionSystem { n, fluxes, kind: SystemKind::Potential(flux), jet_offset: 1 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fluxes(&self) -> &[DiffPoly] {
        &self.fluxes
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn jet_offset(&self) -> usize {
        self.jet_offset
    }

    /// Velocity matrix `V^i_j` for hydrodynamic and conservative systems
    /// (the flux Jacobian in the conservative case).
    pub fn velocity_matrix(&self) -> Option<Vec<Vec<RatFunc>>> {
        match &self.kind {
            SystemKind::Hydrodynamic(v) => Some(v.clone()),
            SystemKind::Conservative(f) | SystemKind::Potential(f) => {
                Some(f.iter().map(|fi| (0..self.n).map(|j| fi.partial(j)).collect()).collect())
            }
            SystemKind::General => None,
        }
    }

    /// Partial derivatives `∂f^i/∂u^j_s`, keyed by the effective derivative
    /// order `s + jet_offset`.
    pub(crate) fn symbol(&self) -> Vec<Vec<Vec<(usize, DiffPoly)>>> {
        (0..self.n)
            .map(|i| {
                let f = &self.fluxes[i];
                let top = f.max_order() as usize;
                (0..self.n)
                    .map(|j| {
                        (0..=top)
                            .filter_map(|s| {
                                let d = f.partial_u(j, s);
                                (!d.is_zero()).then_some((s + self.jet_offset, d))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}
