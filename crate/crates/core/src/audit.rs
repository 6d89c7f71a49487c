//! Structural report for an arbitrary qubit 1→2 Choi operator.

use serde::{Deserialize, Serialize};

use crate::choi::{ChoiOperator, QubitBasis};
use crate::constraints::{self, BroadcastReport};
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::symmetry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapAudit {
    pub hermitian_preserving: bool,
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub min_eigenvalue: f64,
    pub classic_residual_computational: f64,
    pub classic_residual_plus_minus: f64,
    /// Classical consistency in the `{|+⟩, |−⟩}` basis.
    pub classic: bool,
    pub broadcast: BroadcastReport,
    /// `max |twirl(C) − C|` for each symmetry.
    pub phase_residual: f64,
    pub flip_residual: f64,
    pub swap_residual: f64,
    pub clifford_residual: f64,
}

impl MapAudit {
    /// The checks a valid virtual map must pass.
    pub fn is_hptp(&self) -> bool {
        self.hermitian_preserving && self.trace_preserving
    }
}

pub fn audit(c: &ChoiOperator, grid_radii: usize, grid_angles: usize, tol: f64, broadcast_tol: f64) -> Result<MapAudit> {
    if c.dim_in() != 2 || c.dims_out() != [2, 2] {
        return Err(Error::Dimension(format!(
            "audit expects a qubit 1→2 map, got {}→{:?}",
            c.dim_in(),
            c.dims_out()
        )));
    }
    let residual = |t: ChoiOperator| t.matrix().max_abs_diff(c.matrix());
    let comp = constraints::classic_residual(c, &QubitBasis::computational())?;
    let pm = constraints::classic_residual(c, &QubitBasis::plus_minus())?;
    let hp = c.is_hp(tol);
    Ok(MapAudit {
        hermitian_preserving: hp,
        trace_preserving: c.is_tp(tol),
        completely_positive: hp && c.is_cp(tol),
        min_eigenvalue: if hp { min_eigenvalue(&c.matrix().hermitian_part()) } else { f64::NAN },
        classic_residual_computational: comp,
        classic_residual_plus_minus: pm,
        classic: pm <= tol,
        broadcast: constraints::verify_broadcast(c, &constraints::equatorial_grid(grid_radii, grid_angles), broadcast_tol)?,
        phase_residual: residual(symmetry::phase_twirl(c)),
        flip_residual: residual(symmetry::flip_twirl(c)),
        swap_residual: residual(symmetry::swap_twirl(c)),
        clifford_residual: residual(symmetry::clifford_twirl(c)),
    })
}
