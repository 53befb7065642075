//! Mass and energy time series.

use serde::{Deserialize, Serialize};

use super::coeffs::CoefficientSet;
use super::operator::Operator;
use super::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: Vec<f64>,
    /// ‖u(t)‖ in discrete L².
    pub mass: Vec<f64>,
    /// A[u, u] with A₁.
    pub energy: Vec<f64>,
}

impl Diagnostics {
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass.first().copied().unwrap_or(0.0);
        if m0 == 0.0 {
            return self.mass.iter().copied().fold(0.0, f64::max);
        }
        self.mass.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max)
    }
}

/// Evaluated on the stored snapshots.
pub fn mass_and_energy_diagnostics(traj: &Trajectory, coeffs: &CoefficientSet) -> Diagnostics {
    let op = Operator::laplacian(&traj.grid).with_contrast(&traj.grid, |x| coeffs.k1(x));
    let mut d = Diagnostics { t: vec![], mass: vec![], energy: vec![] };
    for s in &traj.snapshots {
        d.t.push(s.t);
        d.mass.push(s.l2_norm());
        d.energy.push(op.energy(&s.values));
    }
    d
}
