//! Per-time records combining the evolved state, its entanglement measures
//! and the STMS restoration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::com_evolve;
use crate::gaussian::{covariance_of, display_phase, Complex, StmsParams, SymmetricGaussianState, Q1};
use crate::measures::{eof_from_omega, epr_dispersion, omega_of};
use crate::restore::{fill_undefined_phases, RestoreSolution, RestoreSolver, SolverOptions};

/// Column names, in output order.
pub const COLUMNS: [&str; 14] = [
    "t", "alpha_re", "alpha_im", "gamma_re", "gamma_im", "omega", "eof", "epr_F", "var_q1", "theta",
    "r", "phi", "s", "residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub omega: f64,
    pub eof: f64,
    #[serde(rename = "epr_F")]
    pub epr_f: f64,
    pub var_q1: f64,
    pub theta: f64,
    pub r: f64,
    /// Restored phase in `[0, 2 pi)`.
    pub phi: f64,
    pub s: f64,
    pub residual: f64,
}

/// Columns that follow from the evolved coefficients alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedColumns {
    pub omega: f64,
    pub eof: f64,
    pub epr_f: f64,
    pub var_q1: f64,
}

impl DerivedColumns {
    pub fn of(state: &SymmetricGaussianState) -> Result<Self> {
        let omega = omega_of(state)?;
        Ok(Self {
            omega,
            eof: eof_from_omega(omega),
            epr_f: epr_dispersion(state)?,
            var_q1: covariance_of(state)?.get(Q1, Q1),
        })
    }
}

impl TrajectoryRecord {
    pub fn new(params: StmsParams, sol: &RestoreSolution) -> Result<Self> {
        let state = com_evolve(params, sol.t)?;
        let d = DerivedColumns::of(&state)?;
        Ok(Self {
            t: sol.t,
            alpha_re: state.alpha().re,
            alpha_im: state.alpha().im,
            gamma_re: state.gamma().re,
            gamma_im: state.gamma().im,
            omega: d.omega,
            eof: d.eof,
            epr_f: d.epr_f,
            var_q1: d.var_q1,
            theta: sol.theta,
            r: sol.r,
            phi: display_phase(sol.phi),
            s: sol.s,
            residual: sol.residual,
        })
    }

    pub fn state(&self) -> Result<SymmetricGaussianState> {
        SymmetricGaussianState::new(
            Complex::new(self.alpha_re, self.alpha_im),
            Complex::new(self.gamma_re, self.gamma_im),
        )
    }

    /// Recomputes the derived columns from the stored coefficients.
    pub fn derived(&self) -> Result<DerivedColumns> {
        DerivedColumns::of(&self.state()?)
    }

    pub fn values(&self) -> [f64; 14] {
        [
            self.t, self.alpha_re, self.alpha_im, self.gamma_re, self.gamma_im, self.omega, self.eof,
            self.epr_f, self.var_q1, self.theta, self.r, self.phi, self.s, self.residual,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        let &[t, alpha_re, alpha_im, gamma_re, gamma_im, omega, eof, epr_f, var_q1, theta, r, phi, s, residual] =
            v
        else {
            return Err(Error::InvalidParams(format!("expected 14 columns, got {}", v.len())));
        };
        Ok(Self {
            t, alpha_re, alpha_im, gamma_re, gamma_im, omega, eof, epr_f, var_q1, theta, r, phi, s, residual,
        })
    }
}

/// A trajectory that may have stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub params: StmsParams,
    pub records: Vec<TrajectoryRecord>,
    /// Set when the restoration failed before the end of the grid.
    pub error: Option<Error>,
}

impl TrajectoryRun {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }
}

/// Evolves and restores on every grid time. A failure keeps the records
/// computed so far.
pub fn run_trajectory(params: StmsParams, t_grid: &[f64], opts: SolverOptions) -> Result<TrajectoryRun> {
    if t_grid.first() != Some(&0.0) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("time grid must start at 0 and increase strictly".into()));
    }
    let mut solver = RestoreSolver::new(params, opts);
    let mut solutions = Vec::with_capacity(t_grid.len());
    let mut error = None;
    for &t in t_grid {
        match solver.advance_to(t) {
            Ok(sol) => solutions.push(sol),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    fill_undefined_phases(&mut solutions);
    let records = solutions
        .iter()
        .map(|sol| TrajectoryRecord::new(params, sol))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryRun { params, records, error })
}
