//! Entanglement of formation and EPR dispersion of symmetric pure Gaussians.
//!
//! Entropies are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, StmsParams, SymmetricGaussianState, P1, P2, Q1, Q2,
    SINGULAR_EPS};

/// `Omega <= 1/2 + SEPARABILITY_TOL` counts as separable.
pub const SEPARABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub omega: f64,
    pub eof: f64,
    pub separable: bool,
}

/// `x ln x` with the limit value 0 at (and below) 0.
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Symplectic eigenvalue of either one-mode marginal.
pub fn omega_of(state: &SymmetricGaussianState) -> Result<f64> {
    let (a, g) = (state.alpha(), state.gamma());
    let det = (a.re - g.re) * (a.re + g.re);
    if det <= SINGULAR_EPS {
        return Err(Error::SingularState(det));
    }
    Ok(((a.re * a.re + g.im * g.im) / (4.0 * det)).sqrt())
}

/// Marginal von Neumann entropy as a function of the symplectic eigenvalue.
pub fn eof_from_omega(omega: f64) -> f64 {
    let omega = omega.max(0.5);
    xlnx(omega + 0.5) - xlnx(omega - 0.5)
}

pub fn eof_of(state: &SymmetricGaussianState) -> Result<EntanglementReport> {
    let omega = omega_of(state)?;
    Ok(EntanglementReport {
        omega,
        eof: eof_from_omega(omega),
        separable: omega <= 0.5 + SEPARABILITY_TOL,
    })
}

/// Entanglement of a standard two-mode squeezed state with strength `s0`.
pub fn eof_stms(s0: f64) -> f64 {
    let c2 = s0.cosh().powi(2);
    let s2 = s0.sinh().powi(2);
    xlnx(c2) - xlnx(s2)
}

pub fn nats_to_ebits(e: f64) -> f64 {
    e / std::f64::consts::LN_2
}

/// `Delta^2(p1 + p2) + Delta^2(q1 - q2)` from the state coefficients.
pub fn epr_dispersion(state: &SymmetricGaussianState) -> Result<f64> {
    let (a, g) = (state.alpha(), state.gamma());
    let plus = a.re + g.re;
    let minus = a.re - g.re;
    if plus <= SINGULAR_EPS || minus <= SINGULAR_EPS {
        return Err(Error::SingularState(plus.min(minus)));
    }
    Ok((a + g).norm_sqr() / plus + 1.0 / minus)
}

/// The same dispersion read off a covariance matrix.
pub fn epr_dispersion_from_covariance(cov: &CovarianceMatrix) -> f64 {
    let s = |i, j| cov.get(i, j);
    s(P1, P1) + s(P2, P2) + 2.0 * s(P1, P2) + s(Q1, Q1) + s(Q2, Q2) - 2.0 * s(Q1, Q2)
}

/// EPR dispersion of the standard two-mode squeezed state.
pub fn epr_stms(params: StmsParams) -> f64 {
    let x = 2.0 * params.s0();
    2.0 * (x.cosh() + params.phi0().cos() * x.sinh())
}

/// Sufficient (not necessary) entanglement witness `F < 2`.
pub fn epr_witness(state: &SymmetricGaussianState) -> Result<bool> {
    Ok(epr_dispersion(state)? < 2.0)
}

/// Literal phase derivative of [`epr_stms`]: `-2 sin(phi0) sinh(2 s0)`.
#[allow(non_snake_case)]
pub fn dF0_dphi0_exact(params: StmsParams) -> f64 {
    2.0 * g0(params)
}

/// `g0 = -sin(phi0) sinh(2 s0)`, half the phase derivative of the dispersion.
///
/// This is the coefficient that actually multiplies `t` in the position
/// variance and in `4 Omega(t)^2` under center-of-mass evolution.
pub fn g0(params: StmsParams) -> f64 {
    -params.phi0().sin() * (2.0 * params.s0()).sinh()
}
