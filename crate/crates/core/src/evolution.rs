//! Free center-of-mass evolution `U(t) = exp(-i t (p1 + p2)^2 / 2)` of an
//! initial STMS state, and the one-mode contractive (Yuen) variance.
//!
//! Trajectory quantities come from the evolved coefficients and the moment
//! machinery in [`crate::gaussian`]; the closed forms here are validators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{covariance_of, make_stms, Complex, StmsParams, SymmetricGaussianState,
    Q1, Q2, SINGULAR_EPS};
use crate::measures::{epr_dispersion, epr_stms, g0};

/// Phases with `sin(phi0)` below this are treated as non-contractive.
const PHASE_EPS: f64 = 1e-12;

/// Tangency tolerance on the minimum of `4 Omega^2`.
const TANGENCY_TOL: f64 = 1e-9;

/// Initial state plus a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub params: StmsParams,
    pub t_grid: Vec<f64>,
}

impl EvolutionSpec {
    pub fn new(params: StmsParams, t_grid: Vec<f64>) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(Error::InvalidParams("empty time grid".into()));
        }
        if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParams("times must be finite and >= 0".into()));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
        }
        Ok(Self { params, t_grid })
    }

    /// `steps + 1` equally spaced times on `[0, t_max]`.
    pub fn uniform(params: StmsParams, t_max: f64, steps: usize) -> Result<Self> {
        if steps < 1 || !(t_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need t_max > 0 and steps >= 1 (got {t_max}, {steps})"
            )));
        }
        Self::new(params, uniform_grid(t_max, steps))
    }
}

pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub contractive: bool,
    pub t_min: Option<f64>,
    pub var_min: Option<f64>,
    pub t_separable: Option<f64>,
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParams(format!("time t = {t} must be finite and >= 0")));
    }
    Ok(())
}

/// Evolved coefficients `(alpha(t), gamma(t))`.
pub fn com_evolve(params: StmsParams, t: f64) -> Result<SymmetricGaussianState> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(make_stms(params));
    }
    let l = params.lambda0();
    let one = Complex::new(1.0, 0.0);
    let it = Complex::new(0.0, t);
    let one_minus_sq = one - l * l;
    let d = one_minus_sq + 2.0 * it * (one - l) * (one - l);
    if d.norm() < SINGULAR_EPS {
        return Err(Error::DegenerateEvolution(d.norm()));
    }
    let alpha = (one + l * l + it * one_minus_sq) / d;
    let gamma = -(2.0 * l + it * one_minus_sq) / d;
    SymmetricGaussianState::new(alpha, gamma)
}

/// `<q1^2>_t` from the second moments of the evolved state.
pub fn variance_q1_at(params: StmsParams, t: f64) -> Result<f64> {
    let cov = covariance_of(&com_evolve(params, t)?)?;
    debug_assert!((cov.get(Q1, Q1) - cov.get(Q2, Q2)).abs() <= 1e-14 * cov.get(Q1, Q1));
    Ok(cov.get(Q1, Q1))
}

/// `cosh(2 s0)/2 + g0 t + F0 t^2 / 2`.
pub fn variance_q1_closed(params: StmsParams, t: f64) -> f64 {
    0.5 * (2.0 * params.s0()).cosh() + g0(params) * t + 0.5 * epr_stms(params) * t * t
}

fn is_contractive(params: StmsParams) -> bool {
    params.s0() > 0.0 && params.phi0().sin() > PHASE_EPS
}

/// Location and depth of the position-variance contraction.
pub fn contraction_minimum(params: StmsParams) -> ContractionReport {
    if !is_contractive(params) {
        return ContractionReport {
            contractive: false,
            t_min: None,
            var_min: None,
            t_separable: None,
        };
    }
    let f0 = epr_stms(params);
    let g = g0(params);
    ContractionReport {
        contractive: true,
        t_min: Some(-g / f0),
        var_min: Some(0.5 * (2.0 * params.s0()).cosh() - g * g / (2.0 * f0)),
        t_separable: separability_time(params),
    }
}

/// Golden-section minimum of the moment-computed variance on `[0, 4 t_min]`.
pub fn numeric_variance_minimum(params: StmsParams) -> Result<Option<(f64, f64)>> {
    let Some(t_min) = contraction_minimum(params).t_min else {
        return Ok(None);
    };
    let mut err = None;
    let (t, v) = golden_section_min(
        |t| match variance_q1_at(params, t) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        0.0,
        4.0 * t_min,
        1e-10,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(Some((t, v))),
    }
}

/// `4 Omega(t)^2 = (cosh(2 s0) + g0 t)^2 + t^2`.
pub fn omega_sq_closed(params: StmsParams, t: f64) -> f64 {
    let c = (2.0 * params.s0()).cosh() + g0(params) * t;
    c * c + t * t
}

/// First time after 0 at which the two modes disentangle, if any.
pub fn separability_time(params: StmsParams) -> Option<f64> {
    if !is_contractive(params) {
        return None;
    }
    let c = (2.0 * params.s0()).cosh();
    let g = g0(params);
    let t_extremum = -c * g / (1.0 + g * g);
    let min = c * c / (1.0 + g * g);
    if (min - 1.0).abs() <= TANGENCY_TOL {
        return Some(t_extremum);
    }
    if min > 1.0 {
        return None;
    }
    Some(bisect(|t| omega_sq_closed(params, t) - 1.0, 0.0, t_extremum, 1e-10))
}

/// Largest relative deviation of `F(t)` from `F0` over the grid.
pub fn epr_invariance_check(params: StmsParams, t_grid: &[f64]) -> Result<f64> {
    let f0 = epr_stms(params);
    let mut worst = 0.0f64;
    for &t in t_grid {
        let f = epr_dispersion(&com_evolve(params, t)?)?;
        worst = worst.max((f - f0).abs() / f0);
    }
    Ok(worst)
}

/// One-mode exponent `a = (1 - lambda)/(1 + lambda)`, `lambda = -exp(i phi) tanh r`.
fn yuen_exponent(r: f64, phi: f64) -> Complex {
    let l = -r.tanh() * Complex::from_polar(1.0, phi);
    (1.0 - l) / (1.0 + l)
}

/// Position variance of a one-mode squeezed state after free evolution
/// `exp(-i t p^2 / 2)`, from the exponent flow `a(t) = a / (1 + i a t)`.
pub fn yuen_variance(r: f64, phi: f64, t: f64) -> f64 {
    let a = yuen_exponent(r, phi);
    let at = a / (1.0 + Complex::new(0.0, t) * a);
    0.5 / at.re
}

pub fn yuen_variance_closed(r: f64, phi: f64, t: f64) -> f64 {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    0.5 * (c - phi.cos() * s) - t * phi.sin() * s + 0.5 * t * t * (c + phi.cos() * s)
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
