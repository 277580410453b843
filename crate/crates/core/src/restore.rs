//! Local rotation and squeezing that recast the evolved state as a standard
//! two-mode squeezed (STMS) state.
//!
//! For every time `t` we look for a transform `(theta, r)`, applied
//! identically to both modes, such that the transformed coefficients satisfy
//! `alpha'^2 - gamma'^2 = 1`. The restored state is then described by
//! `lambda' = -tanh(s) exp(i phi)`.
//!
//! The solver is Newton's method on the two real components of the residual
//! with a central-difference Jacobian, continued in `t` from `(0, 0)` at
//! `t = 0`. At `t = 0` every pure rotation solves the condition, so the first
//! steps pick a rotation angle abruptly; after that the branch is smooth.
//! Solutions are reported with `r >= 0` (`(theta, r)` and `(theta + pi, -r)`
//! describe the same transform) and with `theta` unwrapped.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::com_evolve;
use crate::gaussian::{covariance_of, lambda_from_state, wrap_phase, Complex, LocalTransform,
    StmsParams, SymmetricGaussianState, SINGULAR_EPS};
use crate::measures::{eof_of, eof_stms, epr_dispersion, epr_stms};

/// `|lambda'|` below this leaves the restored phase undefined.
const PHASE_UNDEFINED: f64 = 1e-9;

/// With `|alpha'|^2 + |gamma'|^2` large, `G` cannot be resolved below this
/// multiple of it; Newton accepts such points even above `accept_residual`.
const ROUNDING_FLOOR: f64 = 1e3 * f64::EPSILON;

/// `|lambda'|` at or above `1 - STRENGTH_LIMIT` is treated as infinite squeezing.
const STRENGTH_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Newton stops once `|G|` drops to this.
    pub target_residual: f64,
    /// Largest residual accepted when Newton stalls above the target. At long
    /// times the rounding floor of the residual may exceed it; that floor is
    /// accepted too.
    pub accept_residual: f64,
    pub max_iter: usize,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Continuation step used while `t < fast_region`.
    pub initial_dt: f64,
    pub fast_region: f64,
    pub max_dt: f64,
    pub growth: f64,
    /// Continuation fails once the step is bisected below this.
    pub min_dt: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            target_residual: 1e-12,
            accept_residual: 1e-10,
            max_iter: 50,
            fd_step: 1e-6,
            initial_dt: 1e-3,
            fast_region: 0.1,
            max_dt: 0.1,
            growth: 1.5,
            min_dt: 1e-9,
        }
    }
}

impl SolverOptions {
    /// Options with a different Newton target; the acceptance threshold is
    /// raised to match if needed.
    pub fn with_target_residual(mut self, tol: f64) -> Self {
        self.target_residual = tol;
        self.accept_residual = self.accept_residual.max(tol);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestoreSolution {
    pub t: f64,
    pub theta: f64,
    pub r: f64,
    pub lambda_prime: Complex,
    /// Restored phase in `(-pi, pi]`.
    pub phi: f64,
    pub s: f64,
    pub residual: f64,
    /// Set when `lambda' = 0` and `phi` was interpolated from neighbours.
    pub phi_interpolated: bool,
}

impl RestoreSolution {
    pub fn transform(&self) -> LocalTransform {
        LocalTransform::new(self.theta, self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestoreTrajectory {
    pub params: StmsParams,
    pub solutions: Vec<RestoreSolution>,
}

fn transformed_raw(lambda0: Complex, t: f64, xf: &LocalTransform) -> Result<(Complex, Complex)> {
    let (dp, dm, d0) = xf.deltas();
    let l = lambda0;
    let l2 = l * l;
    let one = Complex::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    let it = Complex::new(0.0, t);
    // numerator and denominator pieces of the evolved coefficients
    let num_alpha = one + l2 + it * (one - l2);
    let den_alpha = (one - l2) + 2.0 * it * (one - l) * (one - l);

    let d = d0 * d0 * (l2 - one) + 2.0 * i * d0 * dm * num_alpha + dm * dm * den_alpha;
    if d.norm() < SINGULAR_EPS || !d.norm().is_finite() {
        return Err(Error::SingularTransform(d.norm()));
    }
    let alpha = ((dp * dm - d0 * d0) * num_alpha + i * d0 * dm * den_alpha + i * d0 * dp * (one - l2)) / d;
    let gamma = -(2.0 * l + it * (one - l2)) / d;
    Ok((alpha, gamma))
}

/// Closed-form coefficients of the evolved state after the local transform.
pub fn transformed_coefficients(
    params: StmsParams,
    t: f64,
    xf: &LocalTransform,
) -> Result<SymmetricGaussianState> {
    let (alpha, gamma) = transformed_raw(params.lambda0(), t, xf)?;
    SymmetricGaussianState::new(alpha, gamma)
}

/// `G = alpha'^2 - gamma'^2 - 1`.
pub fn stms_residual(params: StmsParams, t: f64, xf: &LocalTransform) -> Result<Complex> {
    let (alpha, gamma) = transformed_raw(params.lambda0(), t, xf)?;
    Ok((alpha + gamma) * (alpha - gamma) - 1.0)
}

/// `(phi, s)` of a state in STMS form, from `lambda' = -tanh(s) exp(i phi)`.
pub fn phase_strength(state: &SymmetricGaussianState) -> Result<(f64, f64)> {
    let defect = (state.stms_invariant() - 1.0).norm();
    if defect > 1e-8 {
        return Err(Error::InvalidState(format!(
            "state is not in STMS form (|alpha^2 - gamma^2 - 1| = {defect:e})"
        )));
    }
    let l = lambda_from_state(state)?;
    if l.norm() >= 1.0 - STRENGTH_LIMIT {
        return Err(Error::StrengthOverflow(l.norm()));
    }
    Ok(phase_strength_of_lambda(l))
}

fn phase_strength_of_lambda(l: Complex) -> (f64, f64) {
    let m = l.norm();
    let s = if m >= 1.0 - STRENGTH_LIMIT { f64::INFINITY } else { m.atanh() };
    (wrap_phase((-l).arg()), s)
}

/// Phase a purely local transform would give an STMS state,
/// `phi0 - 2 (phi_r + theta)` with `exp(-2 i phi_r) = (1 - lambda_r)/(1 - conj(lambda_r))`
/// and `lambda_r = -tanh(r) exp(i theta)`.
///
/// Diagnostic only; the center-of-mass evolution adds contributions this
/// does not capture.
pub fn local_evolution_phase(phi0: f64, xf: &LocalTransform) -> f64 {
    let lr = -xf.r.tanh() * Complex::from_polar(1.0, xf.theta);
    let ratio = (1.0 - lr) / (1.0 - lr.conj());
    let phi_r = -0.5 * ratio.arg();
    wrap_phase(phi0 - 2.0 * (phi_r + xf.theta))
}

struct NewtonOutcome {
    x: [f64; 2],
    iterations: usize,
}

/// Continuation state for one trajectory.
#[derive(Debug, Clone)]
pub struct RestoreSolver {
    params: StmsParams,
    opts: SolverOptions,
    t: f64,
    theta: f64,
    r: f64,
    dt: f64,
}

impl RestoreSolver {
    pub fn new(params: StmsParams, opts: SolverOptions) -> Self {
        Self {
            params,
            opts,
            t: 0.0,
            theta: 0.0,
            r: 0.0,
            dt: opts.initial_dt,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    fn residual(&self, t: f64, x: [f64; 2]) -> Option<Vector2<f64>> {
        self.residual_scaled(t, x).map(|(f, _)| f)
    }

    /// Residual together with the level below which rounding dominates it.
    fn residual_scaled(&self, t: f64, x: [f64; 2]) -> Option<(Vector2<f64>, f64)> {
        let xf = LocalTransform::new(x[0], x[1]);
        let (alpha, gamma) = transformed_raw(self.params.lambda0(), t, &xf).ok()?;
        let g = (alpha + gamma) * (alpha - gamma) - 1.0;
        let floor = ROUNDING_FLOOR * (alpha.norm_sqr() + gamma.norm_sqr());
        (g.re.is_finite() && g.im.is_finite()).then(|| (Vector2::new(g.re, g.im), floor))
    }

    fn newton(&self, t: f64, x0: [f64; 2]) -> Option<NewtonOutcome> {
        let o = &self.opts;
        let mut x = Vector2::new(x0[0], x0[1]);
        let mut best: Option<(f64, Vector2<f64>)> = None;
        let mut accept = o.accept_residual;
        for iteration in 0..=o.max_iter {
            let (f, floor) = self.residual_scaled(t, [x[0], x[1]])?;
            let norm = f.norm();
            accept = o.accept_residual.max(floor);
            if best.is_none_or(|(b, _)| norm < b) {
                best = Some((norm, x));
            }
            if norm <= o.target_residual {
                return Some(NewtonOutcome { x: [x[0], x[1]], iterations: iteration });
            }
            if iteration == o.max_iter {
                break;
            }
            let mut jac = Matrix2::zeros();
            for k in 0..2 {
                let h = o.fd_step * x[k].abs().max(1.0);
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let fp = self.residual(t, [xp[0], xp[1]])?;
                let fm = self.residual(t, [xm[0], xm[1]])?;
                jac.set_column(k, &((fp - fm) / (2.0 * h)));
            }
            let Some(step) = jac.lu().solve(&f) else { break };
            if !step.iter().all(|v| v.is_finite()) {
                break;
            }
            x -= step;
            if step.norm() <= 1e-15 * (1.0 + x.norm()) {
                // stalled at rounding level
                let f = self.residual(t, [x[0], x[1]])?;
                if f.norm() <= accept {
                    return Some(NewtonOutcome { x: [x[0], x[1]], iterations: iteration + 1 });
                }
                break;
            }
        }
        match best {
            Some((norm, x)) if norm <= accept => Some(NewtonOutcome {
                x: [x[0], x[1]],
                iterations: o.max_iter,
            }),
            _ => None,
        }
    }

    /// Maps a Newton root onto the `r >= 0` representative closest to the
    /// previous angle.
    fn canonical(&self, x: [f64; 2]) -> (f64, f64) {
        let (mut theta, mut r) = (x[0], x[1]);
        if r < 0.0 {
            r = -r;
            theta += PI;
        }
        theta -= TAU * ((theta - self.theta) / TAU).round();
        (theta, r)
    }

    /// Continues the branch up to `t_target` and returns the solution there.
    pub fn advance_to(&mut self, t_target: f64) -> Result<RestoreSolution> {
        if !t_target.is_finite() || t_target < self.t {
            return Err(Error::InvalidParams(format!(
                "cannot continue from t = {} back to t = {t_target}",
                self.t
            )));
        }
        let o = self.opts;
        while self.t < t_target {
            let mut h = self.dt;
            if self.t < o.fast_region {
                h = h.min(o.initial_dt);
            }
            let t_next = if h >= t_target - self.t { t_target } else { self.t + h };
            let step = t_next - self.t;
            match self.newton(t_next, [self.theta, self.r]) {
                Some(out) => {
                    let (theta, r) = self.canonical(out.x);
                    self.theta = theta;
                    self.r = r;
                    self.t = t_next;
                    if out.iterations <= 5 {
                        self.dt = (self.dt * o.growth).min(o.max_dt);
                    }
                }
                None => {
                    self.dt = 0.5 * step;
                    if self.dt < o.min_dt {
                        return Err(Error::SolverDiverged { last_good_t: self.t });
                    }
                }
            }
        }
        self.solution()
    }

    /// Solution at the current continuation time.
    pub fn solution(&self) -> Result<RestoreSolution> {
        let xf = LocalTransform::new(self.theta, self.r);
        let (alpha, gamma) = transformed_raw(self.params.lambda0(), self.t, &xf)?;
        let residual = ((alpha + gamma) * (alpha - gamma) - 1.0).norm();
        let state = SymmetricGaussianState::new(alpha, gamma)?;
        let lambda_prime = lambda_from_state(&state)?;
        let (phi, s) = phase_strength_of_lambda(lambda_prime);
        Ok(RestoreSolution {
            t: self.t,
            theta: self.theta,
            r: self.r,
            lambda_prime,
            phi,
            s,
            residual,
            phi_interpolated: false,
        })
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::InvalidParams("restoration grid must start at t = 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParams("restoration grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Solves for `(theta(t), r(t))` on every grid time by continuation.
pub fn solve_theta_r(
    params: StmsParams,
    t_grid: &[f64],
    opts: SolverOptions,
) -> Result<RestoreTrajectory> {
    check_grid(t_grid)?;
    let mut solver = RestoreSolver::new(params, opts);
    let mut solutions = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        solutions.push(solver.advance_to(t)?);
    }
    fill_undefined_phases(&mut solutions);
    Ok(RestoreTrajectory { params, solutions })
}

/// Replaces the phase at `lambda' = 0` points by the circular mean of the
/// nearest points where it is defined.
pub fn fill_undefined_phases(solutions: &mut [RestoreSolution]) {
    let defined: Vec<bool> = solutions
        .iter()
        .map(|s| s.lambda_prime.norm() >= PHASE_UNDEFINED)
        .collect();
    for i in 0..solutions.len() {
        if defined[i] {
            continue;
        }
        let left = (0..i).rev().find(|&j| defined[j]);
        let right = (i + 1..solutions.len()).find(|&j| defined[j]);
        let phi = match (left, right) {
            (Some(a), Some(b)) => {
                let z = Complex::from_polar(1.0, solutions[a].phi)
                    + Complex::from_polar(1.0, solutions[b].phi);
                z.arg()
            }
            (Some(a), None) => solutions[a].phi,
            (None, Some(b)) => solutions[b].phi,
            (None, None) => 0.0,
        };
        solutions[i].phi = wrap_phase(phi);
        solutions[i].phi_interpolated = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCheck {
    /// `Tr(sigma' K')` with both the state and the dispersion form transformed.
    pub f_prime: f64,
    pub f0: f64,
    /// `|F' - F0|`.
    pub frame_deviation: f64,
    /// Dispersion of the restored state.
    pub restored_dispersion: f64,
    /// `F0(s(t), phi(t))`.
    pub restored_stms_dispersion: f64,
    pub restored_deviation: f64,
}

/// EPR dispersion checks in the transformed frame.
pub fn transformed_frame_check(params: StmsParams, solution: &RestoreSolution) -> Result<FrameCheck> {
    let evolved = com_evolve(params, solution.t)?;
    let xf = solution.transform();
    let s = xf.two_mode_state_map();
    let s_inv = s.try_inverse().ok_or(Error::SingularTransform(s.determinant().abs()))?;
    let sigma = covariance_of(&evolved)?.transformed(&s);

    let u = Vector4::new(0.0, 1.0, 0.0, 1.0);
    let w = Vector4::new(1.0, 0.0, -1.0, 0.0);
    let k: Matrix4<f64> = u * u.transpose() + w * w.transpose();
    let k_prime = s_inv.transpose() * k * s_inv;
    let f_prime = (sigma.matrix() * k_prime).trace();
    let f0 = epr_stms(params);

    let restored = transformed_coefficients(params, solution.t, &xf)?;
    let restored_dispersion = epr_dispersion(&restored)?;
    let restored_stms_dispersion = epr_stms(StmsParams::new(solution.s, solution.phi)?);
    Ok(FrameCheck {
        f_prime,
        f0,
        frame_deviation: (f_prime - f0).abs(),
        restored_dispersion,
        restored_stms_dispersion,
        restored_deviation: (restored_dispersion - restored_stms_dispersion).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSample {
    pub t: f64,
    pub eof: f64,
    pub s: f64,
    /// `E(t) / (2 s(t))`.
    pub ratio: f64,
    /// `|phi(t) - pi|`, wrapped.
    pub phase_gap: f64,
}

/// Long-time behavior of the restored strength and phase.
pub fn asymptotic_report(
    params: StmsParams,
    t_samples: &[f64],
    opts: SolverOptions,
) -> Result<Vec<AsymptoticSample>> {
    let mut solver = RestoreSolver::new(params, opts);
    let mut out = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let sol = solver.advance_to(t)?;
        let eof = eof_of(&com_evolve(params, t)?)?.eof;
        out.push(AsymptoticSample {
            t,
            eof,
            s: sol.s,
            ratio: eof / (2.0 * sol.s),
            phase_gap: wrap_phase(sol.phi - PI).abs(),
        });
    }
    Ok(out)
}

/// `|E_sq(s(t)) - E(Omega(t))|` for one solution.
pub fn entanglement_mismatch(params: StmsParams, solution: &RestoreSolution) -> Result<f64> {
    let direct = eof_of(&com_evolve(params, solution.t)?)?.eof;
    Ok((eof_stms(solution.s) - direct).abs())
}
