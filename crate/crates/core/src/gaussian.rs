//! Symmetric pure two-mode Gaussian states.
//!
//! A state is the wavefunction
//! `psi(q1, q2) ~ exp[-(alpha (q1^2 + q2^2) + 2 gamma q1 q2) / 2]`
//! with complex `alpha`, `gamma`. Quadratures follow `a = (q + i p)/sqrt(2)`,
//! `[q, p] = i`, so the vacuum has `<q^2> = <p^2> = 1/2`.
//!
//! Second moments are kept in a 4x4 covariance matrix ordered
//! `(q1, p1, q2, p2)`, with the symmetrized cross moments `<{q, p}>/2`.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Lower bound on `Re(alpha)` and `Re(alpha)^2 - Re(gamma)^2`.
pub const VALIDITY_EPS: f64 = 1e-12;

/// Threshold below which a determinant or denominator is considered zero.
pub const SINGULAR_EPS: f64 = 1e-14;

pub const Q1: usize = 0;
pub const P1: usize = 1;
pub const Q2: usize = 2;
pub const P2: usize = 3;

/// Coefficient pair `(alpha, gamma)` of a normalizable symmetric Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricGaussianState {
    alpha: Complex,
    gamma: Complex,
}

impl SymmetricGaussianState {
    pub fn new(alpha: Complex, gamma: Complex) -> Result<Self> {
        let finite = alpha.re.is_finite()
            && alpha.im.is_finite()
            && gamma.re.is_finite()
            && gamma.im.is_finite();
        if !finite {
            return Err(Error::InvalidState(format!(
                "non-finite coefficients alpha={alpha}, gamma={gamma}"
            )));
        }
        if alpha.re <= VALIDITY_EPS {
            return Err(Error::InvalidState(format!(
                "Re(alpha) = {} is not positive",
                alpha.re
            )));
        }
        // (a1 - g1)(a1 + g1) avoids squaring large values
        let det = (alpha.re - gamma.re) * (alpha.re + gamma.re);
        if det <= VALIDITY_EPS {
            return Err(Error::InvalidState(format!(
                "Re(alpha)^2 - Re(gamma)^2 = {det} is not positive"
            )));
        }
        Ok(Self { alpha, gamma })
    }

    pub fn vacuum() -> Self {
        Self {
            alpha: Complex::new(1.0, 0.0),
            gamma: Complex::new(0.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex {
        self.alpha
    }

    pub fn gamma(&self) -> Complex {
        self.gamma
    }

    /// Exponents of the `(q1 + q2)/sqrt(2)` and `(q1 - q2)/sqrt(2)` normal modes.
    pub fn normal_mode_exponents(&self) -> (Complex, Complex) {
        (self.alpha + self.gamma, self.alpha - self.gamma)
    }

    /// `alpha^2 - gamma^2`, evaluated as a product of the normal-mode exponents.
    pub fn stms_invariant(&self) -> Complex {
        let (plus, minus) = self.normal_mode_exponents();
        plus * minus
    }
}

/// Squeezing strength and phase of a standard two-mode squeezed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StmsParams {
    s0: f64,
    phi0: f64,
}

impl StmsParams {
    pub fn new(s0: f64, phi0: f64) -> Result<Self> {
        if !s0.is_finite() || s0 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "squeezing strength s0 = {s0} must be finite and >= 0"
            )));
        }
        if !phi0.is_finite() {
            return Err(Error::InvalidParams(format!("phase phi0 = {phi0} is not finite")));
        }
        Ok(Self { s0, phi0 })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// `lambda0 = -tanh(s0) exp(i phi0)`.
    pub fn lambda0(&self) -> Complex {
        -self.s0.tanh() * Complex::from_polar(1.0, self.phi0)
    }
}

/// Identical per-mode rotation `theta` and squeeze `r` (phase `psi` fixed to 0).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalTransform {
    pub theta: f64,
    pub r: f64,
}

impl LocalTransform {
    pub const IDENTITY: LocalTransform = LocalTransform { theta: 0.0, r: 0.0 };

    pub fn new(theta: f64, r: f64) -> Self {
        Self { theta, r }
    }

    /// `(Delta_plus, Delta_minus, Delta_0)`.
    pub fn deltas(&self) -> (f64, f64, f64) {
        let (ch, sh) = (self.r.cosh(), self.r.sinh());
        let (s, c) = self.theta.sin_cos();
        (ch * c + sh, ch * c - sh, ch * s)
    }

    /// Action on the mode quadratures: `q' = D+ q - D0 p`, `p' = D0 q + D- p`.
    pub fn mode_matrix(&self) -> Matrix2<f64> {
        let (dp, dm, d0) = self.deltas();
        Matrix2::new(dp, -d0, d0, dm)
    }

    /// Action on the state's second moments, the inverse of [`mode_matrix`].
    ///
    /// The transformed state is annihilated by the transformed mode operator,
    /// so its covariance is carried by `m^-1`. With `theta = 0` this squeezes
    /// the vacuum to `alpha = exp(2 r)`.
    ///
    /// [`mode_matrix`]: LocalTransform::mode_matrix
    pub fn state_map(&self) -> Matrix2<f64> {
        let (dp, dm, d0) = self.deltas();
        Matrix2::new(dm, d0, -d0, dp)
    }

    /// `blockdiag(m^-1, m^-1)` in `(q1, p1, q2, p2)` ordering.
    pub fn two_mode_state_map(&self) -> Matrix4<f64> {
        block_diag(&self.state_map())
    }
}

pub(crate) fn block_diag(m: &Matrix2<f64>) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(m);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(m);
    out
}

/// Standard two-mode symplectic form, `blockdiag(J, J)` with `J = [[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    block_diag(&Matrix2::new(0.0, 1.0, -1.0, 0.0))
}

/// Real symmetric second-moment matrix in `(q1, p1, q2, p2)` ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    pub fn from_matrix(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite covariance entry".into()));
        }
        let asym = (m - m.transpose()).amax();
        if asym > 1e-12 * m.amax().max(1.0) {
            return Err(Error::InvalidState(format!(
                "covariance matrix is not symmetric (mismatch {asym:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn position_block(&self) -> Matrix2<f64> {
        self.block(Q1, Q2, Q1, Q2)
    }

    pub fn momentum_block(&self) -> Matrix2<f64> {
        self.block(P1, P2, P1, P2)
    }

    /// `C_ij = <{q_i, p_j}>/2`.
    pub fn cross_block(&self) -> Matrix2<f64> {
        self.block(Q1, Q2, P1, P2)
    }

    fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix2<f64> {
        let s = &self.0;
        Matrix2::new(s[(r0, c0)], s[(r0, c1)], s[(r1, c0)], s[(r1, c1)])
    }

    /// `S sigma S^T`.
    pub fn transformed(&self, s: &Matrix4<f64>) -> Self {
        let m = s * self.0 * s.transpose();
        // re-symmetrize rounding noise
        Self((m + m.transpose()) * 0.5)
    }

    /// Both symplectic eigenvalues, largest first: the moduli of the
    /// eigenvalues of `Omega sigma`, which come in pairs `+-i nu`.
    pub fn symplectic_eigenvalues(&self) -> [f64; 2] {
        let ev = (symplectic_form() * self.0).complex_eigenvalues();
        let mut nu: Vec<f64> = ev.iter().map(|z| z.im.abs()).collect();
        nu.sort_by(|a, b| b.total_cmp(a));
        [0.5 * (nu[0] + nu[1]), 0.5 * (nu[2] + nu[3])]
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.symplectic_eigenvalues()
            .iter()
            .all(|nu| (nu - 0.5).abs() <= tol)
    }

    /// The matrix with the two mode blocks exchanged.
    pub fn mode_swapped(&self) -> Self {
        const PERM: [usize; 4] = [Q2, P2, Q1, P1];
        Self(Matrix4::from_fn(|i, j| self.0[(PERM[i], PERM[j])]))
    }

    pub fn exchange_asymmetry(&self) -> f64 {
        (self.0 - self.mode_swapped().0).amax()
    }
}

/// Standard two-mode squeezed state for the given strength and phase.
pub fn make_stms(params: StmsParams) -> SymmetricGaussianState {
    let lambda = params.lambda0();
    let one = Complex::new(1.0, 0.0);
    let denom = one - lambda * lambda;
    SymmetricGaussianState {
        alpha: (one + lambda * lambda) / denom,
        gamma: -2.0 * lambda / denom,
    }
}

/// `lambda = (1 - alpha - gamma)/(1 + alpha + gamma)`.
pub fn lambda_from_state(state: &SymmetricGaussianState) -> Result<Complex> {
    let plus = state.alpha + state.gamma;
    let denom = 1.0 + plus;
    if denom.norm() < SINGULAR_EPS {
        return Err(Error::DegenerateState(denom.norm()));
    }
    Ok((1.0 - plus) / denom)
}

fn circulant(diag: f64, off: f64) -> Matrix2<f64> {
    Matrix2::new(diag, off, off, diag)
}

/// Second moments of a state.
pub fn covariance_of(state: &SymmetricGaussianState) -> Result<CovarianceMatrix> {
    let a_re = circulant(state.alpha.re, state.gamma.re);
    let a_im = circulant(state.alpha.im, state.gamma.im);
    let det = a_re.determinant();
    if det <= SINGULAR_EPS {
        return Err(Error::SingularState(det));
    }
    let a_re_inv = a_re.try_inverse().ok_or(Error::SingularState(det))?;
    let pos = a_re_inv * 0.5;
    let mom = (a_re + a_im * a_re_inv * a_im) * 0.5;
    let cross = -(a_re_inv * a_im) * 0.5;

    let mut sigma = Matrix4::zeros();
    let q = [Q1, Q2];
    let p = [P1, P2];
    for i in 0..2 {
        for j in 0..2 {
            sigma[(q[i], q[j])] = pos[(i, j)];
            sigma[(p[i], p[j])] = mom[(i, j)];
            sigma[(q[i], p[j])] = cross[(i, j)];
            sigma[(p[j], q[i])] = cross[(i, j)];
        }
    }
    Ok(CovarianceMatrix(sigma))
}

/// Inverse of [`covariance_of`] for pure, exchange-symmetric covariance matrices.
pub fn state_from_covariance(cov: &CovarianceMatrix) -> Result<SymmetricGaussianState> {
    let scale = cov.0.amax().max(1.0);
    let asym = cov.exchange_asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let pos2 = cov.position_block() * 2.0;
    let det = pos2.determinant();
    if det <= SINGULAR_EPS {
        return Err(Error::SingularState(det));
    }
    let a_re = pos2.try_inverse().ok_or(Error::SingularState(det))?;
    let a_im = -(a_re * cov.cross_block()) * 2.0;

    let expected_mom = (a_re + a_im * a_re.try_inverse().ok_or(Error::SingularState(det))? * a_im) * 0.5;
    let mismatch = (expected_mom - cov.momentum_block()).amax();
    if mismatch > 1e-8 * scale {
        return Err(Error::NotPure(mismatch));
    }

    let alpha = Complex::new(
        0.5 * (a_re[(0, 0)] + a_re[(1, 1)]),
        0.5 * (a_im[(0, 0)] + a_im[(1, 1)]),
    );
    let gamma = Complex::new(
        0.5 * (a_re[(0, 1)] + a_re[(1, 0)]),
        0.5 * (a_im[(0, 1)] + a_im[(1, 0)]),
    );
    SymmetricGaussianState::new(alpha, gamma)
}

/// Applies the same local canonical transform to both modes, going through
/// the covariance matrix.
pub fn apply_local_transform(
    state: &SymmetricGaussianState,
    xf: &LocalTransform,
) -> Result<SymmetricGaussianState> {
    let cov = covariance_of(state)?;
    state_from_covariance(&cov.transformed(&xf.two_mode_state_map()))
}

/// `|alpha^2 - gamma^2 - 1| <= tol`.
pub fn is_stms(state: &SymmetricGaussianState, tol: f64) -> bool {
    (state.stms_invariant() - 1.0).norm() <= tol
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Maps an angle into `[0, 2 pi)` for plotting.
pub fn display_phase(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::TAU);
    if y >= std::f64::consts::TAU {
        0.0
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn stms_vacuum() {
        for phi in [0.0, 1.0, PI] {
            let st = make_stms(StmsParams::new(0.0, phi).unwrap());
            assert_eq!(st.alpha(), c(1.0, 0.0));
            assert_eq!(st.gamma().norm(), 0.0);
        }
    }

    #[test]
    fn stms_real_phase() {
        let st = make_stms(StmsParams::new(0.5, PI).unwrap());
        assert!((st.alpha() - c(1f64.cosh(), 0.0)).norm() < 1e-14);
        assert!((st.gamma() - c(-1f64.sinh(), 0.0)).norm() < 1e-14);
        assert!(is_stms(&st, 1e-14));
    }

    #[test]
    fn stms_quarter_phase() {
        let st = make_stms(StmsParams::new(0.5, FRAC_PI_2).unwrap());
        assert!((st.alpha() - c(0.648054273663885399574977353226, 0.0)).norm() < 1e-14);
        assert!((st.gamma() - c(0.0, 0.761594155955764888119458282605)).norm() < 1e-14);
        assert!(is_stms(&st, 1e-14));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(StmsParams::new(-0.1, 0.0).is_err());
        assert!(StmsParams::new(f64::NAN, 0.0).is_err());
        assert!(StmsParams::new(0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(SymmetricGaussianState::new(c(0.0, 1.0), c(0.0, 0.0)).is_err());
        assert!(SymmetricGaussianState::new(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(SymmetricGaussianState::new(c(1.0, 0.0), c(-2.0, 0.0)).is_err());
        assert!(SymmetricGaussianState::new(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
        assert!(SymmetricGaussianState::new(c(1.0, 5.0), c(0.5, -3.0)).is_ok());
    }

    #[test]
    fn lambda_round_trip() {
        assert_eq!(lambda_from_state(&SymmetricGaussianState::vacuum()).unwrap(), c(0.0, 0.0));
        let p = StmsParams::new(0.5, PI).unwrap();
        let l = lambda_from_state(&make_stms(p)).unwrap();
        assert!((l - c(0.5f64.tanh(), 0.0)).norm() < 1e-12);
        let p = StmsParams::new(0.8, PI / 3.0).unwrap();
        let l = lambda_from_state(&make_stms(p)).unwrap();
        assert!((l - p.lambda0()).norm() < 1e-12);
    }

    #[test]
    fn lambda_degenerate() {
        // 1 + alpha + gamma = 0 is unreachable for valid states; build one directly
        let st = SymmetricGaussianState {
            alpha: c(-0.5, 0.0),
            gamma: c(-0.5, 0.0),
        };
        assert!(matches!(lambda_from_state(&st), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn vacuum_covariance() {
        let cov = covariance_of(&SymmetricGaussianState::vacuum()).unwrap();
        assert_eq!(*cov.matrix(), Matrix4::identity() * 0.5);
        let ev = cov.symplectic_eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-14 && (ev[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stms_covariance_entries() {
        let cov = covariance_of(&make_stms(StmsParams::new(0.5, PI).unwrap())).unwrap();
        assert!((cov.get(Q1, Q1) - 1f64.cosh() / 2.0).abs() < 1e-14);
        assert!((cov.get(Q1, Q2) - 1f64.sinh() / 2.0).abs() < 1e-14);
        assert!(cov.is_pure(1e-10));
        assert!(cov.exchange_asymmetry() < 1e-15);
    }

    // One-mode Gaussian exp(-a q^2 / 2): <p^2> = |a|^2/(2 a1), <qp + pq> = -a2/a1.
    // Embedding it as two uncoupled modes (gamma = 0) exposes the same moments.
    #[test]
    fn one_mode_moments() {
        let a = c(1.7, -0.6);
        let cov = covariance_of(&SymmetricGaussianState::new(a, c(0.0, 0.0)).unwrap()).unwrap();
        assert!((cov.get(Q1, Q1) - 1.0 / (2.0 * a.re)).abs() < 1e-14);
        assert!((cov.get(P1, P1) - a.norm_sqr() / (2.0 * a.re)).abs() < 1e-14);
        assert!((2.0 * cov.get(Q1, P1) + a.im / a.re).abs() < 1e-14);
        assert_eq!(cov.get(Q1, Q2), 0.0);
    }

    #[test]
    fn singular_state_rejected() {
        let st = SymmetricGaussianState {
            alpha: c(1.0, 0.0),
            gamma: c(1.0, 0.0),
        };
        assert!(matches!(covariance_of(&st), Err(Error::SingularState(_))));
    }

    #[test]
    fn covariance_round_trip_stms() {
        let st = make_stms(StmsParams::new(0.5, FRAC_PI_4).unwrap());
        let back = state_from_covariance(&covariance_of(&st).unwrap()).unwrap();
        assert!((back.alpha() - st.alpha()).norm() < 1e-12);
        assert!((back.gamma() - st.gamma()).norm() < 1e-12);
    }

    #[test]
    fn vacuum_from_covariance() {
        let cov = CovarianceMatrix::from_matrix(Matrix4::identity() * 0.5).unwrap();
        let st = state_from_covariance(&cov).unwrap();
        assert!((st.alpha() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(st.gamma().norm() < 1e-15);
    }

    #[test]
    fn mixed_covariance_rejected() {
        let cov = CovarianceMatrix::from_matrix(Matrix4::identity()).unwrap();
        assert!(matches!(state_from_covariance(&cov), Err(Error::NotPure(_))));
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let cov = CovarianceMatrix::from_matrix(Matrix4::from_diagonal(
            &nalgebra::Vector4::new(0.25, 1.0, 0.5, 0.5),
        ))
        .unwrap();
        assert!(matches!(state_from_covariance(&cov), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn identity_transform() {
        let st = make_stms(StmsParams::new(0.7, 2.1).unwrap());
        let out = apply_local_transform(&st, &LocalTransform::IDENTITY).unwrap();
        assert!((out.alpha() - st.alpha()).norm() < 1e-13);
        assert!((out.gamma() - st.gamma()).norm() < 1e-13);
    }

    #[test]
    fn squeezed_vacuum_transform() {
        for r in [-0.7, 0.3, 1.1] {
            let out =
                apply_local_transform(&SymmetricGaussianState::vacuum(), &LocalTransform::new(0.0, r))
                    .unwrap();
            assert!((out.alpha() - c((2.0 * r).exp(), 0.0)).norm() < 1e-12);
            assert!(out.gamma().norm() < 1e-14);
        }
    }

    #[test]
    fn rotation_keeps_vacuum() {
        let out =
            apply_local_transform(&SymmetricGaussianState::vacuum(), &LocalTransform::new(0.9, 0.0))
                .unwrap();
        assert!((out.alpha() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn stms_check() {
        let st = make_stms(StmsParams::new(0.7, 1.1).unwrap());
        assert!(is_stms(&st, 1e-12));
        assert!(is_stms(&SymmetricGaussianState::vacuum(), 0.0));
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(0.5) - 0.5).abs() < 1e-15);
        assert!((display_phase(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(display_phase(0.0), 0.0);
    }
}
