//! Marginal entropy from a position-space discretization of the reduced
//! density kernel, independent of the symplectic eigenvalue route.
//!
//! The partner mode is integrated out analytically, leaving
//! `rho1(x, x') ~ exp(-alpha x^2/2 - conj(alpha) x'^2/2 + (gamma x + conj(gamma) x')^2 / (4 Re alpha))`.
//! The kernel is sampled on a midpoint grid, normalized to unit trace and
//! diagonalized.
//!
//! The kernel of these states has low numerical rank, so by default it is
//! first compressed with a pivoted Cholesky factorization `K ~ L L^H` and the
//! eigenvalues are taken from the small Gram matrix `L^H L`. The dropped
//! trace is below [`CHOLESKY_TOL`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{covariance_of, Complex, SymmetricGaussianState, Q1};

/// Remaining trace at which the pivoted Cholesky factorization stops.
pub const CHOLESKY_TOL: f64 = 1e-15;

/// Eigenvalues below this are an error; between it and 0 they are clipped.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Largest entropy change accepted when doubling the resolution.
pub const DOUBLING_TOL: f64 = 1e-5;

pub const DEFAULT_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParams(format!("grid half-width must be positive, got {half_width}")));
        }
        if n_points < 16 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "grid needs an even number of points >= 16, got {n_points}"
            )));
        }
        Ok(Self { half_width, n_points })
    }

    /// Six position standard deviations (at least six vacuum ones) with
    /// `n_points` samples.
    pub fn auto_with(state: &SymmetricGaussianState, n_points: usize) -> Result<Self> {
        let var = covariance_of(state)?.get(Q1, Q1);
        Self::new(6.0 * var.max(0.5).sqrt(), n_points)
    }

    pub fn auto(state: &SymmetricGaussianState) -> Result<Self> {
        Self::auto_with(state, DEFAULT_POINTS)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    /// Midpoint abscissae `-L + (i + 1/2) dx`.
    pub fn points(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.n_points)
            .map(|i| -self.half_width + (i as f64 + 0.5) * dx)
            .collect()
    }

    fn doubled(&self) -> Self {
        Self { half_width: self.half_width, n_points: 2 * self.n_points }
    }
}

/// How the discretized kernel is diagonalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EigenMethod {
    /// Pivoted Cholesky compression, then a Hermitian eigensolve of the Gram matrix.
    #[default]
    Compressed,
    /// Hermitian eigensolve of the full `n x n` matrix.
    Dense,
}

/// Unnormalized reduced kernel `rho1(x, x')`.
pub fn reduced_kernel(state: &SymmetricGaussianState, x: f64, xp: f64) -> Result<Complex> {
    let (a, g) = (state.alpha(), state.gamma());
    if a.re <= 0.0 {
        return Err(Error::SingularState(a.re));
    }
    let mix = g * x + g.conj() * xp;
    Ok((-0.5 * a * x * x - 0.5 * a.conj() * xp * xp + mix * mix / (4.0 * a.re)).exp())
}

/// `K_ij = rho1(x_i, x_j) dx`, normalized to unit trace.
pub fn kernel_matrix(state: &SymmetricGaussianState, grid: &GridSpec) -> Result<DMatrix<Complex>> {
    let xs = grid.points();
    let n = xs.len();
    let dx = grid.spacing();
    let mut k = DMatrix::<Complex>::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = Complex::new(reduced_kernel(state, xs[i], xs[i])?.re * dx, 0.0);
        for j in 0..i {
            let v = reduced_kernel(state, xs[i], xs[j])? * dx;
            k[(i, j)] = v;
            k[(j, i)] = v.conj();
        }
    }
    let trace: f64 = (0..n).map(|i| k[(i, i)].re).sum();
    if !(trace.is_finite() && trace > 0.0) {
        return Err(Error::SingularState(trace));
    }
    k /= Complex::new(trace, 0.0);
    Ok(k)
}

/// Pivoted Cholesky factor `L` (`n x rank`) with `K ~ L L^H`.
pub fn pivoted_cholesky(k: &DMatrix<Complex>, tol: f64) -> Result<DMatrix<Complex>> {
    let n = k.nrows();
    let mut diag: Vec<f64> = (0..n).map(|i| k[(i, i)].re).collect();
    let mut cols: Vec<Vec<Complex>> = Vec::new();
    let mut used = vec![false; n];
    while cols.len() < n {
        if let Some(&worst) = diag.iter().min_by(|a, b| a.total_cmp(b)) {
            if worst < -NEGATIVE_EIGEN_TOL {
                return Err(Error::NegativeEigenvalue(worst));
            }
        }
        let remaining: f64 = diag.iter().zip(&used).filter(|(_, u)| !**u).map(|(d, _)| d.max(0.0)).sum();
        if remaining <= tol {
            break;
        }
        let (p, &dp) = diag
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("unused pivot exists");
        if dp <= 0.0 {
            break;
        }
        used[p] = true;
        let root = dp.sqrt();
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for i in 0..n {
            if used[i] && i != p {
                continue;
            }
            let mut v = k[(i, p)];
            for c in &cols {
                v -= c[i] * c[p].conj();
            }
            col[i] = v / root;
        }
        for i in 0..n {
            if !used[i] {
                diag[i] -= col[i].norm_sqr();
            }
        }
        diag[p] = 0.0;
        cols.push(col);
    }
    Ok(DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]))
}

/// Eigenvalues of the normalized kernel, clipped at zero.
pub fn kernel_spectrum(
    state: &SymmetricGaussianState,
    grid: &GridSpec,
    method: EigenMethod,
) -> Result<Vec<f64>> {
    let k = kernel_matrix(state, grid)?;
    let raw = match method {
        EigenMethod::Dense => k.symmetric_eigenvalues(),
        EigenMethod::Compressed => {
            let l = pivoted_cholesky(&k, CHOLESKY_TOL)?;
            (l.adjoint() * &l).symmetric_eigenvalues()
        }
    };
    let mut out = Vec::with_capacity(raw.len());
    for &v in raw.iter() {
        if v < -NEGATIVE_EIGEN_TOL {
            return Err(Error::NegativeEigenvalue(v));
        }
        out.push(v.max(0.0));
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// `-sum(lambda ln lambda)` over a spectrum, with `0 ln 0 = 0`.
pub fn spectral_entropy(eigenvalues: &[f64]) -> f64 {
    -eigenvalues
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Entropy on a fixed grid, without the resolution check.
pub fn entropy_on_grid(state: &SymmetricGaussianState, grid: &GridSpec, method: EigenMethod) -> Result<f64> {
    Ok(spectral_entropy(&kernel_spectrum(state, grid, method)?))
}

/// Marginal entropy in nats, accepted once doubling the resolution changes
/// it by less than [`DOUBLING_TOL`]. One further doubling is tried before
/// giving up.
pub fn entropy_numeric(state: &SymmetricGaussianState, grid: &GridSpec) -> Result<f64> {
    let mut coarse = *grid;
    let mut e_coarse = entropy_on_grid(state, &coarse, EigenMethod::Compressed)?;
    let mut diff = f64::INFINITY;
    for _ in 0..2 {
        let fine = coarse.doubled();
        let e_fine = entropy_on_grid(state, &fine, EigenMethod::Compressed)?;
        diff = (e_fine - e_coarse).abs();
        if diff < DOUBLING_TOL {
            return Ok(e_fine);
        }
        coarse = fine;
        e_coarse = e_fine;
    }
    Err(Error::GridTooSmall(diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::com_evolve;
    use crate::gaussian::{make_stms, StmsParams};
    use crate::measures::{eof_of, eof_stms};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn stms(s0: f64, phi0: f64) -> SymmetricGaussianState {
        make_stms(StmsParams::new(s0, phi0).unwrap())
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(5.0, 15).is_err());
        assert!(GridSpec::new(5.0, 17).is_err());
        assert!(GridSpec::new(0.0, 64).is_err());
        assert!(GridSpec::new(f64::NAN, 64).is_err());
        let g = GridSpec::new(4.0, 16).unwrap();
        let xs = g.points();
        assert_eq!(xs.len(), 16);
        assert!((xs[0] + 3.75).abs() < 1e-15 && (xs[15] - 3.75).abs() < 1e-15);
    }

    #[test]
    fn auto_sizing() {
        let g = GridSpec::auto(&SymmetricGaussianState::vacuum()).unwrap();
        assert!((g.half_width() - 6.0 * 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.n_points(), DEFAULT_POINTS);
        let st = com_evolve(StmsParams::new(1.0, 1.0).unwrap(), 3.0).unwrap();
        let var = covariance_of(&st).unwrap().get(Q1, Q1);
        assert!(GridSpec::auto(&st).unwrap().half_width() >= 6.0 * var.sqrt() - 1e-12);
    }

    #[test]
    fn vacuum_kernel_is_product() {
        let vac = SymmetricGaussianState::vacuum();
        for (x, xp) in [(0.3, -1.2), (2.0, 0.5)] {
            let v = reduced_kernel(&vac, x, xp).unwrap();
            assert!((v.re - (-(x * x + xp * xp) / 2.0f64).exp()).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn pi_state_kernel_is_real() {
        let st = stms(0.5, PI);
        let v = reduced_kernel(&st, 1.0, -1.0).unwrap();
        assert!(v.im.abs() < 1e-15);
        // the gamma terms cancel at x' = -x, leaving exp(-alpha) with alpha = cosh(1)
        assert!((v.re - (-1f64.cosh()).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_is_hermitian() {
        let st = com_evolve(StmsParams::new(0.7, 2.0).unwrap(), 1.3).unwrap();
        for (x, xp) in [(0.1, 0.9), (-1.5, 2.2), (3.0, -0.4)] {
            let a = reduced_kernel(&st, x, xp).unwrap();
            let b = reduced_kernel(&st, xp, x).unwrap();
            assert!((a - b.conj()).norm() <= 1e-14 * a.norm().max(1e-300));
            let d = reduced_kernel(&st, x, x).unwrap();
            assert!(d.re > 0.0 && d.im.abs() <= 1e-15 * d.re);
        }
    }

    #[test]
    fn compressed_matches_dense() {
        let st = com_evolve(StmsParams::new(0.5, FRAC_PI_4).unwrap(), 0.7).unwrap();
        let grid = GridSpec::auto_with(&st, 64).unwrap();
        let dense = kernel_spectrum(&st, &grid, EigenMethod::Dense).unwrap();
        let comp = kernel_spectrum(&st, &grid, EigenMethod::Compressed).unwrap();
        assert!((dense.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((comp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (i, c) in comp.iter().enumerate() {
            assert!((c - dense[i]).abs() < 1e-12, "eigenvalue {i}: {c} vs {}", dense[i]);
        }
        let (ed, ec) = (spectral_entropy(&dense), spectral_entropy(&comp));
        assert!((ed - ec).abs() < 1e-10);
    }

    #[test]
    fn cholesky_reproduces_kernel() {
        let st = com_evolve(StmsParams::new(1.0, 1.0).unwrap(), 0.5).unwrap();
        let grid = GridSpec::auto_with(&st, 48).unwrap();
        let k = kernel_matrix(&st, &grid).unwrap();
        let l = pivoted_cholesky(&k, 1e-15).unwrap();
        assert!(l.ncols() < 48);
        let err = (&k - &l * l.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn indefinite_input_is_rejected() {
        let mut k = DMatrix::<Complex>::identity(4, 4) * Complex::new(0.5, 0.0);
        k[(3, 3)] = Complex::new(-0.1, 0.0);
        assert!(matches!(pivoted_cholesky(&k, 1e-15), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn entropy_examples() {
        let vac = SymmetricGaussianState::vacuum();
        assert!(entropy_numeric(&vac, &GridSpec::auto(&vac).unwrap()).unwrap().abs() < 1e-8);

        let st = stms(0.5, 1.1);
        let e = entropy_numeric(&st, &GridSpec::auto(&st).unwrap()).unwrap();
        assert!((e - eof_stms(0.5)).abs() < 1e-4);

        let st = com_evolve(StmsParams::new(0.5, PI).unwrap(), 1.0).unwrap();
        let e = entropy_numeric(&st, &GridSpec::auto(&st).unwrap()).unwrap();
        assert!((e - 0.861537280194791492850731052696).abs() < 1e-4);
        assert!((e - eof_of(&st).unwrap().eof).abs() < 1e-6);
    }

    #[test]
    fn coarse_grid_fails_doubling() {
        let st = com_evolve(StmsParams::new(2.0, 1.0).unwrap(), 5.0).unwrap();
        let grid = GridSpec::new(GridSpec::auto(&st).unwrap().half_width(), 16).unwrap();
        assert!(matches!(entropy_numeric(&st, &grid), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn wider_grid_does_not_drift() {
        let st = com_evolve(StmsParams::new(0.5, FRAC_PI_4).unwrap(), 1.0).unwrap();
        let g = GridSpec::auto(&st).unwrap();
        let e1 = entropy_on_grid(&st, &g, EigenMethod::Compressed).unwrap();
        let wide = GridSpec::new(1.5 * g.half_width(), 600).unwrap();
        let e2 = entropy_on_grid(&st, &wide, EigenMethod::Compressed).unwrap();
        assert!((e1 - e2).abs() < 1e-5);
    }
}
