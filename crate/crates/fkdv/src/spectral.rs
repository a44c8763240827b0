//! Even cosine series, the action of L, dealiased products, steady-equation
//! residuals, and dense Jacobians.
//!
//! A wave of period 2π/k is represented by its cosine coefficients on the
//! k-lattice:
//!
//! ```text
//! φ(x) = a_0/2 + Σ_{j ≥ 1} a_j cos(j·k·x),
//! ```
//!
//! i.e. as a 2π-periodic series in the phase θ = k·x.  The steady equation
//! for a traveling wave of speed μ is F(φ, μ) = μφ − Lφ − ½φ² = 0.

use crate::kernel::{KernelTable, MultiplierSymbol};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Mode cap for dense Jacobians; beyond this the O(N³) solves stop being
/// desk-scale.
pub const MAX_DENSE_MODES: usize = 2048;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("base wavenumber mismatch ({a} vs {b})")]
    BaseMismatch { a: u32, b: u32 },
    #[error("sample grid has {got} points but the kernel table needs {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("{modes} modes exceed the dense-Jacobian cap of {max}")]
    ModesTooLarge { modes: usize, max: usize },
    #[error("a cosine series needs at least the constant coefficient")]
    EmptyCoefficients,
    #[error("base wavenumber must be at least 1")]
    ZeroWavenumber,
}

/// Finite even cosine series φ(x) = a_0/2 + Σ_{j=1}^{N} a_j cos(j·k·x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    base_wavenumber: u32,
    coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn new(base_wavenumber: u32, coeffs: Vec<f64>) -> Result<Self, SpectralError> {
        if base_wavenumber == 0 {
            return Err(SpectralError::ZeroWavenumber);
        }
        if coeffs.is_empty() {
            return Err(SpectralError::EmptyCoefficients);
        }
        Ok(Self {
            base_wavenumber,
            coeffs,
        })
    }

    /// The zero series with the given number of modes (panics if k = 0).
    pub fn zeros(base_wavenumber: u32, modes: usize) -> Self {
        Self::new(base_wavenumber, vec![0.0; modes + 1]).expect("base wavenumber must be >= 1")
    }

    pub fn base_wavenumber(&self) -> u32 {
        self.base_wavenumber
    }

    /// Highest retained harmonic of the base wavenumber.
    pub fn modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn coeff_mut(&mut self, j: usize) -> &mut f64 {
        &mut self.coeffs[j]
    }

    /// The amplitude coordinate: the coefficient of cos(k·x).
    pub fn first_coefficient(&self) -> f64 {
        self.coeff(1)
    }

    /// Same series padded with zeros (or truncated) to `modes` modes.
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes + 1, 0.0);
        Self {
            base_wavenumber: self.base_wavenumber,
            coeffs,
        }
    }

    /// Evaluate as a function of the phase θ = k·x (Clenshaw recurrence).
    pub fn eval_theta(&self, theta: f64) -> f64 {
        let c = theta.cos();
        let two_c = 2.0 * c;
        let (mut b1, mut b2) = (0.0_f64, 0.0_f64);
        for j in (1..self.coeffs.len()).rev() {
            let b = self.coeffs[j] + two_c * b1 - b2;
            b2 = b1;
            b1 = b;
        }
        0.5 * self.coeffs[0] + b1 * c - b2
    }

    /// Evaluate φ at the physical point x.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_theta(self.base_wavenumber as f64 * x)
    }

    /// dφ/dθ = −Σ j a_j sin(jθ), by the sine Clenshaw recurrence.
    pub fn eval_derivative_theta(&self, theta: f64) -> f64 {
        let c = theta.cos();
        let two_c = 2.0 * c;
        let (mut b1, mut b2) = (0.0_f64, 0.0_f64);
        for j in (1..self.coeffs.len()).rev() {
            let b = j as f64 * self.coeffs[j] + two_c * b1 - b2;
            b2 = b1;
            b1 = b;
        }
        -theta.sin() * b1
    }

    /// dφ/dx at the physical point x.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let k = self.base_wavenumber as f64;
        k * self.eval_derivative_theta(k * x)
    }

    /// φ″(0) = −Σ (j·k)² a_j.
    pub fn second_derivative_at_zero(&self) -> f64 {
        let k = self.base_wavenumber as f64;
        -self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, a)| (j as f64 * k).powi(2) * a)
            .sum::<f64>()
    }

    /// Values on the uniform phase grid θ_i = 2πi/n, i = 0..n.
    pub fn eval_on_phase_grid(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.eval_theta(TAU * i as f64 / n as f64))
            .collect()
    }

    /// (min, max) of φ over the uniform phase grid with n points.
    pub fn extrema_on_grid(&self, n: usize) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in self.eval_on_phase_grid(n) {
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }

    /// Sup of |φ| over the uniform phase grid with n points.
    pub fn sup_norm_on_grid(&self, n: usize) -> f64 {
        let (min, max) = self.extrema_on_grid(n);
        min.abs().max(max.abs())
    }

    /// Σ |a_j| with the constant counted as a_0/2; bounds ‖φ‖_∞.
    pub fn coefficient_l1(&self) -> f64 {
        0.5 * self.coeffs[0].abs() + self.coeffs[1..].iter().map(|a| a.abs()).sum::<f64>()
    }
}

/// Apply the Fourier multiplier L: the j-th coefficient is scaled by m(j·k).
pub fn apply_l(phi: &CosineSeries, symbol: &MultiplierSymbol) -> CosineSeries {
    let k = phi.base_wavenumber() as f64;
    let coeffs = phi
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, a)| a * symbol.eval(j as f64 * k))
        .collect();
    CosineSeries {
        base_wavenumber: phi.base_wavenumber(),
        coeffs,
    }
}

/// Alias-free product of two cosine series.
///
/// The product of series of degree N_a and N_b is itself a cosine polynomial
/// of degree N_a + N_b; it is recovered exactly (up to rounding) by sampling
/// both factors on a uniform phase grid with more than twice that many points
/// and re-projecting with the discrete cosine analysis.  No mode is aliased
/// and nothing is dropped — consumers that need a truncation (the Galerkin
/// residual) truncate explicitly.
pub fn multiply(a: &CosineSeries, b: &CosineSeries) -> Result<CosineSeries, SpectralError> {
    if a.base_wavenumber() != b.base_wavenumber() {
        return Err(SpectralError::BaseMismatch {
            a: a.base_wavenumber(),
            b: b.base_wavenumber(),
        });
    }
    let degree = a.modes() + b.modes();
    // Strictly more than 2·degree points makes the analysis alias-free.
    let m = 2 * degree + 2;
    let mut coeffs = vec![0.0_f64; degree + 1];
    for i in 0..m {
        let theta = TAU * i as f64 / m as f64;
        let r = a.eval_theta(theta) * b.eval_theta(theta);
        // cos(jθ_i) by rotating a (cos, sin) pair: the rotation is orthogonal,
        // so roundoff grows only linearly in j.  (A three-term cosine
        // recurrence is unusable here: near θ = 0 its companion matrix is a
        // defective unit-modulus pair, and any single-value re-anchor turns
        // the accumulated drift into exponential growth across blocks.)
        // Both values are still re-anchored with exactly reduced angles every
        // 64 steps to keep long vectors at the few-ulp level.
        let (sin_t, cos_t) = theta.sin_cos();
        let mut cj = 1.0_f64;
        let mut sj = 0.0_f64;
        coeffs[0] += r;
        for (j, coeff) in coeffs.iter_mut().enumerate().skip(1) {
            if j % 64 == 0 {
                let ang = TAU * ((i * j) % m) as f64 / m as f64;
                cj = ang.cos();
                sj = ang.sin();
            } else {
                let c = cj * cos_t - sj * sin_t;
                sj = sj * cos_t + cj * sin_t;
                cj = c;
            }
            *coeff += r * cj;
        }
    }
    let scale = 2.0 / m as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    Ok(CosineSeries {
        base_wavenumber: a.base_wavenumber(),
        coeffs,
    })
}

/// A candidate traveling wave: profile and speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub phi: CosineSeries,
    pub mu: f64,
}

impl SteadyState {
    pub fn new(phi: CosineSeries, mu: f64) -> Self {
        Self { phi, mu }
    }

    /// μ − φ(0): the gap between the wave speed and the crest height.
    /// Positive along the smooth part of the branch, and → 0 exactly at
    /// the highest (peaked) wave.
    pub fn crest_gap(&self) -> f64 {
        self.mu - self.phi.eval_theta(0.0)
    }
}

/// Galerkin residual of the steady equation, truncated to φ's modes:
/// F(φ, μ) = μφ − Lφ − ½φ².
pub fn residual(state: &SteadyState, symbol: &MultiplierSymbol) -> CosineSeries {
    let phi = &state.phi;
    let k = phi.base_wavenumber() as f64;
    let phi2 = multiply(phi, phi).expect("same base wavenumber");
    let n = phi.modes();
    let coeffs = (0..=n)
        .map(|j| {
            let a = phi.coeff(j);
            state.mu * a - symbol.eval(j as f64 * k) * a - 0.5 * phi2.coeff(j)
        })
        .collect();
    CosineSeries {
        base_wavenumber: phi.base_wavenumber(),
        coeffs,
    }
}

/// Sup of |F(φ, μ)| over a phase grid with `oversample`·N points.
pub fn residual_sup_norm(state: &SteadyState, symbol: &MultiplierSymbol, oversample: usize) -> f64 {
    let r = residual(state, symbol);
    let n = (oversample * state.phi.modes()).max(64);
    r.sup_norm_on_grid(n)
}

/// Dense matrix of the multiplication operator v ↦ truncation of φ·v, in the
/// a-coefficient convention (a_0/2 + Σ a_j cos).
fn multiplication_matrix(phi: &CosineSeries) -> DMatrix<f64> {
    let n = phi.modes();
    // Plain coefficients: b_0 = a_0/2, b_j = a_j.
    let mut b = phi.coeffs().to_vec();
    b[0] *= 0.5;
    let bp = |i: usize| -> f64 {
        if i <= n {
            b[i]
        } else {
            0.0
        }
    };
    let mut m = DMatrix::zeros(n + 1, n + 1);
    // Row 0: (φv)_0 = b_0 w_0 + ½ Σ_{j≥1} b_j w_j in plain coefficients.
    for j in 0..=n {
        let t = if j == 0 { b[0] } else { 0.5 * b[j] };
        m[(0, j)] = t;
    }
    for l in 1..=n {
        for j in 0..=n {
            let mut t = 0.0;
            if j <= l {
                t += 0.5 * bp(l - j);
            }
            if j >= l {
                t += 0.5 * bp(j - l);
            }
            t += 0.5 * bp(l + j);
            m[(l, j)] = t;
        }
    }
    // Convert plain → a-convention: halve column 0, double row 0.
    for l in 0..=n {
        m[(l, 0)] *= 0.5;
    }
    for j in 0..=n {
        m[(0, j)] *= 2.0;
    }
    m
}

/// Dense Jacobian D_φF(φ, μ) = (μ − φ)·Id − L in the cosine-coefficient
/// basis: (μ − m(j·k))·δ_{lj} minus the multiplication-by-φ matrix.
/// At φ = 0 this is diagonal with entries μ − m(j·k), so the trivial line
/// loses invertibility exactly at the bifurcation points μ = m(j·k).
pub fn jacobian_matrix(
    state: &SteadyState,
    symbol: &MultiplierSymbol,
) -> Result<DMatrix<f64>, SpectralError> {
    let n = state.phi.modes();
    if n > MAX_DENSE_MODES {
        return Err(SpectralError::ModesTooLarge {
            modes: n,
            max: MAX_DENSE_MODES,
        });
    }
    let k = state.phi.base_wavenumber() as f64;
    let mut j = multiplication_matrix(&state.phi);
    j.neg_mut();
    for l in 0..=n {
        j[(l, l)] += state.mu - symbol.eval(l as f64 * k);
    }
    Ok(j)
}

/// The uniform symmetric grid x_i = −π + i·π/R, i = 0..2R, matching a
/// kernel table of resolution R.
pub fn quadrature_grid(resolution: usize) -> Vec<f64> {
    let h = std::f64::consts::PI / resolution as f64;
    (0..2 * resolution)
        .map(|i| -std::f64::consts::PI + i as f64 * h)
        .collect()
}

/// Apply L by direct quadrature: the periodic trapezoid discretization of
/// (Lf)(x) = ∫ K_P(x − y) f(y) dy, using the tabulated kernel.  The sample
/// grid must be the 2R-point grid of [`quadrature_grid`] for the table's
/// resolution R.
pub fn apply_l_quadrature(f: &[f64], table: &KernelTable) -> Result<Vec<f64>, SpectralError> {
    let r = table.grid.len();
    if f.len() != 2 * r {
        return Err(SpectralError::GridMismatch {
            expected: 2 * r,
            got: f.len(),
        });
    }
    let h = std::f64::consts::PI / r as f64;
    let n = 2 * r;
    let kernel_at = |dist: usize| -> f64 {
        if dist == 0 {
            table.value_at_origin
        } else {
            table.values[dist - 1]
        }
    };
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, fj) in f.iter().enumerate() {
            let d = (i + n - j) % n;
            let dist = d.min(n - d);
            acc += kernel_at(dist) * fj;
        }
        *o = acc * h;
    }
    Ok(out)
}

/// Rigorous bound on the difference between [`apply_l`] and
/// [`apply_l_quadrature`] for a series f sampled on the table's grid: the
/// discrete convolution folds kernel modes congruent mod 2R onto f's modes,
/// and the table truncates the kernel at its mode count.  Both effects are
/// controlled by kernel tail sums.
pub fn apply_l_quadrature_error_bound(
    symbol: &MultiplierSymbol,
    table: &KernelTable,
    f: &CosineSeries,
) -> f64 {
    let m = 2 * table.grid.len();
    let nf = f.modes();
    let nk = table.truncation_modes;
    let l1 = f.coefficient_l1();
    // No kernel mode of the truncated table can fold onto |n| ≤ N_f when
    // N_k + N_f < M; the discrete convolution is then exact up to rounding.
    let rounding = 100.0 * f64::EPSILON * (m as f64) * (1.0 + l1);
    if nk + nf < m {
        return rounding;
    }
    let fold_from = m - nf - 1;
    let tail = crate::kernel::series_tail_bound(symbol, fold_from.min(nk))
        .expect("modes >= 1");
    l1 * 2.0 * std::f64::consts::PI * tail + rounding
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{series_tail_bound, KernelTable};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sym(alpha: f64) -> MultiplierSymbol {
        MultiplierSymbol::new(alpha).unwrap()
    }

    fn series(k: u32, coeffs: &[f64]) -> CosineSeries {
        CosineSeries::new(k, coeffs.to_vec()).unwrap()
    }

    /// Direct O(N) sum, the oracle for the Clenshaw evaluation.
    fn eval_direct(s: &CosineSeries, theta: f64) -> f64 {
        0.5 * s.coeff(0)
            + (1..=s.modes())
                .map(|j| s.coeff(j) * (j as f64 * theta).cos())
                .sum::<f64>()
    }

    #[test]
    fn eval_matches_direct_sum() {
        let s = series(2, &[0.3, -1.1, 0.0, 0.7, 0.2, -0.05]);
        for i in 0..60 {
            let theta = -7.0 + i as f64 * 0.23;
            assert_relative_eq!(
                s.eval_theta(theta),
                eval_direct(&s, theta),
                epsilon = 1e-12
            );
        }
        // eval(x) is the phase evaluation at θ = kx.
        assert_relative_eq!(s.eval(0.31), s.eval_theta(0.62), epsilon = 1e-14);
    }

    #[test]
    fn eval_is_even_and_periodic_in_fundamental_period() {
        let s = series(3, &[0.1, 0.5, -0.2, 0.04]);
        for i in 1..20 {
            let x = i as f64 * 0.17;
            assert_relative_eq!(s.eval(x), s.eval(-x), epsilon = 1e-12);
            assert_relative_eq!(s.eval(x), s.eval(x + TAU / 3.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn constant_series_evaluates_to_constant() {
        let s = series(1, &[3.0]);
        assert_eq!(s.eval(0.0), 1.5);
        assert_eq!(s.eval(2.4), 1.5);
        assert_eq!(s.modes(), 0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = series(2, &[0.3, -1.1, 0.0, 0.7, 0.2]);
        let h = 1e-6;
        for i in 0..25 {
            let x = -2.0 + i as f64 * 0.19;
            let fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
            assert_relative_eq!(s.eval_derivative(x), fd, epsilon = 1e-6, max_relative = 1e-6);
        }
    }

    #[test]
    fn second_derivative_at_zero() {
        // φ = cos(2x): φ″(0) = −4.
        let s = series(2, &[0.0, 1.0]);
        assert_eq!(s.second_derivative_at_zero(), -4.0);
        let t = series(1, &[0.0, 1.0, 0.5]);
        assert_eq!(t.second_derivative_at_zero(), -(1.0 + 0.5 * 4.0));
    }

    #[test]
    fn constructors_validate() {
        assert!(CosineSeries::new(0, vec![1.0]).is_err());
        assert!(CosineSeries::new(1, vec![]).is_err());
        let z = CosineSeries::zeros(2, 8);
        assert_eq!(z.modes(), 8);
        assert_eq!(z.base_wavenumber(), 2);
    }

    #[test]
    fn apply_l_keeps_constants_and_scales_modes() {
        let s = sym(2.0);
        // Constants are fixed by L (m(0) = 1)...
        let c = series(1, &[4.2]);
        assert_eq!(apply_l(&c, &s).coeff(0), 4.2);
        // ...and cos(jkx) is an eigenfunction with eigenvalue m(jk).
        let e = series(2, &[0.0, 1.0, 1.0]);
        let le = apply_l(&e, &s);
        assert_relative_eq!(le.coeff(1), s.eval(2.0), epsilon = 1e-15);
        assert_relative_eq!(le.coeff(2), s.eval(4.0), epsilon = 1e-15);
        // Contraction on the nonconstant part: |m(jk)| ≤ m(k) for j ≥ 1.
        for j in 1..=2 {
            assert!(le.coeff(j).abs() <= s.eval(2.0) * e.coeff(j).abs() + 1e-15);
        }
    }

    #[test]
    fn multiply_cos_squared_is_half_plus_half_cos2() {
        let c = series(3, &[0.0, 1.0]);
        let p = multiply(&c, &c).unwrap();
        assert_eq!(p.modes(), 2);
        assert_relative_eq!(p.coeff(0), 1.0, epsilon = 1e-14); // a_0/2 = ½
        assert_relative_eq!(p.coeff(1), 0.0, epsilon = 1e-14);
        assert_relative_eq!(p.coeff(2), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn multiply_by_constant_scales_coefficients() {
        let two = series(1, &[4.0]); // constant 2
        let phi = series(1, &[0.6, -0.3, 0.11, 0.07]);
        let p = multiply(&two, &phi).unwrap();
        for j in 0..=phi.modes() {
            assert_relative_eq!(p.coeff(j), 2.0 * phi.coeff(j), epsilon = 1e-13);
        }
    }

    #[test]
    fn multiply_matches_pointwise_product_on_grid() {
        let a = series(1, &[0.2, 0.9, -0.4, 0.13, -0.01, 0.07]);
        let b = series(1, &[-0.5, 0.3, 0.25, -0.08, 0.02]);
        let p = multiply(&a, &b).unwrap();
        assert_eq!(p.modes(), a.modes() + b.modes());
        let n_grid = 4 * (a.modes().max(b.modes())) + 5;
        for i in 0..n_grid {
            let theta = TAU * i as f64 / n_grid as f64;
            let err = (p.eval_theta(theta) - a.eval_theta(theta) * b.eval_theta(theta)).abs();
            assert!(err <= 1e-12, "theta={theta} err={err:.3e}");
        }
    }

    #[test]
    fn multiply_stays_at_roundoff_for_long_vectors() {
        // Regression: the analysis loop must not amplify roundoff on long
        // coefficient vectors (an earlier recurrence scheme here diverged
        // exponentially past a few hundred modes).  cos θ padded to 1024
        // modes squares to ½ + ½cos 2θ; every one of the 2049 product
        // coefficients must come out at the few-ulp level.
        let mut coeffs = vec![0.0; 1025];
        coeffs[1] = 1.0;
        let phi = CosineSeries::new(1, coeffs).unwrap();
        let sq = multiply(&phi, &phi).unwrap();
        assert_eq!(sq.modes(), 2048);
        for (j, v) in sq.coeffs().iter().enumerate() {
            let expected = match j {
                0 => 1.0,
                2 => 0.5,
                _ => 0.0,
            };
            assert!(
                (v - expected).abs() <= 1e-13,
                "j={j} coeff={v:.6e} expected={expected}"
            );
        }

        // Same property on a slowly decaying profile-like series: the square
        // must agree pointwise with the squared evaluation.
        let decay: Vec<f64> = (0..=512)
            .map(|j| if j == 0 { 0.3 } else { 0.3 / (j * j) as f64 })
            .collect();
        let psi = CosineSeries::new(1, decay).unwrap();
        let sq = multiply(&psi, &psi).unwrap();
        for i in 0..97 {
            let theta = TAU * i as f64 / 97.0;
            let err = (sq.eval_theta(theta) - psi.eval_theta(theta).powi(2)).abs();
            assert!(err <= 1e-12, "theta={theta} err={err:.3e}");
        }
    }

    #[test]
    fn multiply_rejects_base_mismatch() {
        let a = series(1, &[0.0, 1.0]);
        let b = series(2, &[0.0, 1.0]);
        assert!(matches!(
            multiply(&a, &b),
            Err(SpectralError::BaseMismatch { .. })
        ));
    }

    #[test]
    fn residual_of_constant_solution_vanishes() {
        // φ ≡ 2(μ − 1) solves μφ − Lφ − ½φ² = 0 for every μ.
        let s = sym(2.0);
        for &mu in &[0.2, 0.5, 0.9, 1.3] {
            let c = 2.0 * (mu - 1.0);
            let state = SteadyState::new(series(1, &[2.0 * c, 0.0, 0.0]), mu);
            let r = residual(&state, &s);
            for j in 0..=r.modes() {
                assert!(r.coeff(j).abs() <= 1e-14, "mu={mu} j={j} r={}", r.coeff(j));
            }
        }
    }

    #[test]
    fn residual_is_quadratic_rewrite_pointwise() {
        // ½(μ − φ)² − (½μ² − Lφ) = −F(φ, μ) pointwise, algebraically.
        let symbol = sym(1.7);
        let phi = series(1, &[0.1, 0.4, -0.12, 0.03, 0.006, -0.002, 0.001]);
        let mu = 0.47;
        let state = SteadyState::new(phi.clone(), mu);
        let lphi = apply_l(&phi, &symbol);
        for i in 0..100 {
            let theta = TAU * i as f64 / 100.0;
            let p = phi.eval_theta(theta);
            let lp = lphi.eval_theta(theta);
            let lhs = 0.5 * (mu - p).powi(2) - (0.5 * mu * mu - lp);
            let rhs = -(mu * p - lp - 0.5 * p * p);
            assert_relative_eq!(lhs, rhs, epsilon = 1e-14, max_relative = 1e-12);
        }
        // And the residual series evaluates to the pointwise residual exactly
        // when φ² is fully resolved (no Galerkin truncation).
        let wide = SteadyState::new(state.phi.resized(2 * phi.modes()), mu);
        let r = residual(&wide, &symbol);
        for i in 0..50 {
            let theta = TAU * i as f64 / 50.0;
            let p = phi.eval_theta(theta);
            let lp = lphi.eval_theta(theta);
            let pointwise = mu * p - lp - 0.5 * p * p;
            assert_relative_eq!(r.eval_theta(theta), pointwise, epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobian_is_diagonal_at_trivial_state() {
        let symbol = sym(2.0);
        let mu = 0.37;
        let state = SteadyState::new(CosineSeries::zeros(2, 12), mu);
        let j = jacobian_matrix(&state, &symbol).unwrap();
        for l in 0..=12usize {
            for c in 0..=12usize {
                let expected = if l == c {
                    mu - symbol.eval(2.0 * l as f64)
                } else {
                    0.0
                };
                assert_relative_eq!(j[(l, c)], expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn jacobian_matches_directional_difference() {
        // F is quadratic in φ, so the central difference is exact in h.
        let symbol = sym(1.6);
        let phi = series(1, &[0.2, 0.5, -0.15, 0.04, 0.01]);
        let v = series(1, &[0.7, -0.3, 0.2, 0.1, -0.05]);
        let mu = 0.6;
        let jac = jacobian_matrix(&SteadyState::new(phi.clone(), mu), &symbol).unwrap();
        let h = 1e-4;
        let perturb = |sign: f64| -> CosineSeries {
            let coeffs = phi
                .coeffs()
                .iter()
                .zip(v.coeffs())
                .map(|(a, w)| a + sign * h * w)
                .collect();
            CosineSeries::new(1, coeffs).unwrap()
        };
        let rp = residual(&SteadyState::new(perturb(1.0), mu), &symbol);
        let rm = residual(&SteadyState::new(perturb(-1.0), mu), &symbol);
        let n = phi.modes();
        let vv = nalgebra::DVector::from_column_slice(v.coeffs());
        let jv = &jac * vv;
        for l in 0..=n {
            let fd = (rp.coeff(l) - rm.coeff(l)) / (2.0 * h);
            assert_relative_eq!(jv[l], fd, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn jacobian_rejects_oversized_problems() {
        let symbol = sym(2.0);
        let state = SteadyState::new(CosineSeries::zeros(1, MAX_DENSE_MODES + 1), 0.5);
        assert!(matches!(
            jacobian_matrix(&state, &symbol),
            Err(SpectralError::ModesTooLarge { .. })
        ));
    }

    #[test]
    fn quadrature_applies_l_exactly_when_no_folding() {
        // Table modes + series modes < grid size ⇒ the discrete convolution
        // reproduces the multiplier exactly (up to rounding).
        let symbol = sym(2.0);
        let table = KernelTable::build(&symbol, 256, 128).unwrap();
        let f = series(1, &[0.4, 1.0, 0.5, -0.25, 0.125, 0.06, -0.03, 0.01]);
        let grid = quadrature_grid(256);
        let samples: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect();
        let lf = apply_l(&f, &symbol);
        let got = apply_l_quadrature(&samples, &table).unwrap();
        let bound = apply_l_quadrature_error_bound(&symbol, &table, &f);
        assert!(bound < 1e-10, "bound={bound:.3e}");
        for (i, &x) in grid.iter().enumerate() {
            assert!(
                (got[i] - lf.eval(x)).abs() <= bound,
                "x={x} diff={:.3e} bound={bound:.3e}",
                (got[i] - lf.eval(x)).abs()
            );
        }
    }

    #[test]
    fn quadrature_agrees_within_tail_budget_when_folding() {
        for &alpha in &[1.5, 2.0, 3.0] {
            let symbol = sym(alpha);
            let table = KernelTable::build(&symbol, 128, 2048).unwrap();
            let f = series(1, &[0.4, 1.0, 0.5, -0.25, 0.125, 0.06, -0.03, 0.01]);
            let grid = quadrature_grid(128);
            let samples: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect();
            let lf = apply_l(&f, &symbol);
            let got = apply_l_quadrature(&samples, &table).unwrap();
            let budget = series_tail_bound(&symbol, table.truncation_modes).unwrap()
                + apply_l_quadrature_error_bound(&symbol, &table, &f);
            for (i, &x) in grid.iter().enumerate() {
                assert!(
                    (got[i] - lf.eval(x)).abs() <= budget,
                    "alpha={alpha} x={x} diff={:.3e} budget={budget:.3e}",
                    (got[i] - lf.eval(x)).abs()
                );
            }
        }
    }

    #[test]
    fn quadrature_rejects_mismatched_grid() {
        let symbol = sym(2.0);
        let table = KernelTable::build(&symbol, 64, 256).unwrap();
        let bad = vec![0.0; 100];
        assert!(matches!(
            apply_l_quadrature(&bad, &table),
            Err(SpectralError::GridMismatch { .. })
        ));
    }

    #[test]
    fn crest_gap_of_small_wave() {
        let phi = series(1, &[0.0, 0.1]);
        let state = SteadyState::new(phi, 0.5);
        assert_relative_eq!(state.crest_gap(), 0.4, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn prop_apply_l_is_linear(
            a0 in -1.0f64..1.0, a1 in -1.0f64..1.0, a2 in -1.0f64..1.0,
            b0 in -1.0f64..1.0, b1 in -1.0f64..1.0, b2 in -1.0f64..1.0,
            t in -2.0f64..2.0,
        ) {
            let symbol = sym(2.5);
            let f = series(1, &[a0, a1, a2]);
            let g = series(1, &[b0, b1, b2]);
            let combo = series(1, &[a0 + t * b0, a1 + t * b1, a2 + t * b2]);
            let lhs = apply_l(&combo, &symbol);
            let lf = apply_l(&f, &symbol);
            let lg = apply_l(&g, &symbol);
            for j in 0..=2usize {
                prop_assert!((lhs.coeff(j) - (lf.coeff(j) + t * lg.coeff(j))).abs() < 1e-12);
            }
        }

        #[test]
        fn prop_multiply_commutes_and_matches_pointwise(
            coeffs_a in proptest::collection::vec(-1.0f64..1.0, 1..8),
            coeffs_b in proptest::collection::vec(-1.0f64..1.0, 1..8),
            theta in 0.0f64..TAU,
        ) {
            let a = CosineSeries::new(1, coeffs_a).unwrap();
            let b = CosineSeries::new(1, coeffs_b).unwrap();
            let ab = multiply(&a, &b).unwrap();
            let ba = multiply(&b, &a).unwrap();
            for j in 0..=ab.modes() {
                prop_assert!((ab.coeff(j) - ba.coeff(j)).abs() < 1e-12);
            }
            let pw = a.eval_theta(theta) * b.eval_theta(theta);
            prop_assert!((ab.eval_theta(theta) - pw).abs() < 1e-11);
        }

        #[test]
        fn prop_eval_matches_direct(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..12),
            theta in -10.0f64..10.0,
        ) {
            let s = CosineSeries::new(1, coeffs).unwrap();
            prop_assert!((s.eval_theta(theta) - eval_direct(&s, theta)).abs() < 1e-11);
        }
    }

    #[test]
    fn quadrature_of_unit_constant_returns_unit_constant() {
        // L fixes constants; the quadrature sees that through the unit
        // integral of the tabulated kernel.
        let symbol = sym(1.5);
        let table = KernelTable::build(&symbol, 128, 1024).unwrap();
        let samples = vec![1.0; 256];
        let got = apply_l_quadrature(&samples, &table).unwrap();
        for &v in &got {
            // Trapezoid sum of the kernel over the period differs from 1 only
            // through truncation and rounding.
            assert!((v - 1.0).abs() < 1e-3, "v={v}");
        }
        // Odd-symmetric data stays odd-symmetric: L preserves parity.
        let odd: Vec<f64> = quadrature_grid(128).iter().map(|&x| x.sin()).collect();
        let lodd = apply_l_quadrature(&odd, &table).unwrap();
        let n = lodd.len();
        for i in 1..128 {
            // x_i and x_{2R−i} = −x_i (mod 2π): values must be opposite.
            assert_relative_eq!(lodd[i], -lodd[n - i], epsilon = 1e-10, max_relative = 1e-8);
        }
        assert!(lodd[0].abs() < 1e-10); // x = −π: odd periodic ⇒ 0
    }

    #[test]
    fn multiplication_matrix_matches_multiply_on_basis() {
        let phi = series(1, &[0.3, -0.7, 0.2, 0.05, -0.01]);
        let n = phi.modes();
        let m = multiplication_matrix(&phi);
        for j in 0..=n {
            let mut e = CosineSeries::zeros(1, n);
            *e.coeff_mut(j) = 1.0;
            let full = multiply(&phi, &e).unwrap();
            for l in 0..=n {
                assert_relative_eq!(m[(l, j)], full.coeff(l), epsilon = 1e-12);
            }
        }
    }
}
