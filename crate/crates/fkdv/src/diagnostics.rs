//! Per-wave verification of the quantitative properties every admissible
//! traveling wave must satisfy: a-priori amplitude bounds, the L∞ bound,
//! strict monotonicity on the half period, the speed window 0 < μ < 1, the
//! trough gap μ − φ(π/k) ≥ λπ, coefficient-decay smoothness proxies, and the
//! crest regularity exponent (2 for smooth waves, 1 at the peaked limit).
//!
//! Checks never mutate their input and are deterministic: the same state
//! always yields the same report.  A wave on the k-lattice is checked in its
//! rescaled form ψ(θ) = φ(θ/k) on the 2π period, where the steady equation
//! keeps its shape with the multiplier restricted to the lattice.

use crate::kernel::{lambda_constant_on_lattice, KernelError, MultiplierSymbol};
use crate::spectral::SteadyState;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("window too narrow: {got} fit samples, need at least {need}")]
    WindowTooNarrow { need: usize, got: usize },
    #[error("state is on lattice {state} but the context was built for lattice {context}")]
    LatticeMismatch { context: u32, state: u32 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// One verified inequality: `margin` is the raw signed distance to the
/// inequality (positive = satisfied); `pass` allows a slack of
/// 10·newton_tol·(1 + ‖φ‖∞) scaled to the quantity being measured, since the
/// strict inequalities hold exactly only for exact solutions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub detail: String,
}

/// All named checks for one state, plus the crest quantities when they are
/// resolvable: the fitted crest exponent and the spectral φ″(0).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
    pub crest_exponent: Option<f64>,
    pub second_derivative_at_crest: Option<f64>,
}

impl DiagnosticsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Shared inputs of the per-state checks: the symbol, the lattice the waves
/// live on, the Newton tolerance driving the slack, and the trough-gap
/// constant λ (computed once per (α, k) — it does not depend on the wave).
#[derive(Debug, Clone)]
pub struct DiagnosticsContext {
    symbol: MultiplierSymbol,
    base_wavenumber: u32,
    newton_tol: f64,
    lambda: f64,
}

/// Grid resolution per axis for the λ minimization.
const LAMBDA_GRID: usize = 65;
/// Kernel truncation used for the λ evaluation.
const LAMBDA_MODES: usize = 4096;
/// Relative crest gap below which the spectral second derivative at the
/// crest stops being resolvable (the corner contaminates it).
const SECOND_DERIVATIVE_GAP_FLOOR: f64 = 0.05;
/// Relative crest gap below which exponential coefficient decay can no
/// longer be asserted; the algebraic rate is reported instead.
const EXPONENTIAL_DECAY_GAP_FLOOR: f64 = 0.1;
/// Coefficients below this fraction of the largest one count as numerical
/// noise rather than resolved spectral content.
const RESOLVABLE_COEFF_FRACTION: f64 = 1e-14;
/// Minimum resolvable tail coefficients for a meaningful decay fit.
const MIN_TAIL_SAMPLES: usize = 16;
/// Minimum samples for the crest-exponent log-log fit.
const MIN_EXPONENT_SAMPLES: usize = 12;

impl DiagnosticsContext {
    /// Build a context, computing λ for the given lattice.
    pub fn new(
        symbol: MultiplierSymbol,
        base_wavenumber: u32,
        newton_tol: f64,
    ) -> Result<Self, DiagnosticsError> {
        let lambda =
            lambda_constant_on_lattice(&symbol, base_wavenumber, LAMBDA_GRID, LAMBDA_MODES)?;
        Ok(Self::with_lambda(symbol, base_wavenumber, newton_tol, lambda))
    }

    /// Build a context from a precomputed λ (e.g. to share one λ evaluation
    /// across many reports).
    pub fn with_lambda(
        symbol: MultiplierSymbol,
        base_wavenumber: u32,
        newton_tol: f64,
        lambda: f64,
    ) -> Self {
        Self {
            symbol,
            base_wavenumber,
            newton_tol,
            lambda,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn symbol(&self) -> &MultiplierSymbol {
        &self.symbol
    }

    pub fn base_wavenumber(&self) -> u32 {
        self.base_wavenumber
    }

    /// Uniform inequality slack for the state: strict inequalities are
    /// verified up to the accuracy the corrector actually achieved.
    fn slack(&self, state: &SteadyState) -> f64 {
        let n = (8 * state.phi.modes()).max(64);
        10.0 * self.newton_tol * (1.0 + state.phi.sup_norm_on_grid(n))
    }

    /// Amplitude bounds through the two quadratic inequalities
    /// φ_min·(½φ_min − (μ−1)) ≤ 0 and φ_max·(½φ_max − (μ−1)) ≥ 0.
    ///
    /// These are the exact content of the a-priori lemma; the familiar
    /// chains (for μ ≤ 1: 2(μ−1) ≤ φ_min ≤ 0 ≤ φ_max) are their generic
    /// consequence, while boundary cases — the trivial state and the
    /// constant solution φ ≡ 2(μ−1) — sit exactly on the zero set of the
    /// products and still pass, with zero margin.
    pub fn check_apriori_bounds(&self, state: &SteadyState) -> Check {
        let n = (8 * state.phi.modes()).max(64);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let (mut theta_min, mut theta_max) = (0.0, 0.0);
        for i in 0..n {
            let theta = std::f64::consts::TAU * i as f64 / n as f64;
            let v = state.phi.eval_theta(theta);
            if v < min {
                min = v;
                theta_min = theta;
            }
            if v > max {
                max = v;
                theta_max = theta;
            }
        }
        let mu = state.mu;
        let product_min = min * (0.5 * min - (mu - 1.0));
        let product_max = max * (0.5 * max - (mu - 1.0));
        let margin_min = -product_min;
        let margin_max = product_max;
        let margin = margin_min.min(margin_max);
        // The products are quadratic in φ; scale the slack accordingly.
        let slack = self.slack(state) * (2.0 + mu.abs() + min.abs().max(max.abs()));
        let pass = margin >= -slack;
        let chain = if mu > 1.0 {
            format!("generic chain for mu>1: 0 <= {min:.6e} <= {:.6e} <= {max:.6e}", 2.0 * (mu - 1.0))
        } else {
            format!("generic chain for mu<=1: {:.6e} <= {min:.6e} <= 0 <= {max:.6e}", 2.0 * (mu - 1.0))
        };
        Check {
            name: "apriori_bounds".into(),
            pass,
            margin,
            detail: format!(
                "min phi = {min:.6e} at theta = {theta_min:.4}, max phi = {max:.6e} at theta = {theta_max:.4}; \
                 quadratic margins (min: {margin_min:.3e}, max: {margin_max:.3e}); {chain}"
            ),
        }
    }

    /// ‖φ‖∞ ≤ 2(μ + 1), with 1 = ‖K_P‖₁ (the kernel is positive with unit
    /// integral, so its L¹ norm is m(0) = 1).
    pub fn check_linf_bound(&self, state: &SteadyState) -> Check {
        let n = (8 * state.phi.modes()).max(64);
        let sup = state.phi.sup_norm_on_grid(n);
        let bound = 2.0 * (state.mu + 1.0);
        let margin = bound - sup;
        Check {
            name: "linf_bound".into(),
            pass: margin >= -self.slack(state),
            margin,
            detail: format!("sup |phi| = {sup:.6e} vs bound 2(mu + ||K||_1) = {bound:.6e}"),
        }
    }

    /// φ′ < 0 and φ < μ on the open half period, and φ″(0) < 0 when the
    /// crest curvature is resolvable.  Derivatives are taken in the phase
    /// variable θ = kx; the physical derivatives differ by positive factors
    /// of k, so every sign assertion is unaffected.
    pub fn check_monotone_half_period(&self, state: &SteadyState) -> (Check, Option<f64>) {
        let n = state.phi.modes().max(8);
        let grid = 4 * n;
        let phi = &state.phi;
        let sup = phi.sup_norm_on_grid(8 * n);
        let slack = self.slack(state);

        // The lemma concerns nontrivial waves; the trivial and constant
        // states have φ′ ≡ 0 and nothing to verify.
        let mut dsup = 0.0_f64;
        for i in 1..grid {
            let theta = PI * i as f64 / grid as f64;
            dsup = dsup.max(phi.eval_derivative_theta(theta).abs());
        }
        if dsup <= 1e-13 * (1.0 + sup) {
            return (
                Check {
                    name: "monotone_half_period".into(),
                    pass: true,
                    margin: 0.0,
                    detail: "not applicable: constant or trivial state".into(),
                },
                None,
            );
        }

        let mut min_neg_slope = f64::INFINITY; // min of −φ′ over the interior
        let mut min_below_mu = f64::INFINITY; // min of μ − φ over the interior
        for i in 1..grid {
            let theta = PI * i as f64 / grid as f64;
            min_neg_slope = min_neg_slope.min(-phi.eval_derivative_theta(theta));
            min_below_mu = min_below_mu.min(state.mu - phi.eval_theta(theta));
        }
        // A residual of size tol can move the derivative by ~tol per mode.
        let kn = (state.phi.base_wavenumber() as f64) * n as f64;
        let slack_d = slack * (1.0 + kn);

        let gap = state.crest_gap();
        let curvature_resolvable = gap >= SECOND_DERIVATIVE_GAP_FLOOR * state.mu.abs();
        let d2 = phi.second_derivative_at_zero();
        let (d2_pass, d2_detail, d2_out) = if curvature_resolvable {
            let slack_d2 = slack * (1.0 + kn * kn);
            (
                d2 <= slack_d2,
                format!("phi''(0) = {d2:.6e} (asserted < 0)"),
                Some(d2),
            )
        } else {
            (
                true,
                format!(
                    "phi''(0) = {d2:.6e} (not asserted: crest gap {gap:.3e} below resolution floor)"
                ),
                Some(d2),
            )
        };

        let pass = min_neg_slope >= -slack_d && min_below_mu >= -slack && d2_pass;
        let margin = min_neg_slope.min(min_below_mu);
        (
            Check {
                name: "monotone_half_period".into(),
                pass,
                margin,
                detail: format!(
                    "min of -phi' on (0, pi) = {min_neg_slope:.6e}, min of mu - phi = {min_below_mu:.6e}; {d2_detail}"
                ),
            },
            d2_out,
        )
    }

    /// The speed window 0 < μ < 1 for a single state.
    pub fn check_speed_window_state(&self, state: &SteadyState) -> Check {
        check_speed_window(std::iter::once(state))
    }

    /// μ − φ(π/k) ≥ λπ: the trough stays a fixed distance below the speed.
    pub fn check_trough_gap(&self, state: &SteadyState) -> Check {
        let trough = state.phi.eval_theta(PI);
        let gap = state.mu - trough;
        let bound = self.lambda * PI;
        let margin = gap - bound;
        Check {
            name: "trough_gap".into(),
            pass: margin >= -self.slack(state),
            margin,
            detail: format!(
                "mu - phi(trough) = {gap:.6e} vs lambda*pi = {bound:.6e} (lambda = {:.6e})",
                self.lambda
            ),
        }
    }

    /// Coefficient-decay proxy for smoothness: waves with a healthy crest
    /// gap must show exponential-type decay (negative fitted slope of
    /// log|a_j| against j on the upper third of the spectrum); near the
    /// Lipschitz limit the algebraic rate is reported instead, and it is
    /// expected to approach 2.  The fit uses only coefficients above the
    /// round-off floor — fitting noise would say nothing about the wave.
    pub fn smoothness_proxy(&self, state: &SteadyState) -> Check {
        let coeffs = state.phi.coeffs();
        let n = state.phi.modes();
        let amax = coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if amax == 0.0 {
            return Check {
                name: "smoothness_proxy".into(),
                pass: true,
                margin: 0.0,
                detail: "not applicable: trivial state".into(),
            };
        }
        let floor = RESOLVABLE_COEFF_FRACTION * amax;
        let start = (2 * n) / 3;
        let samples: Vec<(f64, f64)> = (start.max(1)..=n)
            .filter(|&j| coeffs[j].abs() > floor)
            .map(|j| (j as f64, coeffs[j].abs().ln()))
            .collect();
        if samples.len() < MIN_TAIL_SAMPLES {
            return Check {
                name: "smoothness_proxy".into(),
                pass: true,
                margin: 0.0,
                detail: format!(
                    "insufficient modes: {} resolvable tail coefficients above the \
                     round-off floor (need {MIN_TAIL_SAMPLES}); decay too fast to fit",
                    samples.len()
                ),
            };
        }
        let gap = state.crest_gap();
        if gap >= EXPONENTIAL_DECAY_GAP_FLOOR * state.mu.abs() {
            let slope = least_squares_slope(&samples);
            Check {
                name: "smoothness_proxy".into(),
                pass: slope < 0.0,
                margin: -slope,
                detail: format!(
                    "exponential-type decay asserted: fitted slope of log|a_j| vs j = {slope:.6e} \
                     over {} tail coefficients",
                    samples.len()
                ),
            }
        } else {
            let log_samples: Vec<(f64, f64)> = samples
                .iter()
                .map(|&(j, logv)| (j.ln(), logv))
                .collect();
            let rate = -least_squares_slope(&log_samples);
            Check {
                name: "smoothness_proxy".into(),
                pass: true,
                margin: rate,
                detail: format!(
                    "near-limit state: algebraic decay rate = {rate:.4} \
                     (|a_j| ~ j^-rate over {} tail coefficients; expected to approach 2)",
                    log_samples.len()
                ),
            }
        }
    }

    /// Fit the crest regularity exponent: the least-squares slope of
    /// log(φ(0) − φ(x)) against log x on a near-dyadic window inside
    /// (0, π/(4k)).  Subtracting the crest value (rather than μ) removes the
    /// constant crest gap, so smooth waves read ≈ 2 and the peaked limit
    /// reads ≈ 1.
    pub fn crest_exponent(&self, state: &SteadyState) -> Result<f64, DiagnosticsError> {
        let n = state.phi.modes();
        let k = state.phi.base_wavenumber() as f64;
        // Window in physical x: [4π/(kN), π/(8k)]; below the lower edge
        // truncation smoothing dominates and the fit would measure the
        // series cutoff, not the wave.
        let x_lo = 4.0 * PI / (k * n as f64);
        let x_hi = PI / (8.0 * k);
        let crest = state.phi.eval_theta(0.0);
        let mut samples = Vec::new();
        let mut x = x_hi;
        let quarter_dyadic = 0.25_f64.exp2(); // 2^(1/4) per step
        while x >= x_lo {
            let t = crest - state.phi.eval(x);
            if t > 0.0 {
                samples.push((x.ln(), t.ln()));
            }
            x /= quarter_dyadic;
        }
        if samples.len() < MIN_EXPONENT_SAMPLES {
            return Err(DiagnosticsError::WindowTooNarrow {
                need: MIN_EXPONENT_SAMPLES,
                got: samples.len(),
            });
        }
        Ok(least_squares_slope(&samples))
    }

    /// Full per-state report: every named check exactly once, plus the crest
    /// quantities when resolvable.
    pub fn report_for_state(&self, state: &SteadyState) -> Result<DiagnosticsReport, DiagnosticsError> {
        if state.phi.base_wavenumber() != self.base_wavenumber {
            return Err(DiagnosticsError::LatticeMismatch {
                context: self.base_wavenumber,
                state: state.phi.base_wavenumber(),
            });
        }
        let (monotone, d2) = self.check_monotone_half_period(state);
        let checks = vec![
            self.check_apriori_bounds(state),
            self.check_linf_bound(state),
            monotone,
            self.check_speed_window_state(state),
            self.check_trough_gap(state),
            self.smoothness_proxy(state),
        ];
        let crest_exponent = self.crest_exponent(state).ok();
        Ok(DiagnosticsReport {
            checks,
            crest_exponent,
            second_derivative_at_crest: d2,
        })
    }
}

/// The speed window over a whole branch: 0 < μ < 1 at every point, with the
/// empirical uniform lower bound on μ reported.
pub fn check_speed_window<'a, I>(states: I) -> Check
where
    I: IntoIterator<Item = &'a SteadyState>,
{
    let mut margin = f64::INFINITY;
    let mut mu_min = f64::INFINITY;
    let mut count = 0usize;
    for state in states {
        margin = margin.min(state.mu.min(1.0 - state.mu));
        mu_min = mu_min.min(state.mu);
        count += 1;
    }
    if count == 0 {
        return Check {
            name: "speed_window".into(),
            pass: false,
            margin: f64::NEG_INFINITY,
            detail: "no states provided".into(),
        };
    }
    Check {
        name: "speed_window".into(),
        pass: margin > 0.0,
        margin,
        detail: format!(
            "0 < mu < 1 over {count} state(s); empirical uniform lower bound min mu = {mu_min:.6e}"
        ),
    }
}

/// Ordinary least-squares slope of y against x.
fn least_squares_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let sx: f64 = samples.iter().map(|s| s.0).sum();
    let sy: f64 = samples.iter().map(|s| s.1).sum();
    let sxx: f64 = samples.iter().map(|s| s.0 * s.0).sum();
    let sxy: f64 = samples.iter().map(|s| s.0 * s.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Cosine series of the even 2π-periodic extension of x ↦ c − |x| on
/// [−π, π]: the canonical corner profile used to calibrate the crest
/// exponent (its exponent is exactly 1).
pub fn corner_series(base_wavenumber: u32, crest_value: f64, modes: usize) -> SteadyState {
    use crate::spectral::CosineSeries;
    let mut coeffs = vec![0.0; modes + 1];
    // |x| = π/2 − (4/π) Σ_{j odd} cos(jx)/j².
    coeffs[0] = 2.0 * (crest_value - 0.5 * PI);
    for (j, c) in coeffs.iter_mut().enumerate().skip(1).step_by(2) {
        *c = 4.0 / (PI * (j * j) as f64);
    }
    let phi = CosineSeries::new(base_wavenumber, coeffs).expect("nonempty coefficients");
    // The truncated series crests slightly below c; the exact corner profile
    // has φ(0) = μ, so μ is the crest of the truncation.
    let mu = phi.eval_theta(0.0);
    SteadyState::new(phi, mu)
}
