//! The bifurcation branch: local expansion at the bifurcation point,
//! amplitude-constrained damped Newton correction, adaptive continuation in
//! the amplitude s = a₁, and extrapolation to the highest (peaked) wave.
//!
//! Nontrivial waves bifurcate from the trivial line at μ_k* = m(k) and are
//! charted by their first cosine coefficient.  The solver works on the
//! augmented system
//!
//! ```text
//! F_j(a, μ) = 0  for j = 0..N,      a_c = s,
//! ```
//!
//! in the N+2 unknowns (a_0, …, a_N, μ), with c = 1 for the standard chart.

use crate::diagnostics::{DiagnosticsContext, DiagnosticsError, DiagnosticsReport};
use crate::kernel::{KernelError, MultiplierSymbol};
use crate::spectral::{
    jacobian_matrix, residual, CosineSeries, SpectralError, SteadyState, MAX_DENSE_MODES,
};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BranchError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("wavenumber must be at least 1")]
    ZeroWavenumber,
    #[error("the amplitude constraint s = 0 pins the trivial line; nontrivial waves need s != 0")]
    ZeroAmplitude,
    #[error("constraint index {index} is outside 1..={modes}")]
    BadConstraintIndex { index: usize, modes: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("left admissible set: mu - max phi changed sign during damping")]
    LeftAdmissibleSet,
    #[error("inadmissible converged state: phi exceeds mu by {excess:.3e}")]
    Inadmissible { excess: f64 },
    #[error("augmented Newton matrix is singular")]
    SingularJacobian,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient tail: need at least 3 branch points for extrapolation")]
    NotEnoughPoints,
    #[error("insufficient tail: crest gaps must be positive and strictly decreasing")]
    GapsNotDecreasing,
}

/// The bifurcation point on the trivial line for wavenumber k: μ_k* = m(k).
pub fn bifurcation_point(symbol: &MultiplierSymbol, k: u32) -> Result<f64, BranchError> {
    if k == 0 {
        return Err(BranchError::ZeroWavenumber);
    }
    Ok(symbol.eval(k as f64))
}

/// Second-order speed coefficient of the local branch:
/// μ₂ = 1/(4(m(k) − m(0))) + 1/(8(m(k) − m(2k))); μ(ε) = m(k) + μ₂ε² + O(ε⁴).
///
/// No sign is asserted: for (α=2, k=1) this value is negative.
pub fn mu2_coefficient(symbol: &MultiplierSymbol, k: u32) -> Result<f64, BranchError> {
    if k == 0 {
        return Err(BranchError::ZeroWavenumber);
    }
    let kf = k as f64;
    let mk = symbol.eval(kf);
    let m0 = symbol.eval(0.0);
    let m2k = symbol.eval(2.0 * kf);
    Ok(1.0 / (4.0 * (mk - m0)) + 1.0 / (8.0 * (mk - m2k)))
}

/// The local bifurcation data at μ_k*: the second-order shape correction
/// φ₂ = 1/(4(m(k)−m(0))) + cos(2kx)/(4(m(k)−m(2k))) and the speed
/// coefficient μ₂, so that φ(ε) = ε·cos(kx) + ε²·φ₂ + O(ε³).
#[derive(Debug, Clone)]
pub struct LocalBifurcationData {
    pub k: u32,
    pub mu_star: f64,
    pub phi2: CosineSeries,
    pub mu2: f64,
}

pub fn local_bifurcation_data(
    symbol: &MultiplierSymbol,
    k: u32,
) -> Result<LocalBifurcationData, BranchError> {
    let mu_star = bifurcation_point(symbol, k)?;
    let kf = k as f64;
    let m0 = symbol.eval(0.0);
    let m2k = symbol.eval(2.0 * kf);
    let c0 = 1.0 / (4.0 * (mu_star - m0));
    let c2 = 1.0 / (4.0 * (mu_star - m2k));
    let phi2 = CosineSeries::new(k, vec![2.0 * c0, 0.0, c2])?;
    Ok(LocalBifurcationData {
        k,
        mu_star,
        phi2,
        mu2: mu2_coefficient(symbol, k)?,
    })
}

/// Second-order local expansion of the branch at amplitude ε:
/// φ = ε cos(kx) + (ε²/4)[1/(m(k)−m(0)) + cos(2kx)/(m(k)−m(2k))],
/// μ = m(k) + ε²μ₂.  Exact up to O(ε³) in the profile and O(ε⁴) in μ.
pub fn asymptotic_branch(
    symbol: &MultiplierSymbol,
    k: u32,
    eps: f64,
) -> Result<SteadyState, BranchError> {
    let data = local_bifurcation_data(symbol, k)?;
    let e2 = eps * eps;
    let coeffs = vec![
        e2 * data.phi2.coeff(0),
        eps,
        e2 * data.phi2.coeff(2),
    ];
    let phi = CosineSeries::new(k, coeffs)?;
    Ok(SteadyState::new(phi, data.mu_star + e2 * data.mu2))
}

/// Newton corrector settings.
#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
        }
    }
}

/// A converged point of the branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub state: SteadyState,
    /// Amplitude chart coordinate: the constrained coefficient (a₁ = s).
    pub s: f64,
    /// Sup-norm of the steady residual on a 4N grid at convergence.
    pub newton_residual: f64,
    /// μ − φ(0), zero exactly at the highest wave.
    pub crest_gap: f64,
    /// Newton iterations spent on this point.
    pub iterations: usize,
    /// Per-point verification report, attached by the continuation gate.
    pub diagnostics: Option<DiagnosticsReport>,
}

impl BranchPoint {
    pub fn passes_diagnostics(&self) -> bool {
        self.diagnostics.as_ref().map(|d| d.all_pass()).unwrap_or(false)
    }
}

const DAMPING_FLOOR_EXPONENT: i32 = 6;
/// Oversampling factor for residual sup-norms.
const RESIDUAL_OVERSAMPLE: usize = 4;

fn residual_sup(state: &SteadyState, symbol: &MultiplierSymbol) -> f64 {
    crate::spectral::residual_sup_norm(state, symbol, RESIDUAL_OVERSAMPLE)
}

/// μ − max φ over a 4N grid: positive inside the admissible set.
fn admissibility_gap(state: &SteadyState) -> f64 {
    let n = (4 * state.phi.modes()).max(64);
    let (_, max) = state.phi.extrema_on_grid(n);
    state.mu - max
}

/// Solve {F(φ, μ) = 0, a₁ = s} by damped Newton from `guess`.
pub fn newton_correct(
    guess: &SteadyState,
    s: f64,
    symbol: &MultiplierSymbol,
    config: &NewtonConfig,
) -> Result<BranchPoint, BranchError> {
    newton_correct_with_constraint(guess, s, 1, symbol, config)
}

/// Newton corrector with the amplitude constraint placed on an arbitrary
/// coefficient a_c = s (c ≥ 1).  The standard chart is c = 1; other indices
/// support waves charted by a higher harmonic (e.g. a k-lattice wave viewed
/// on the full-period basis).
pub fn newton_correct_with_constraint(
    guess: &SteadyState,
    s: f64,
    constraint_index: usize,
    symbol: &MultiplierSymbol,
    config: &NewtonConfig,
) -> Result<BranchPoint, BranchError> {
    if s == 0.0 {
        return Err(BranchError::ZeroAmplitude);
    }
    let n = guess.phi.modes();
    if constraint_index < 1 || constraint_index > n {
        return Err(BranchError::BadConstraintIndex {
            index: constraint_index,
            modes: n,
        });
    }
    let c = constraint_index;
    let mut state = guess.clone();
    let mut res_sup = residual_sup(&state, symbol);
    let mut iterations = 0usize;

    while iterations < config.max_iter {
        if res_sup <= config.tol && (state.phi.coeff(c) - s).abs() <= config.tol {
            // Snap the chart coordinate exactly and polish: each polished
            // Newton step has a zero constraint right-hand side, so the
            // snapped coefficient survives the step.
            *state.phi.coeff_mut(c) = s;
            res_sup = residual_sup(&state, symbol);
            let mut polish = 0;
            while res_sup > config.tol && polish < 3 {
                let delta = newton_step(&state, s, c, symbol)?;
                apply_step(&mut state, &delta, 1.0);
                *state.phi.coeff_mut(c) = s;
                res_sup = residual_sup(&state, symbol);
                polish += 1;
                iterations += 1;
            }
            if res_sup > config.tol {
                return Err(BranchError::NoConvergence {
                    iterations,
                    residual: res_sup,
                });
            }
            return finish_point(state, s, res_sup, iterations, config);
        }

        let delta = newton_step(&state, s, c, symbol)?;
        iterations += 1;

        // Backtracking damping: prefer the longest step that stays in the
        // admissible set (μ − max φ > 0) and decreases the residual; fall
        // back to the shortest admissible step to keep making progress.
        let mut accepted: Option<(SteadyState, f64)> = None;
        let mut fallback: Option<(SteadyState, f64)> = None;
        for e in 0..=DAMPING_FLOOR_EXPONENT {
            let t = 0.5f64.powi(e);
            let mut cand = state.clone();
            apply_step(&mut cand, &delta, t);
            if admissibility_gap(&cand) <= 0.0 {
                continue;
            }
            let rc = residual_sup(&cand, symbol);
            if rc < res_sup * (1.0 - 1e-4 * t) {
                accepted = Some((cand, rc));
                break;
            }
            fallback = Some((cand, rc));
        }
        match accepted.or(fallback) {
            Some((next, rc)) => {
                state = next;
                res_sup = rc;
            }
            None => return Err(BranchError::LeftAdmissibleSet),
        }
    }
    Err(BranchError::NoConvergence {
        iterations,
        residual: res_sup,
    })
}

/// One augmented Newton step: returns (Δa_0..Δa_N, Δμ).
fn newton_step(
    state: &SteadyState,
    s: f64,
    c: usize,
    symbol: &MultiplierSymbol,
) -> Result<DVector<f64>, BranchError> {
    let n = state.phi.modes();
    let jac = jacobian_matrix(state, symbol)?;
    let r = residual(state, symbol);
    let mut aug = DMatrix::zeros(n + 2, n + 2);
    aug.view_mut((0, 0), (n + 1, n + 1)).copy_from(&jac);
    for l in 0..=n {
        aug[(l, n + 1)] = state.phi.coeff(l); // ∂F_l/∂μ = a_l
    }
    aug[(n + 1, c)] = 1.0;
    let mut rhs = DVector::zeros(n + 2);
    for l in 0..=n {
        rhs[l] = -r.coeff(l);
    }
    rhs[n + 1] = s - state.phi.coeff(c);
    aug.lu().solve(&rhs).ok_or(BranchError::SingularJacobian)
}

fn apply_step(state: &mut SteadyState, delta: &DVector<f64>, t: f64) {
    let n = state.phi.modes();
    for l in 0..=n {
        *state.phi.coeff_mut(l) += t * delta[l];
    }
    state.mu += t * delta[n + 1];
}

/// Final admissibility check and point assembly.
fn finish_point(
    state: SteadyState,
    s: f64,
    res_sup: f64,
    iterations: usize,
    config: &NewtonConfig,
) -> Result<BranchPoint, BranchError> {
    let n = (4 * state.phi.modes()).max(64);
    let (_, max) = state.phi.extrema_on_grid(n);
    let slack = 10.0 * config.tol * (1.0 + state.phi.sup_norm_on_grid(n));
    if max > state.mu + slack {
        return Err(BranchError::Inadmissible {
            excess: max - state.mu,
        });
    }
    let crest_gap = state.mu - state.phi.eval_theta(0.0);
    Ok(BranchPoint {
        s,
        newton_residual: res_sup,
        crest_gap,
        iterations,
        diagnostics: None,
        state,
    })
}

/// Adaptive step controller for the continuation.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Step multiplier after a fast (≤ `fast_iterations`) convergence.
    pub growth: f64,
    /// Step multiplier after a failed correction.
    pub shrink: f64,
    /// Smallest allowed step, as a fraction of m(k).
    pub floor_factor: f64,
    /// Largest allowed step, as a multiple of the initial step.
    pub max_step_factor: f64,
    /// Iteration count at or below which a correction counts as fast.
    pub fast_iterations: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            growth: 2.0,
            shrink: 0.5,
            floor_factor: 1e-6,
            max_step_factor: 32.0,
            fast_iterations: 3,
        }
    }
}

/// Continuation settings.  `stop_crest_gap` is relative: the run stops once
/// crest_gap < stop_crest_gap · μ (a truncated cosine series cannot
/// represent the peaked limit itself; the limit is reached by
/// extrapolation).
#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    pub alpha: f64,
    pub k: u32,
    pub modes: usize,
    /// Initial amplitude step; its sign selects the branch direction.
    pub s_step: f64,
    pub step_control: StepControl,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub stop_crest_gap: f64,
    pub max_points: usize,
}

impl ContinuationConfig {
    pub fn new(alpha: f64, k: u32) -> Self {
        Self {
            alpha,
            k,
            modes: 256,
            s_step: 5e-3,
            step_control: StepControl::default(),
            newton_tol: 1e-10,
            newton_max_iter: 25,
            stop_crest_gap: 1e-3,
            max_points: 400,
        }
    }

    pub fn validate(&self) -> Result<(), BranchError> {
        if self.k < 1 {
            return Err(BranchError::ZeroWavenumber);
        }
        if self.modes < 4 * self.k as usize {
            return Err(BranchError::InvalidConfig(format!(
                "modes = {} but at least 4k = {} are needed to resolve the second harmonic",
                self.modes,
                4 * self.k
            )));
        }
        if self.modes > MAX_DENSE_MODES {
            return Err(BranchError::InvalidConfig(format!(
                "modes = {} exceeds the dense-solver cap {MAX_DENSE_MODES}",
                self.modes
            )));
        }
        if !(self.s_step.is_finite() && self.s_step != 0.0) {
            return Err(BranchError::InvalidConfig(
                "s_step must be finite and nonzero".into(),
            ));
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return Err(BranchError::InvalidConfig("newton_tol must be positive".into()));
        }
        if !(self.stop_crest_gap > 0.0 && self.stop_crest_gap < 1.0) {
            return Err(BranchError::InvalidConfig(
                "stop_crest_gap is relative to mu and must lie in (0, 1)".into(),
            ));
        }
        if self.max_points < 3 {
            return Err(BranchError::InvalidConfig("max_points must be at least 3".into()));
        }
        if self.newton_max_iter < 1 {
            return Err(BranchError::InvalidConfig("newton_max_iter must be at least 1".into()));
        }
        let sc = &self.step_control;
        if !(sc.growth > 1.0 && sc.shrink > 0.0 && sc.shrink < 1.0 && sc.floor_factor > 0.0
            && sc.max_step_factor >= 1.0 && sc.fast_iterations >= 1)
        {
            return Err(BranchError::InvalidConfig("step_control out of range".into()));
        }
        Ok(())
    }
}

/// Why a continuation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// crest_gap < stop_crest_gap · μ: close enough to the highest wave.
    CrestGapReached,
    /// The configured point budget ran out.
    MaxPoints,
    /// Newton kept failing at the minimum step; the partial branch is kept.
    Stalled,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::CrestGapReached => "crest_gap_reached",
            StopReason::MaxPoints => "max_points",
            StopReason::Stalled => "stalled",
        })
    }
}

/// A computed continuation branch.
#[derive(Debug, Clone)]
pub struct Branch {
    pub alpha: f64,
    pub k: u32,
    pub points: Vec<BranchPoint>,
    pub stop_reason: StopReason,
    /// Trough-gap constant λ used by the per-point diagnostics.
    pub lambda: f64,
}

impl Branch {
    pub fn all_diagnostics_pass(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.passes_diagnostics())
    }

    /// Highest mode count used along the branch (mode escalation may raise
    /// it above the configured value).
    pub fn final_modes(&self) -> usize {
        self.points.iter().map(|p| p.state.phi.modes()).max().unwrap_or(0)
    }

    pub fn states(&self) -> Vec<SteadyState> {
        self.points.iter().map(|p| p.state.clone()).collect()
    }

    pub fn extrapolate_highest(&self) -> Result<HighestWaveEstimate, BranchError> {
        extrapolate_highest(&self.states())
    }
}

/// Relative crest gap below which the run re-projects onto 4× modes:
/// coefficient decay degrades toward j^{−2} near the Lipschitz limit.
const ESCALATION_GAP: f64 = 0.05;

/// Follow the branch from the asymptotic seed toward the highest wave.
pub fn continue_branch(config: &ContinuationConfig) -> Result<Branch, BranchError> {
    let symbol = MultiplierSymbol::new(config.alpha)?;
    config.validate()?;
    let diag = DiagnosticsContext::new(symbol, config.k, config.newton_tol)?;
    let newton = NewtonConfig {
        tol: config.newton_tol,
        max_iter: config.newton_max_iter,
    };
    let m_k = symbol.eval(config.k as f64);
    let dir = config.s_step.signum();
    let step_floor = config.step_control.floor_factor * m_k;
    let step_max = config.step_control.max_step_factor * config.s_step.abs();
    let mut step = config.s_step.abs();
    let mut modes = config.modes;
    let mut escalated = false;
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut stop_reason = StopReason::MaxPoints;

    while points.len() < config.max_points {
        let s_last = points.last().map(|p| p.s).unwrap_or(0.0);
        let s_new = s_last + dir * step;
        let guess = match points.len() {
            0 | 1 => {
                let asym = asymptotic_branch(&symbol, config.k, s_new)?;
                SteadyState::new(asym.phi.resized(modes), asym.mu)
            }
            _ => {
                let last = &points[points.len() - 1];
                let prev = &points[points.len() - 2];
                secant_predictor(last, prev, s_new, modes)
            }
        };

        match newton_correct(&guess, s_new, &symbol, &newton) {
            Ok(mut point) => {
                // Near the limit the spectrum fattens; re-project once onto
                // 4× modes and re-correct the same point.
                if !escalated && point.crest_gap < ESCALATION_GAP * point.state.mu {
                    let wide = 4usize * modes;
                    let wide = wide.min(MAX_DENSE_MODES);
                    if wide > modes {
                        let reseed = SteadyState::new(
                            point.state.phi.resized(wide),
                            point.state.mu,
                        );
                        // If the wide re-correction fails, keep the converged
                        // narrow point and retry the escalation at the next
                        // accepted point rather than abandoning the branch.
                        if let Ok(repointed) = newton_correct(&reseed, s_new, &symbol, &newton) {
                            point = repointed;
                            modes = wide;
                            escalated = true;
                        }
                    } else {
                        escalated = true;
                    }
                }
                point.diagnostics = Some(diag.report_for_state(&point.state)?);
                let fast = point.iterations <= config.step_control.fast_iterations;
                let gap = point.crest_gap;
                let mu = point.state.mu;
                points.push(point);
                if gap < config.stop_crest_gap * mu {
                    stop_reason = StopReason::CrestGapReached;
                    break;
                }
                if fast {
                    step = (step * config.step_control.growth).min(step_max);
                }
            }
            Err(_) => {
                step *= config.step_control.shrink;
                if step < step_floor {
                    stop_reason = StopReason::Stalled;
                    break;
                }
            }
        }
    }

    Ok(Branch {
        alpha: config.alpha,
        k: config.k,
        points,
        stop_reason,
        lambda: diag.lambda(),
    })
}

/// Linear extrapolation of the last two points to the next amplitude.
fn secant_predictor(
    last: &BranchPoint,
    prev: &BranchPoint,
    s_new: f64,
    modes: usize,
) -> SteadyState {
    let denom = last.s - prev.s;
    let ratio = if denom != 0.0 { (s_new - last.s) / denom } else { 0.0 };
    let a = last.state.phi.resized(modes);
    let b = prev.state.phi.resized(modes);
    let coeffs: Vec<f64> = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x + ratio * (x - y))
        .collect();
    let mu = last.state.mu + ratio * (last.state.mu - prev.state.mu);
    SteadyState::new(
        CosineSeries::new(a.base_wavenumber(), coeffs).expect("nonempty"),
        mu,
    )
}

/// The extrapolated highest wave, with the peaking condition φ(0) = μ
/// enforced exactly.
#[derive(Debug, Clone)]
pub struct HighestWaveEstimate {
    /// Extrapolated profile and speed; state.mu = φ(0) by construction.
    pub state: SteadyState,
    /// Extrapolated μ before the peaking condition was enforced.
    pub raw_mu: f64,
    /// Speeds of the three tail points used.
    pub tail_mus: [f64; 3],
    /// Crest gaps of the three tail points used (strictly decreasing).
    pub tail_gaps: [f64; 3],
}

/// Componentwise quadratic extrapolation of the last three states in
/// crest_gap → 0.
pub fn extrapolate_highest(states: &[SteadyState]) -> Result<HighestWaveEstimate, BranchError> {
    if states.len() < 3 {
        return Err(BranchError::NotEnoughPoints);
    }
    let tail = &states[states.len() - 3..];
    let gaps: Vec<f64> = tail.iter().map(|s| s.crest_gap()).collect();
    if !(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] > 0.0) {
        return Err(BranchError::GapsNotDecreasing);
    }
    // Lagrange weights at g = 0.
    let mut w = [0.0_f64; 3];
    for i in 0..3 {
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..3 {
            if j != i {
                num *= gaps[j];
                den *= gaps[j] - gaps[i];
            }
        }
        w[i] = num / den;
    }
    let modes = tail.iter().map(|s| s.phi.modes()).max().unwrap();
    let resized: Vec<CosineSeries> = tail.iter().map(|s| s.phi.resized(modes)).collect();
    let mut coeffs = vec![0.0_f64; modes + 1];
    for (i, series) in resized.iter().enumerate() {
        for (c, a) in coeffs.iter_mut().zip(series.coeffs()) {
            *c += w[i] * a;
        }
    }
    let raw_mu: f64 = (0..3).map(|i| w[i] * tail[i].mu).sum();
    let phi = CosineSeries::new(tail[0].phi.base_wavenumber(), coeffs)?;
    let mu = phi.eval_theta(0.0); // enforce φ(0) = μ at the limit
    Ok(HighestWaveEstimate {
        state: SteadyState::new(phi, mu),
        raw_mu,
        tail_mus: [tail[0].mu, tail[1].mu, tail[2].mu],
        tail_gaps: [gaps[0], gaps[1], gaps[2]],
    })
}

/// Richardson cross-check of μ₂ from the corrected branch:
/// D(h) = (μ(h) − m(k))/h² and the h² → 0 extrapolation (4D(h/2) − D(h))/3.
#[derive(Debug, Clone, Copy)]
pub struct RichardsonMu2 {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn mu2_richardson(
    symbol: &MultiplierSymbol,
    k: u32,
    h: f64,
    modes: usize,
    config: &NewtonConfig,
) -> Result<RichardsonMu2, BranchError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(BranchError::InvalidConfig("richardson step must be positive".into()));
    }
    let mu_star = bifurcation_point(symbol, k)?;
    let mu_at = |eps: f64| -> Result<f64, BranchError> {
        let asym = asymptotic_branch(symbol, k, eps)?;
        let guess = SteadyState::new(asym.phi.resized(modes), asym.mu);
        Ok(newton_correct(&guess, eps, symbol, config)?.state.mu)
    };
    let coarse = (mu_at(h)? - mu_star) / (h * h);
    let h2 = 0.5 * h;
    let fine = (mu_at(h2)? - mu_star) / (h2 * h2);
    Ok(RichardsonMu2 {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}
