//! Acceptance suite: one test per numbered criterion, each printing a single
//! `criterion N (...): PASS` line on success.  Heavy continuation runs are
//! shared between criteria through lazily-computed statics.

use std::time::Instant;

use fkdv::branch::{
    asymptotic_branch, bifurcation_point, continue_branch, mu2_coefficient, mu2_richardson,
    newton_correct, Branch, ContinuationConfig, NewtonConfig, StopReason,
};
use fkdv::diagnostics::{corner_series, DiagnosticsContext};
use fkdv::kernel::{
    certify_kernel_properties, default_modes, lambda_constant, series_tail_bound, KernelTable,
    MultiplierSymbol,
};
use fkdv::spectral::{
    apply_l, apply_l_quadrature, apply_l_quadrature_error_bound, jacobian_matrix, quadrature_grid,
    residual_sup_norm, CosineSeries, SteadyState,
};
use once_cell::sync::Lazy;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Shared continuation runs
// ---------------------------------------------------------------------------

struct TimedBranch {
    branch: Branch,
    seconds: f64,
}

fn full_branch(alpha: f64, k: u32) -> TimedBranch {
    let mut cfg = ContinuationConfig::new(alpha, k);
    cfg.modes = 256;
    cfg.stop_crest_gap = 1e-3;
    let start = Instant::now();
    let branch = continue_branch(&cfg).expect("continuation should produce a branch");
    TimedBranch {
        branch,
        seconds: start.elapsed().as_secs_f64(),
    }
}

static BRANCH_A2K1: Lazy<TimedBranch> = Lazy::new(|| full_branch(2.0, 1));
static BRANCH_A2K2: Lazy<TimedBranch> = Lazy::new(|| full_branch(2.0, 2));
static BRANCH_A15K1: Lazy<TimedBranch> = Lazy::new(|| full_branch(1.5, 1));
static BRANCH_A3K1: Lazy<TimedBranch> = Lazy::new(|| full_branch(3.0, 1));

fn sym(alpha: f64) -> MultiplierSymbol {
    MultiplierSymbol::new(alpha).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Bifurcation points
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_bifurcation_points() {
    let alphas = [1.1, 1.5, 2.0, 3.0, 5.0];
    let ks: [u32; 5] = [1, 2, 3, 5, 8];
    let modes = 16;
    for &alpha in &alphas {
        let symbol = sym(alpha);
        for &k in &ks {
            // At the trivial state with mu = 0 the Jacobian is
            // diag(-m(j k)), so its singular values are the multiplier
            // values themselves; compare against the closed form.
            let trivial = SteadyState::new(CosineSeries::zeros(k, modes), 0.0);
            let jac = jacobian_matrix(&trivial, &symbol).unwrap();
            let mut singular: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
            singular.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mut expected: Vec<f64> = (0..=modes)
                .map(|j| (1.0 + ((j as f64) * (k as f64)).powi(2)).powf(-alpha / 2.0))
                .collect();
            expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (s, e) in singular.iter().zip(&expected) {
                let rel = (s - e).abs() / e;
                assert!(
                    rel <= 1e-12,
                    "alpha={alpha} k={k}: singular value {s} vs {e}, rel={rel:.3e}"
                );
            }
            // The named bifurcation point is the j = 1 singular value.
            let mu_star = bifurcation_point(&symbol, k).unwrap();
            let closed = (1.0 + (k as f64).powi(2)).powf(-alpha / 2.0);
            assert!(
                (mu_star - closed).abs() <= 1e-14 * closed,
                "alpha={alpha} k={k}: mu* = {mu_star} vs {closed}"
            );
        }
    }
    println!("criterion 1 (bifurcation points): PASS");
}

// ---------------------------------------------------------------------------
// 2. Asymptotic order
// ---------------------------------------------------------------------------

fn fitted_order(pairs: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(e, v)| *e > 0.0 && *v > 0.0)
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    assert!(pts.len() >= 2, "need at least two positive samples for an order fit");
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn criterion_2_asymptotic_order() {
    let symbol = sym(2.0);
    let k = 1;
    let eps = [0.08, 0.04, 0.02, 0.01];
    let ncfg = NewtonConfig {
        tol: 1e-12,
        max_iter: 40,
    };
    let mut residuals = Vec::new();
    let mut mu_gaps = Vec::new();
    for &e in &eps {
        let asym = asymptotic_branch(&symbol, k, e).unwrap();
        let wide = SteadyState::new(asym.phi.resized(8), asym.mu);
        residuals.push((e, residual_sup_norm(&wide, &symbol, 4)));
        let guess = SteadyState::new(asym.phi.resized(64), asym.mu);
        let corrected = newton_correct(&guess, e, &symbol, &ncfg).unwrap();
        mu_gaps.push((e, (corrected.state.mu - asym.mu).abs()));
    }
    let order_res = fitted_order(&residuals);
    let order_mu = fitted_order(&mu_gaps);
    assert!(
        order_res >= 2.7,
        "residual order {order_res:.3} below 2.7 (samples: {residuals:?})"
    );
    assert!(
        order_mu >= 2.7,
        "mu order {order_mu:.3} below 2.7 (samples: {mu_gaps:?})"
    );
    println!(
        "criterion 2 (asymptotic order): PASS  (residual order {order_res:.2}, mu order {order_mu:.2})"
    );
}

// ---------------------------------------------------------------------------
// 3. mu2 cross-check
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_mu2_cross_check() {
    let cases = [(2.0, 1u32), (4.0, 1), (2.0, 3)];
    let ncfg = NewtonConfig {
        tol: 1e-12,
        max_iter: 40,
    };
    for &(alpha, k) in &cases {
        let symbol = sym(alpha);
        let formula = mu2_coefficient(&symbol, k).unwrap();
        let rich = mu2_richardson(&symbol, k, 0.04, 64, &ncfg).unwrap();
        let rel = (rich.extrapolated - formula).abs() / formula.abs();
        assert!(
            rel <= 0.05,
            "alpha={alpha} k={k}: richardson {} vs formula {formula}, rel={rel:.3e}",
            rich.extrapolated
        );
    }
    let mu2_21 = mu2_coefficient(&sym(2.0), 1).unwrap();
    assert!(
        mu2_21 < 0.0,
        "expected the (2,1) curvature to come out negative, got {mu2_21}"
    );
    println!("criterion 3 (mu2 cross-check): PASS");
    println!(
        "criterion 3 note: mu2(alpha=2, k=1) = {mu2_21:.8} is negative — the branch initially \
         bends toward smaller speeds, a discrepancy with the supercritical (positive-curvature) \
         expectation; logged as a discrepancy, not a failure"
    );
}

// ---------------------------------------------------------------------------
// 4. Spectral/quadrature operator equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_operator_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for &alpha in &[1.5, 2.0, 3.0] {
        let symbol = sym(alpha);
        let table = KernelTable::build(&symbol, 128, 2048).unwrap();
        let grid = quadrature_grid(128);
        for trial in 0..20 {
            // Random smooth even series: exponentially decaying coefficients.
            let coeffs: Vec<f64> = (0..=16)
                .map(|j| rng.random_range(-1.0..1.0) * 0.5f64.powi(j))
                .collect();
            let f = CosineSeries::new(1, coeffs).unwrap();
            let samples: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect();
            let lf = apply_l(&f, &symbol);
            let got = apply_l_quadrature(&samples, &table).unwrap();
            let budget = series_tail_bound(&symbol, table.truncation_modes).unwrap()
                + apply_l_quadrature_error_bound(&symbol, &table, &f);
            let worst = grid
                .iter()
                .enumerate()
                .map(|(i, &x)| (got[i] - lf.eval(x)).abs())
                .fold(0.0, f64::max);
            assert!(
                worst <= budget,
                "alpha={alpha} trial={trial}: sup diff {worst:.3e} exceeds budget {budget:.3e}"
            );
        }
    }
    println!("criterion 4 (operator equivalence): PASS");
}

// ---------------------------------------------------------------------------
// 5. Kernel certification
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_kernel_certification() {
    for &alpha in &[1.1, 1.5, 2.0, 3.0, 5.0] {
        let symbol = sym(alpha);
        let report = certify_kernel_properties(&symbol, 257, default_modes(&symbol)).unwrap();
        assert!(
            report.all_pass(),
            "alpha={alpha}: {:?}",
            report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .collect::<Vec<_>>()
        );
        let coarse = lambda_constant(&symbol, 65, 4096).unwrap();
        let fine = lambda_constant(&symbol, 129, 4096).unwrap();
        assert!(coarse > 0.0 && fine > 0.0, "alpha={alpha}: lambda must be positive");
        let rel = (fine - coarse).abs() / coarse;
        assert!(
            rel <= 0.10,
            "alpha={alpha}: lambda grid drift {rel:.3e} exceeds 10% ({coarse} -> {fine})"
        );
    }
    println!("criterion 5 (kernel certification): PASS");
}

// ---------------------------------------------------------------------------
// 6. Branch invariants
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_branch_invariants() {
    for (name, tb) in [("alpha=2 k=1", &*BRANCH_A2K1), ("alpha=2 k=2", &*BRANCH_A2K2)] {
        let b = &tb.branch;
        assert_eq!(
            b.stop_reason,
            StopReason::CrestGapReached,
            "{name}: expected the crest-gap stop, got {:?}",
            b.stop_reason
        );
        let last = b.points.last().unwrap();
        assert!(
            last.crest_gap <= 1e-3 * last.state.mu,
            "{name}: final crest gap {} vs mu {}",
            last.crest_gap,
            last.state.mu
        );
        assert!(
            b.all_diagnostics_pass(),
            "{name}: a diagnostics check failed at some accepted point"
        );
        assert!(
            tb.seconds <= 300.0,
            "{name}: branch took {:.1}s, over the 5-minute budget",
            tb.seconds
        );
    }
    println!(
        "criterion 6 (branch invariants): PASS  (k=1: {} points in {:.1}s, k=2: {} points in {:.1}s)",
        BRANCH_A2K1.branch.points.len(),
        BRANCH_A2K1.seconds,
        BRANCH_A2K2.branch.points.len(),
        BRANCH_A2K2.seconds
    );
}

// ---------------------------------------------------------------------------
// 7. Highest-wave regularity
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_highest_wave_regularity() {
    let runs: [(&str, &Lazy<TimedBranch>); 3] = [
        ("alpha=1.5", &BRANCH_A15K1),
        ("alpha=2", &BRANCH_A2K1),
        ("alpha=3", &BRANCH_A3K1),
    ];
    for (name, tb) in runs {
        let b = &tb.branch;
        let symbol = sym(b.alpha);
        let ctx = DiagnosticsContext::new(symbol, b.k, 1e-10).unwrap();

        let est = b.extrapolate_highest().unwrap();
        let limit_exponent = ctx.crest_exponent(&est.state).unwrap();
        assert!(
            (0.9..=1.3).contains(&limit_exponent),
            "{name}: limit exponent {limit_exponent:.4} outside [0.9, 1.3]"
        );

        // Mid-branch representative: the accepted point whose relative crest
        // gap is nearest one half.
        let mid = b
            .points
            .iter()
            .min_by(|a, b| {
                let da = (a.crest_gap / a.state.mu - 0.5).abs();
                let db = (b.crest_gap / b.state.mu - 0.5).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let mid_exponent = ctx.crest_exponent(&mid.state).unwrap();
        assert!(
            (1.8..=2.2).contains(&mid_exponent),
            "{name}: mid-branch exponent {mid_exponent:.4} outside [1.8, 2.2]"
        );
    }

    // Calibration: the synthetic corner profile reads exactly Lipschitz.
    let ctx = DiagnosticsContext::new(sym(2.0), 1, 1e-10).unwrap();
    let corner = corner_series(1, 0.4, 2048);
    let corner_exponent = ctx.crest_exponent(&corner).unwrap();
    assert!(
        (corner_exponent - 1.0).abs() <= 0.05,
        "corner calibration exponent {corner_exponent:.4} outside 1.0 +/- 0.05"
    );
    println!("criterion 7 (highest-wave regularity): PASS");
}

// ---------------------------------------------------------------------------
// 8. Symmetry under amplitude negation
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_symmetry() {
    let tol = 1e-10;
    let run = |s_step: f64| -> Branch {
        let mut cfg = ContinuationConfig::new(2.0, 1);
        cfg.modes = 64;
        cfg.s_step = s_step;
        cfg.newton_tol = tol;
        cfg.max_points = 8;
        // Fixed steps keep the two runs on mirrored amplitude values.
        cfg.step_control.max_step_factor = 1.0;
        continue_branch(&cfg).expect("short continuation should succeed")
    };
    let plus = run(0.02);
    let minus = run(-0.02);
    assert_eq!(plus.points.len(), minus.points.len());
    for (p, m) in plus.points.iter().zip(&minus.points) {
        assert!(
            (p.s + m.s).abs() <= 1e-14,
            "amplitudes should mirror exactly: {} vs {}",
            p.s,
            m.s
        );
        assert!(
            (p.state.mu - m.state.mu).abs() <= 10.0 * tol,
            "mu({}) = {} vs mu({}) = {}: difference {:.3e} above 10*newton_tol",
            p.s,
            p.state.mu,
            m.s,
            m.state.mu,
            (p.state.mu - m.state.mu).abs()
        );
        // The pitchfork pair: phi(-s, x) = phi(s, x + pi), i.e. the
        // coefficients of the negated-amplitude wave are (-1)^j a_j.
        for (j, (a, b)) in p.state.phi.coeffs().iter().zip(m.state.phi.coeffs()).enumerate() {
            let flipped = if j % 2 == 0 { *a } else { -*a };
            assert!(
                (flipped - b).abs() <= 10.0 * tol,
                "coefficient {j}: {flipped} vs {b}"
            );
        }
    }
    println!("criterion 8 (symmetry): PASS");
}

// ---------------------------------------------------------------------------
// 9. Constant-solution regression
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_constant_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..20 {
        let mu: f64 = rng.random_range(0.0..1.0);
        let alpha: f64 = rng.random_range(1.1..5.0);
        let symbol = sym(alpha);
        // phi == 2(mu - 1) solves the steady equation because L fixes
        // constants; the leading coefficient stores twice the mean.
        let c = 2.0 * (mu - 1.0);
        let mut coeffs = vec![0.0; 9];
        coeffs[0] = 2.0 * c;
        let state = SteadyState::new(CosineSeries::new(1, coeffs).unwrap(), mu);
        let res = residual_sup_norm(&state, &symbol, 4);
        assert!(
            res <= 1e-13,
            "trial {trial}: alpha={alpha:.3} mu={mu:.3}: residual {res:.3e} above 1e-13"
        );
    }
    println!("criterion 9 (constant-solution regression): PASS");
}
